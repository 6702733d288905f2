#pragma once

#include <random>

#include "pexp/instance.hpp"
#include "pexp/rational.hpp"

namespace pexp {

/// Computes the edge probability p = 4*gamma*k!/n^(k-1) of the random model.
inline Rat edge_probability(int n, int k, const Rat& gamma) {
    mpz_class fact = 1;
    for (int j = 2; j <= k; ++j) fact *= j;
    mpz_class pow = 1;
    for (int j = 0; j + 1 < k; ++j) pow *= n;
    return Rat(4) * gamma * Rat(fact) / Rat(pow);
}

/// Samples a random instance: every k-subset of [n] is included independently
/// with probability p, signs uniform. Bit-reproducible for a given seed: the
/// k-subsets are visited in lexicographic order and each consumes exactly one
/// 64-bit draw, plus one more per included clause for its signs.
inline Instance generate_random(int n, int k, const Rat& gamma, std::uint64_t seed) {
    if (n < k || k < 2) throw input_error("generate_random requires n >= k >= 2");
    if (gamma <= 0) throw input_error("generate_random requires gamma > 0");
    const Rat p = edge_probability(n, k, gamma);
    if (p > 1)
        throw input_error("edge probability p = " + rat_to_string(p) +
                          " exceeds 1; this parameterization is outside the sparse regime");

    // inclusion threshold: draw < floor(p * 2^64); p == 1 includes everything
    const bool always = (p == 1);
    Rat scaled = p * rat_pow2(64);
    mpz_class thr_z = scaled.get_num() / scaled.get_den();
    const std::uint64_t thr = always ? 0 : mpz_get_ui(thr_z.get_mpz_t());

    std::mt19937_64 rng(seed);
    std::vector<Clause> clauses;
    std::vector<int> comb(k);
    for (int j = 0; j < k; ++j) comb[j] = j + 1;
    while (true) {
        std::uint64_t draw = rng();
        if (always || draw < thr) {
            Clause c;
            c.vars = comb;
            std::uint64_t sign_bits = rng();
            c.signs.resize(k);
            for (int j = 0; j < k; ++j) c.signs[j] = (sign_bits >> j) & 1 ? -1 : 1;
            clauses.push_back(std::move(c));
        }
        // next k-combination in lexicographic order
        int i = k - 1;
        while (i >= 0 && comb[i] == n - (k - 1 - i)) --i;
        if (i < 0) break;
        ++comb[i];
        for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
    }
    return Instance(n, k, std::move(clauses));
}

}  // namespace pexp
