#pragma once

#include <json.hpp>

#include "pexp/instance.hpp"
#include "pexp/rational.hpp"

namespace pexp {

// Sign/bit convention, fixed globally: +1 <-> 0 and -1 <-> 1. A point of
// {+-1}^k is the mask whose bit j carries coordinate j+1; the sign string
// "+-+" lists coordinates left to right.

inline std::string mask_to_signs(std::uint32_t mask, int k) {
    std::string s(k, '+');
    for (int j = 0; j < k; ++j)
        if ((mask >> j) & 1) s[j] = '-';
    return s;
}

inline std::uint32_t signs_to_mask(const std::string& s) {
    std::uint32_t m = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[j] == '-')
            m |= std::uint32_t{1} << j;
        else if (s[j] != '+')
            throw input_error("sign string must consist of '+' and '-': " + s);
    }
    return m;
}

/// An exact probability table over {+-1}^k.
struct PairwiseDist {
    int k = 0;
    std::vector<Rat> probs;  // size 2^k, indexed by point mask

    const Rat& at(std::uint32_t mask) const { return probs.at(mask); }
};

struct MomentCheck {
    bool ok = true;
    std::string failure;  // human-readable violated moment or axiom
    Rat value = 0;
};

/// Exact check that the table is a distribution with vanishing first and
/// second moments. Probability-axiom violations are reported distinctly from
/// moment failures.
inline MomentCheck verify_pairwise_independent(const PairwiseDist& d) {
    if (d.k < 1 || d.probs.size() != (std::size_t{1} << d.k))
        return {false, "table size is not 2^k", Rat(0)};
    Rat total = 0;
    for (std::size_t y = 0; y < d.probs.size(); ++y) {
        if (d.probs[y] < 0)
            return {false, "validation: negative probability at " +
                               mask_to_signs(static_cast<std::uint32_t>(y), d.k),
                    d.probs[y]};
        total += d.probs[y];
    }
    if (total != 1) return {false, "validation: table sums to " + rat_to_string(total), total};
    for (int i = 0; i < d.k; ++i) {
        Rat mi = 0;
        for (std::size_t y = 0; y < d.probs.size(); ++y)
            mi += ((y >> i) & 1) ? -d.probs[y] : d.probs[y];
        if (mi != 0)
            return {false, "E[y" + std::to_string(i + 1) + "] = " + rat_to_string(mi), mi};
    }
    for (int i = 0; i < d.k; ++i) {
        for (int j = i + 1; j < d.k; ++j) {
            Rat mij = 0;
            for (std::size_t y = 0; y < d.probs.size(); ++y) {
                bool neg = (((y >> i) & 1) ^ ((y >> j) & 1)) != 0;
                mij += neg ? -d.probs[y] : d.probs[y];
            }
            if (mij != 0)
                return {false,
                        "E[y" + std::to_string(i + 1) + "*y" + std::to_string(j + 1) +
                            "] = " + rat_to_string(mij),
                        mij};
        }
    }
    return {};
}

/// Uniform distribution over {+-1}^k.
inline PairwiseDist uniform_distribution(int k) {
    if (k < 1) throw input_error("uniform_distribution requires k >= 1");
    PairwiseDist d;
    d.k = k;
    d.probs.assign(std::size_t{1} << k, rat_pow2(-k));
    return d;
}

/// Uniform distribution over { y : prod y_i = target }. Pairwise independent
/// for k >= 3; k = 2 is rejected since E[y1*y2] = target there.
inline PairwiseDist parity_distribution(int k, int target) {
    if (k < 3) throw input_error("parity_distribution requires k >= 3");
    if (target != 1 && target != -1) throw input_error("parity target must be +-1");
    PairwiseDist d;
    d.k = k;
    d.probs.assign(std::size_t{1} << k, Rat(0));
    const int want = target == 1 ? 0 : 1;
    const Rat w = rat_pow2(-(k - 1));
    for (std::uint32_t y = 0; y < (std::uint32_t{1} << k); ++y)
        if (std::popcount(y) % 2 == want) d.probs[y] = w;
    return d;
}

/// Uniform distribution over the solution set of the given F2 checks
/// (each row a mask; y is in the support iff <row, y> = 0 for every row).
/// Errors unless the result is pairwise independent.
inline PairwiseDist from_generator_matrix(int k, const std::vector<std::uint32_t>& rows) {
    if (k < 1) throw input_error("from_generator_matrix requires k >= 1");
    std::vector<std::uint32_t> support;
    for (std::uint32_t y = 0; y < (std::uint32_t{1} << k); ++y) {
        bool ok = true;
        for (std::uint32_t r : rows)
            if (std::popcount(y & r) % 2 != 0) ok = false;
        if (ok) support.push_back(y);
    }
    PairwiseDist d;
    d.k = k;
    d.probs.assign(std::size_t{1} << k, Rat(0));
    Rat w = Rat(1) / Rat(static_cast<int>(support.size()));
    for (std::uint32_t y : support) d.probs[y] = w;
    auto chk = verify_pairwise_independent(d);
    if (!chk.ok)
        throw input_error("code distribution is not pairwise independent: " + chk.failure);
    return d;
}

struct AffinePlaneResult {
    bool found = false;
    std::array<std::uint32_t, 4> plane{};  // v_a, v_b, v_c, v_a^v_b^v_c
};

/// Scans all triples of support points for a contained 2-dimensional affine
/// subspace (the fourth point is the XOR of the triple).
inline AffinePlaneResult contains_affine_plane(const std::vector<std::uint32_t>& support,
                                               int k) {
    if (k > 20) throw input_error("contains_affine_plane supports k <= 20");
    std::vector<char> in(std::size_t{1} << k, 0);
    std::vector<std::uint32_t> pts;
    for (std::uint32_t v : support) {
        if (v >= (std::uint32_t{1} << k)) throw input_error("support point out of range");
        if (!in[v]) pts.push_back(v);
        in[v] = 1;
    }
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b)
            for (std::size_t c = b + 1; c < pts.size(); ++c) {
                std::uint32_t d = pts[a] ^ pts[b] ^ pts[c];
                if (in[d]) return {true, {pts[a], pts[b], pts[c], d}};
            }
    return {};
}

/// The distribution mu_C over assignments to V(C): the probability of
/// x restricted to V(C) is mu(sigma_1 x_{i_1}, ..., sigma_k x_{i_k}).
struct ClauseDist {
    Clause clause;
    std::vector<Rat> table;  // indexed by assignment mask over sorted V(C)
};

inline ClauseDist clause_distribution(const PairwiseDist& mu, const Clause& clause) {
    const int k = static_cast<int>(clause.vars.size());
    if (mu.k != k) throw input_error("clause_distribution: arity mismatch");
    std::uint32_t sign_mask = 0;
    for (int j = 0; j < k; ++j)
        if (clause.signs[j] == -1) sign_mask |= std::uint32_t{1} << j;
    ClauseDist cd;
    cd.clause = clause;
    cd.table.resize(std::size_t{1} << k);
    for (std::uint32_t x = 0; x < (std::uint32_t{1} << k); ++x)
        cd.table[x] = mu.probs[x ^ sign_mask];
    return cd;
}

// --- JSON -------------------------------------------------------------------

inline json dist_to_json(const PairwiseDist& d) {
    json j;
    j["k"] = d.k;
    j["probs"] = json::object();
    for (std::uint32_t y = 0; y < d.probs.size(); ++y)
        if (d.probs[y] != 0) j["probs"][mask_to_signs(y, d.k)] = rat_to_string(d.probs[y]);
    return j;
}

inline PairwiseDist dist_from_json(const json& j) {
    if (!j.is_object() || !j.contains("k") || !j.contains("probs"))
        throw input_error("distribution document must contain k and probs");
    if (!j["k"].is_number_integer() || !j["probs"].is_object())
        throw input_error("distribution document has wrong field types");
    PairwiseDist d;
    d.k = j["k"].get<int>();
    if (d.k < 1 || d.k > 20) throw input_error("distribution arity out of range");
    d.probs.assign(std::size_t{1} << d.k, Rat(0));
    for (auto it = j["probs"].begin(); it != j["probs"].end(); ++it) {
        std::string key = it.key();
        if (static_cast<int>(key.size()) != d.k)
            throw input_error("sign key has wrong length: " + key);
        if (!it.value().is_string())
            throw input_error("probabilities must be rational strings");
        d.probs[signs_to_mask(key)] = rat_from_string(it.value().get<std::string>());
    }
    return d;
}

}  // namespace pexp
