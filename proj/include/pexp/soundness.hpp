#pragma once

#include <random>
#include <thread>

#include "pexp/instance.hpp"
#include "pexp/rational.hpp"

namespace pexp {

/// Histogram of clause outputs {C(x)} over all clauses of an instance.
struct OutputDistribution {
    int k = 0;
    std::vector<std::uint64_t> counts;  // size 2^k, indexed by output mask
    std::uint64_t m = 0;
};

namespace detail {

struct PackedClause {
    std::array<int, 8> pos;       // variable bit positions (var - 1)
    std::uint32_t sign_mask = 0;  // bit j set iff sign_j = -1
    int k = 0;
};

inline std::vector<PackedClause> pack_clauses(const Instance& inst) {
    if (inst.k() > 8) throw budget_error("soundness scans support k <= 8");
    if (inst.n() > 64) throw budget_error("soundness scans support n <= 64");
    std::vector<PackedClause> out;
    out.reserve(inst.m());
    for (const auto& c : inst.clauses()) {
        PackedClause pc;
        pc.k = inst.k();
        for (int j = 0; j < inst.k(); ++j) {
            pc.pos[j] = c.vars[j] - 1;
            if (c.signs[j] == -1) pc.sign_mask |= std::uint32_t{1} << j;
        }
        out.push_back(pc);
    }
    return out;
}

inline std::uint32_t eval_clause(const PackedClause& pc, std::uint64_t x) {
    std::uint32_t y = 0;
    for (int j = 0; j < pc.k; ++j) y |= static_cast<std::uint32_t>((x >> pc.pos[j]) & 1) << j;
    return y ^ pc.sign_mask;
}

// integer deviation: sum_y |2^k * count_y - m|; TV distance = dev / (2 * 2^k * m)
inline std::uint64_t integer_deviation(const std::vector<std::uint64_t>& counts,
                                       std::uint64_t m, int k) {
    std::uint64_t dev = 0;
    const std::uint64_t full = std::uint64_t{1} << k;
    for (std::uint64_t c : counts) {
        std::uint64_t scaled = full * c;
        dev += scaled > m ? scaled - m : m - scaled;
    }
    return dev;
}

}  // namespace detail

/// Exact histogram of C_i(x) over all clauses.
inline OutputDistribution assignment_distribution(const Instance& inst, std::uint64_t x_mask) {
    OutputDistribution d;
    d.k = inst.k();
    d.m = static_cast<std::uint64_t>(inst.m());
    d.counts.assign(std::size_t{1} << inst.k(), 0);
    for (const auto& pc : detail::pack_clauses(inst)) ++d.counts[detail::eval_clause(pc, x_mask)];
    return d;
}

inline OutputDistribution assignment_distribution(const Instance& inst,
                                                  const std::vector<int>& x) {
    if (static_cast<int>(x.size()) != inst.n())
        throw input_error("assignment length differs from n");
    std::uint64_t mask = 0;
    for (int v = 1; v <= inst.n(); ++v) {
        if (x[v - 1] != 1 && x[v - 1] != -1) throw input_error("assignment entries must be +-1");
        if (x[v - 1] == -1) mask |= std::uint64_t{1} << (v - 1);
    }
    return assignment_distribution(inst, mask);
}

/// Exact total variation distance between two output histograms.
inline Rat stat_distance(const OutputDistribution& a, const OutputDistribution& b) {
    if (a.k != b.k) throw input_error("stat_distance: arity mismatch");
    if (a.m == 0 || b.m == 0) throw input_error("stat_distance: empty distribution");
    Rat acc = 0;
    for (std::size_t y = 0; y < a.counts.size(); ++y) {
        Rat diff = Rat(static_cast<long>(a.counts[y])) / Rat(static_cast<long>(a.m)) -
                   Rat(static_cast<long>(b.counts[y])) / Rat(static_cast<long>(b.m));
        acc += diff < 0 ? -diff : diff;
    }
    return acc / 2;
}

/// Exact total variation distance to the uniform distribution on {+-1}^k.
inline Rat stat_distance_uniform(const OutputDistribution& a) {
    if (a.m == 0) throw input_error("stat_distance: empty distribution");
    return Rat(static_cast<long>(detail::integer_deviation(a.counts, a.m, a.k))) /
           (Rat(2) * rat_pow2(a.k) * Rat(static_cast<long>(a.m)));
}

/// Same hypergraph, fresh uniform signs; deterministic per seed.
inline Instance randomize_signs(const Instance& inst, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Clause> clauses = inst.clauses();
    for (auto& c : clauses) {
        std::uint64_t bits = rng();
        for (int j = 0; j < inst.k(); ++j) c.signs[j] = (bits >> j) & 1 ? -1 : 1;
    }
    return Instance(inst.n(), inst.k(), std::move(clauses));
}

enum class DeviationMode { exhaustive, sampled };

struct DeviationReport {
    DeviationMode mode = DeviationMode::exhaustive;
    Rat max_distance = 0;
    std::uint64_t argmax = 0;       // assignment mask achieving the max
    std::uint64_t scanned = 0;      // assignments examined
    std::uint64_t ascent_steps = 0; // greedy improvements in sampled mode
};

/// Worst-case statistical distance of {C(x)} from uniform over assignments.
/// Exhaustive mode scans all 2^n assignments (n <= 20), parallelized by
/// range; sampled mode draws `budget` random assignments and runs a 1-flip
/// greedy ascent from the worst sample. Deterministic for a given seed and
/// independent of the worker count.
inline DeviationReport max_deviation(const Instance& inst, DeviationMode mode,
                                     std::uint64_t budget = 100000, std::uint64_t seed = 1,
                                     int workers = 1) {
    if (inst.m() == 0) throw input_error("max_deviation needs at least one clause");
    auto packed = detail::pack_clauses(inst);
    const std::uint64_t m = static_cast<std::uint64_t>(inst.m());
    const int k = inst.k();

    auto deviation_of = [&](std::uint64_t x) {
        std::array<std::uint64_t, 256> counts{};
        for (const auto& pc : packed) ++counts[detail::eval_clause(pc, x)];
        std::uint64_t dev = 0;
        const std::uint64_t full = std::uint64_t{1} << k;
        for (std::uint64_t y = 0; y < full; ++y) {
            std::uint64_t scaled = full * counts[y];
            dev += scaled > m ? scaled - m : m - scaled;
        }
        return dev;
    };

    DeviationReport rep;
    rep.mode = mode;
    std::uint64_t best_dev = 0;
    std::uint64_t best_x = 0;

    if (mode == DeviationMode::exhaustive) {
        if (inst.n() > 20) throw input_error("exhaustive max_deviation requires n <= 20");
        const std::uint64_t total = std::uint64_t{1} << inst.n();
        const int nw = std::max(1, workers);
        std::vector<std::uint64_t> devs(nw, 0), xs(nw, 0);
        std::vector<std::thread> pool;
        const std::uint64_t chunk = (total + nw - 1) / nw;
        for (int w = 0; w < nw; ++w) {
            pool.emplace_back([&, w]() {
                std::uint64_t lo = w * chunk, hi = std::min(total, lo + chunk);
                std::uint64_t bd = 0, bx = lo < hi ? lo : 0;
                for (std::uint64_t x = lo; x < hi; ++x) {
                    std::uint64_t d = deviation_of(x);
                    if (d > bd) {
                        bd = d;
                        bx = x;
                    }
                }
                devs[w] = bd;
                xs[w] = bx;
            });
        }
        for (auto& t : pool) t.join();
        for (int w = 0; w < nw; ++w) {
            if (devs[w] > best_dev || (devs[w] == best_dev && xs[w] < best_x)) {
                best_dev = devs[w];
                best_x = xs[w];
            }
        }
        rep.scanned = total;
    } else {
        std::mt19937_64 rng(seed);
        const std::uint64_t space_mask =
            inst.n() >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << inst.n()) - 1);
        best_x = 0;
        best_dev = deviation_of(0);
        rep.scanned = 1;
        for (std::uint64_t t = 0; t < budget; ++t) {
            std::uint64_t x = rng() & space_mask;
            std::uint64_t d = deviation_of(x);
            ++rep.scanned;
            if (d > best_dev || (d == best_dev && x < best_x)) {
                best_dev = d;
                best_x = x;
            }
        }
        // 1-flip greedy ascent: worst assignments are structured, and pure
        // sampling underestimates the maximum
        bool improved = true;
        while (improved) {
            improved = false;
            for (int b = 0; b < inst.n(); ++b) {
                std::uint64_t x = best_x ^ (std::uint64_t{1} << b);
                std::uint64_t d = deviation_of(x);
                ++rep.scanned;
                if (d > best_dev) {
                    best_dev = d;
                    best_x = x;
                    ++rep.ascent_steps;
                    improved = true;
                }
            }
        }
    }
    rep.argmax = best_x;
    rep.max_distance = Rat(static_cast<long>(best_dev)) /
                       (Rat(2) * rat_pow2(k) * Rat(static_cast<long>(m)));
    return rep;
}

}  // namespace pexp
