#pragma once

// Independent oracle for local distributions on tree-shaped (forest) closed
// sets: sample a root clause from mu_C and propagate conditionals outward,
// clause by clause. Never touches the Z-normalization formula, so agreement
// with the product-form table is a genuine two-route check.

#include <random>

#include "pexp/local_dist.hpp"

namespace oracle {

using namespace pexp;

/// Exact distribution over the closed set built by root propagation. The
/// traversal starts at root_choice[c] (an index into the component's clause
/// list) and visits clauses in BFS order with ties rotated by tie_salt.
inline std::vector<Rat> tree_propagation_table(const Instance& inst, const PairwiseDist& mu,
                                               const ClosedSet& domain,
                                               std::uint64_t tie_salt = 0) {
    const auto& vars = domain.vars;
    const int t = static_cast<int>(vars.size());
    std::vector<Rat> table(std::size_t{1} << t, Rat(1));

    // group clauses into connected components
    std::vector<int> comp(domain.clauses.size(), -1);
    int ncomp = 0;
    for (std::size_t i = 0; i < domain.clauses.size(); ++i) {
        if (comp[i] != -1) continue;
        std::vector<std::size_t> stack{i};
        comp[i] = ncomp;
        while (!stack.empty()) {
            auto x = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < domain.clauses.size(); ++j)
                if (comp[j] == -1 &&
                    inst.clauses_intersect(domain.clauses[x], domain.clauses[j])) {
                    comp[j] = ncomp;
                    stack.push_back(j);
                }
        }
        ++ncomp;
    }

    std::vector<char> assigned(t, 0);
    auto pos_of = [&](int v) {
        return static_cast<int>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin());
    };

    for (int cc = 0; cc < ncomp; ++cc) {
        std::vector<int> members;
        for (std::size_t i = 0; i < domain.clauses.size(); ++i)
            if (comp[i] == cc) members.push_back(domain.clauses[i]);
        // BFS over clauses from a salt-chosen root
        std::vector<int> order;
        std::vector<char> seen(members.size(), 0);
        std::size_t root = tie_salt % members.size();
        std::vector<std::size_t> queue{root};
        seen[root] = 1;
        while (!queue.empty()) {
            auto x = queue.front();
            queue.erase(queue.begin());
            order.push_back(members[x]);
            std::vector<std::size_t> nbrs;
            for (std::size_t j = 0; j < members.size(); ++j)
                if (!seen[j] && inst.clauses_intersect(members[x], members[j]))
                    nbrs.push_back(j);
            std::rotate(nbrs.begin(), nbrs.begin() + (nbrs.empty() ? 0 : tie_salt % nbrs.size()),
                        nbrs.end());
            for (auto j : nbrs) {
                seen[j] = 1;
                queue.push_back(j);
            }
        }

        for (std::size_t oi = 0; oi < order.size(); ++oi) {
            const Clause& c = inst.clause(order[oi]);
            std::uint32_t sign_mask = 0;
            for (int j = 0; j < inst.k(); ++j)
                if (c.signs[j] == -1) sign_mask |= std::uint32_t{1} << j;
            std::vector<int> pos(inst.k());
            for (int j = 0; j < inst.k(); ++j) pos[j] = pos_of(c.vars[j]);

            // in a forest exactly one variable is already set, except the root
            std::vector<int> preset;
            for (int j = 0; j < inst.k(); ++j)
                if (assigned[pos[j]]) preset.push_back(j);
            if (preset.size() != (oi == 0 ? 0u : 1u))
                throw std::logic_error("tree oracle: domain is not a forest");

            for (std::uint64_t x = 0; x < table.size(); ++x) {
                if (table[x] == 0) continue;
                std::uint32_t sub = 0;
                for (int j = 0; j < inst.k(); ++j) sub |= ((x >> pos[j]) & 1) << j;
                Rat w = mu.probs[sub ^ sign_mask];
                // conditional on the connecting variable: single-variable
                // marginals of mu are uniform, so divide by 1/2
                if (!preset.empty()) w *= 2;
                table[x] *= w;
            }
            for (int j = 0; j < inst.k(); ++j) assigned[pos[j]] = 1;
        }
    }
    // unconstrained variables (isolated in the domain) are uniform
    int free_count = 0;
    for (int i = 0; i < t; ++i)
        if (!assigned[i]) ++free_count;
    if (free_count > 0) {
        Rat scale = rat_pow2(-free_count);
        for (auto& p : table) p *= scale;
    }
    // every root vertex assignment was implicitly uniform over the root
    // clause's mu table already; nothing further to normalize
    return table;
}

}  // namespace oracle
