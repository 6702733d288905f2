#pragma once

#include <limits>
#include <queue>

#include "pexp/instance.hpp"

namespace pexp {

/// A hypergraph cycle: clauses in cyclic order together with distinct linking
/// vertices, links[i] in clauses[i] cap clauses[(i+1) mod len]. Two or more
/// clauses; a pair sharing two vertices counts as a 2-cycle.
struct Cycle {
    std::vector<int> clauses;
    std::vector<int> links;

    int length() const { return static_cast<int>(clauses.size()); }
};

namespace detail {

// Picks distinct link representatives for the cyclic intersection sets, or
// returns nullopt when no system of distinct representatives exists.
inline std::optional<std::vector<int>> pick_links(const Instance& inst,
                                                  const std::vector<int>& seq) {
    const int len = static_cast<int>(seq.size());
    std::vector<VarSet> inter(len);
    for (int i = 0; i < len; ++i) {
        inter[i] = vs_intersect(inst.clause(seq[i]).vars, inst.clause(seq[(i + 1) % len]).vars);
        if (inter[i].empty()) return std::nullopt;
    }
    std::vector<int> links(len);
    std::vector<int> used;
    auto rec = [&](auto&& self, int i) -> bool {
        if (i == len) return true;
        for (int v : inter[i]) {
            if (std::find(used.begin(), used.end(), v) != used.end()) continue;
            used.push_back(v);
            links[i] = v;
            if (self(self, i + 1)) return true;
            used.pop_back();
        }
        return false;
    };
    if (!rec(rec, 0)) return std::nullopt;
    return links;
}

inline void cycle_dfs(const Instance& inst, int max_len, std::vector<int>& seq,
                      std::vector<Cycle>& out) {
    const int c0 = seq.front();
    const int last = seq.back();
    if (seq.size() >= 2 && inst.clauses_intersect(last, c0)) {
        // canonical up to reflection: second element not larger than the last
        if (seq.size() == 2 || seq[1] <= seq.back()) {
            if (auto links = pick_links(inst, seq)) out.push_back(Cycle{seq, *links});
        }
    }
    if (static_cast<int>(seq.size()) >= max_len) return;
    std::vector<int> cand;
    for (int v : inst.clause(last).vars)
        for (int c : inst.clauses_of(v)) cand.push_back(c);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (int c : cand) {
        if (c <= c0) continue;  // c0 is the minimal index, fixed as anchor
        if (std::find(seq.begin(), seq.end(), c) != seq.end()) continue;
        seq.push_back(c);
        cycle_dfs(inst, max_len, seq, out);
        seq.pop_back();
    }
}

}  // namespace detail

/// Enumerates every cycle with at most max_len hyperedges, deduplicated up to
/// rotation and reflection. Intended for desk-scale instances.
inline std::vector<Cycle> find_short_cycles(const Instance& inst, int max_len) {
    if (max_len < 2) throw input_error("find_short_cycles requires max_len >= 2");
    std::vector<Cycle> out;
    std::vector<int> seq;
    for (int c0 = 0; c0 < inst.m(); ++c0) {
        seq.assign(1, c0);
        detail::cycle_dfs(inst, max_len, seq, out);
    }
    std::sort(out.begin(), out.end(), [](const Cycle& a, const Cycle& b) {
        if (a.length() != b.length()) return a.length() < b.length();
        return a.clauses < b.clauses;
    });
    return out;
}

namespace detail {

// Incidence-graph view: nodes [0,n) are variables, [n,n+m) are clauses.
// A simple incidence cycle of length 2*len maps to a hypergraph cycle of
// len hyperedges with distinct linking vertices, and conversely.
struct IncidenceGraph {
    int n, m;
    std::vector<std::vector<int>> adj;

    explicit IncidenceGraph(const Instance& inst) : n(inst.n()), m(inst.m()), adj(n + m) {
        for (int c = 0; c < m; ++c)
            for (int v : inst.clause(c).vars) {
                adj[v - 1].push_back(n + c);
                adj[n + c].push_back(v - 1);
            }
    }
};

// Shortest even cycle length through the incidence edge (var v0, clause c0):
// shortest v0 -> c0 path avoiding that one edge, plus the edge itself.
inline int cycle_through_edge(const IncidenceGraph& g, int var_node, int clause_node) {
    std::vector<int> dist(g.adj.size(), -1);
    std::queue<int> q;
    dist[var_node] = 0;
    q.push(var_node);
    while (!q.empty()) {
        int x = q.front();
        q.pop();
        for (int y : g.adj[x]) {
            if (x == var_node && y == clause_node) continue;
            if (x == clause_node && y == var_node) continue;
            if (dist[y] != -1) continue;
            dist[y] = dist[x] + 1;
            if (y == clause_node) return dist[y] + 1;
            q.push(y);
        }
    }
    return -1;
}

}  // namespace detail

struct GirthResult {
    std::optional<int> girth;      // nullopt: forest (no cycle)
    std::optional<Cycle> witness;  // one shortest cycle when girth is finite
};

/// Exact girth in hyperedges, no witness.
inline std::optional<int> girth_value(const Instance& inst) {
    detail::IncidenceGraph g(inst);
    int best = std::numeric_limits<int>::max();
    for (int c = 0; c < inst.m(); ++c) {
        for (int v : inst.clause(c).vars) {
            int len = detail::cycle_through_edge(g, v - 1, inst.n() + c);
            if (len > 0 && len < best) best = len;
        }
    }
    if (best == std::numeric_limits<int>::max()) return std::nullopt;
    return best / 2;
}

/// Exact girth plus one shortest cycle as a witness.
inline GirthResult girth(const Instance& inst) {
    GirthResult res;
    res.girth = girth_value(inst);
    if (!res.girth) return res;
    auto cycles = find_short_cycles(inst, *res.girth);
    for (const auto& cy : cycles)
        if (cy.length() == *res.girth) {
            res.witness = cy;
            break;
        }
    return res;
}

/// Shortest cycle (in hyperedges) passing through the given clause, or -1.
inline int shortest_cycle_through(const Instance& inst, int clause_idx) {
    detail::IncidenceGraph g(inst);
    int best = std::numeric_limits<int>::max();
    for (int v : inst.clause(clause_idx).vars) {
        int len = detail::cycle_through_edge(g, v - 1, inst.n() + clause_idx);
        if (len > 0) best = std::min(best, len);
    }
    return best == std::numeric_limits<int>::max() ? -1 : best / 2;
}

struct PruneResult {
    Instance instance;
    std::vector<int> removed;  // original clause indices, in removal order
};

/// Removes short cycles until girth exceeds girth_bound. Deterministic: each
/// round removes the lowest-indexed clause lying on a shortest remaining
/// cycle. Indices in `removed` refer to the input instance.
inline PruneResult prune_cycles(const Instance& inst, int girth_bound) {
    std::vector<int> keep(inst.m());
    std::iota(keep.begin(), keep.end(), 0);
    std::vector<int> removed;

    auto build = [&](const std::vector<int>& idx) {
        std::vector<Clause> cs;
        cs.reserve(idx.size());
        for (int i : idx) cs.push_back(inst.clause(i));
        return Instance(inst.n(), inst.k(), std::move(cs));
    };

    while (true) {
        Instance cur = build(keep);
        auto gv = girth_value(cur);
        if (!gv || *gv > girth_bound) return {std::move(cur), removed};
        const int g = *gv;
        int victim = -1;
        for (std::size_t i = 0; i < keep.size(); ++i) {
            if (shortest_cycle_through(cur, static_cast<int>(i)) == g) {
                victim = static_cast<int>(i);
                break;
            }
        }
        removed.push_back(keep[victim]);
        keep.erase(keep.begin() + victim);
    }
}

/// Prunes every cycle, leaving a forest.
inline PruneResult prune_to_forest(const Instance& inst) {
    return prune_cycles(inst, inst.m());
}

}  // namespace pexp
