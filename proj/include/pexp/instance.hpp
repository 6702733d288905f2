#pragma once

#include <json.hpp>

#include <numeric>
#include <optional>
#include <queue>
#include <utility>

#include "pexp/common.hpp"

namespace pexp {

using json = nlohmann::ordered_json;

/// A signed k-clause. Variables are 1-based, strictly increasing; signs are
/// aligned with vars and take values in {+1, -1}.
struct Clause {
    VarSet vars;
    std::vector<int> signs;
};

/// A (k,n)-instance: n Boolean variables plus an ordered list of signed
/// k-clauses, viewed as a k-uniform hypergraph. Clause list order is stable
/// and defines the clause index used by the orthogonalizer's ordering.
/// Immutable after construction; all queries are read-only.
class Instance {
public:
    Instance(int n, int k, std::vector<Clause> clauses)
        : n_(n), k_(k), clauses_(std::move(clauses)) {
        if (n_ < 1) throw input_error("instance requires n >= 1");
        if (k_ < 2) throw input_error("instance requires k >= 2");
        if (k_ > n_) throw input_error("instance requires k <= n");
        var_clauses_.assign(n_ + 1, {});
        for (std::size_t ci = 0; ci < clauses_.size(); ++ci) {
            auto& c = clauses_[ci];
            if (c.vars.size() != static_cast<std::size_t>(k_) ||
                c.signs.size() != static_cast<std::size_t>(k_))
                throw input_error("clause " + std::to_string(ci) + " must have exactly k=" +
                                  std::to_string(k_) + " vars and signs");
            // canonical form: vars ascending, signs carried along
            std::vector<std::pair<int, int>> lits(k_);
            for (int j = 0; j < k_; ++j) lits[j] = {c.vars[j], c.signs[j]};
            std::sort(lits.begin(), lits.end());
            for (int j = 0; j < k_; ++j) {
                c.vars[j] = lits[j].first;
                c.signs[j] = lits[j].second;
                if (c.vars[j] < 1 || c.vars[j] > n_)
                    throw input_error("clause " + std::to_string(ci) +
                                      ": variable index out of range");
                if (j > 0 && c.vars[j] == c.vars[j - 1])
                    throw input_error("clause " + std::to_string(ci) +
                                      ": duplicate variable " + std::to_string(c.vars[j]));
                if (c.signs[j] != 1 && c.signs[j] != -1)
                    throw input_error("clause " + std::to_string(ci) +
                                      ": signs must be +1 or -1");
            }
            for (int v : c.vars) var_clauses_[v].push_back(static_cast<int>(ci));
        }
    }

    int n() const { return n_; }
    int k() const { return k_; }
    int m() const { return static_cast<int>(clauses_.size()); }
    const std::vector<Clause>& clauses() const { return clauses_; }
    const Clause& clause(int i) const { return clauses_.at(i); }
    const std::vector<int>& clauses_of(int v) const { return var_clauses_.at(v); }

    bool clauses_intersect(int a, int b) const {
        return !vs_intersect(clauses_[a].vars, clauses_[b].vars).empty();
    }

    /// Clause indices whose variable set is contained in `vars`.
    std::vector<int> induced_clauses(const VarSet& vars) const {
        std::vector<int> out;
        for (int i = 0; i < m(); ++i)
            if (vs_subset(clauses_[i].vars, vars)) out.push_back(i);
        return out;
    }

private:
    int n_;
    int k_;
    std::vector<Clause> clauses_;
    std::vector<std::vector<int>> var_clauses_;
};

/// A hypergraph path: an ordered clause sequence where consecutive clauses
/// intersect and non-consecutive clauses are disjoint.
struct HyperPath {
    std::vector<int> edges;         // clause indices, in path order
    std::pair<int, int> endpoints;  // the two joined variables

    int length() const { return static_cast<int>(edges.size()); }
};

inline VarSet path_vars(const Instance& inst, const std::vector<int>& edges) {
    VarSet out;
    for (int c : edges) out = vs_union(out, inst.clause(c).vars);
    return out;
}

namespace detail {

inline void extend_paths(const Instance& inst, int source, int target, int max_len,
                         std::vector<int>& seq, std::vector<HyperPath>& out,
                         const std::optional<int>& stop_after) {
    const Clause& last = inst.clause(seq.back());
    // v must be a proper endpoint: present in the last clause only
    if (vs_contains(last.vars, target) &&
        (seq.size() == 1 || !vs_contains(inst.clause(seq[seq.size() - 2]).vars, target))) {
        out.push_back(HyperPath{seq, {source, target}});
        if (stop_after && static_cast<int>(out.size()) >= *stop_after) return;
    }
    if (static_cast<int>(seq.size()) >= max_len) return;
    std::vector<int> cand;
    for (int v : last.vars)
        for (int c : inst.clauses_of(v)) cand.push_back(c);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (int c : cand) {
        if (std::find(seq.begin(), seq.end(), c) != seq.end()) continue;
        // u must stay a proper endpoint of the first clause
        if (seq.size() == 1 && vs_contains(inst.clause(c).vars, source)) continue;
        // non-consecutive clauses must be disjoint
        bool ok = true;
        for (std::size_t i = 0; i + 1 < seq.size() && ok; ++i)
            if (inst.clauses_intersect(seq[i], c)) ok = false;
        if (!ok) continue;
        seq.push_back(c);
        extend_paths(inst, source, target, max_len, seq, out, stop_after);
        seq.pop_back();
        if (stop_after && static_cast<int>(out.size()) >= *stop_after) return;
    }
}

}  // namespace detail

/// Enumerates every path of length <= max_len between the proper endpoints
/// u and v: u appears only in the first clause, v only in the last. Under
/// girth > 2*max_len such a path is unique. Deterministic DFS order.
inline std::vector<HyperPath> paths_between(const Instance& inst, int u, int v, int max_len,
                                            std::optional<int> stop_after = std::nullopt) {
    if (u == v) throw input_error("paths_between requires distinct endpoints");
    std::vector<HyperPath> out;
    std::vector<int> seq;
    for (int c : inst.clauses_of(u)) {
        seq.assign(1, c);
        detail::extend_paths(inst, u, v, max_len, seq, out, stop_after);
        if (stop_after && static_cast<int>(out.size()) >= *stop_after) break;
    }
    return out;
}

inline constexpr int kInfiniteDistance = -1;

/// Breadth-first distance between two variables in hyperedge hops;
/// kInfiniteDistance when disconnected.
inline int distance(const Instance& inst, int u, int v) {
    if (u < 1 || u > inst.n() || v < 1 || v > inst.n())
        throw input_error("distance: variable out of range");
    if (u == v) return 0;
    std::vector<int> dist(inst.n() + 1, -1);
    dist[u] = 0;
    std::queue<int> q;
    q.push(u);
    while (!q.empty()) {
        int x = q.front();
        q.pop();
        for (int c : inst.clauses_of(x)) {
            for (int y : inst.clause(c).vars) {
                if (dist[y] != -1) continue;
                dist[y] = dist[x] + 1;
                if (y == v) return dist[y];
                q.push(y);
            }
        }
    }
    return kInfiniteDistance;
}

// --- JSON round trip ------------------------------------------------------

inline json instance_to_json(const Instance& inst) {
    json j;
    j["n"] = inst.n();
    j["k"] = inst.k();
    j["clauses"] = json::array();
    for (const auto& c : inst.clauses()) {
        json jc;
        jc["vars"] = c.vars;
        jc["signs"] = c.signs;
        j["clauses"].push_back(jc);
    }
    return j;
}

inline Instance instance_from_json(const json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("k") || !j.contains("clauses"))
        throw input_error("instance document must contain n, k, clauses");
    if (!j["n"].is_number_integer() || !j["k"].is_number_integer() || !j["clauses"].is_array())
        throw input_error("instance document has wrong field types");
    try {
        std::vector<Clause> clauses;
        for (const auto& jc : j["clauses"]) {
            if (!jc.is_object() || !jc.contains("vars") || !jc.contains("signs"))
                throw input_error("clause entries must contain vars and signs");
            Clause c;
            c.vars = jc["vars"].get<std::vector<int>>();
            c.signs = jc["signs"].get<std::vector<int>>();
            clauses.push_back(std::move(c));
        }
        return Instance(j["n"].get<int>(), j["k"].get<int>(), std::move(clauses));
    } catch (const json::exception& e) {
        throw input_error(std::string("instance schema violation: ") + e.what());
    }
}

inline std::string serialize_instance(const Instance& inst) {
    return instance_to_json(inst).dump(2) + "\n";
}

inline Instance load_instance(const std::string& bytes) {
    json j;
    try {
        j = json::parse(bytes);
    } catch (const std::exception& e) {
        throw input_error(std::string("instance JSON parse error: ") + e.what());
    }
    return instance_from_json(j);
}

}  // namespace pexp
