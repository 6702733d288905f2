#pragma once

#include <map>
#include <random>

#include "pexp/expansion.hpp"

namespace pexp {

/// A variable set closed under R-path completion, together with the clauses
/// it induces.
struct ClosedSet {
    VarSet vars;
    std::vector<int> clauses;  // exactly { C : V(C) subseteq vars }, sorted
    int radius = 0;
};

struct IsClosedResult {
    bool closed = true;
    std::optional<HyperPath> violation;  // a path leaving the set, if any
};

/// True iff every path of length <= R between two distinct members of A stays
/// inside A (all variables of all its clauses contained in A).
inline IsClosedResult is_closed(const Instance& inst, const VarSet& A, int R) {
    if (R < 1) throw input_error("is_closed requires R >= 1");
    VarSet a = vs_sorted(A);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            for (const auto& p : paths_between(inst, a[i], a[j], R)) {
                if (!vs_subset(path_vars(inst, p.edges), a)) return {false, p};
            }
        }
    }
    return {true, std::nullopt};
}

struct ClosureOptions {
    int radius = 3;
    std::optional<int> budget_vars;  // default: 2*R*k*|S| + 16
    std::optional<int> girth;        // enables the lemma-hypothesis warning
};

struct ClosureResult {
    ClosedSet set;
    // fixpoint trace: each round's batch of shortest violating paths
    std::vector<std::vector<HyperPath>> trace;
    bool hypothesis_warning = false;
    std::string note;
};

/// Iterative R-closure: repeatedly add all clauses of every shortest path
/// (at the current minimal violating length) between members of the current
/// set, until no path of length <= R escapes. Batching all shortest paths per
/// round makes the fixpoint order-independent and the trace deterministic.
inline ClosureResult compute_closure(const Instance& inst, const VarSet& S,
                                     const ClosureOptions& opts = {}) {
    const int R = opts.radius;
    if (R < 1) throw input_error("compute_closure requires radius >= 1");
    ClosureResult res;
    if (opts.girth && *opts.girth >= 0 && R * 2 >= *opts.girth) {
        res.hypothesis_warning = true;
        res.note = "radius " + std::to_string(R) + " is not below girth/2 = " +
                   std::to_string(*opts.girth / 2.0) + "; closure lemmas may not apply";
    }
    VarSet X = vs_sorted(S);
    const int budget =
        opts.budget_vars.value_or(2 * R * inst.k() * static_cast<int>(X.size()) + 16);
    std::vector<char> in_A(inst.m(), 0);

    while (true) {
        int best_len = R + 1;
        std::vector<HyperPath> batch;
        for (std::size_t i = 0; i < X.size(); ++i) {
            for (std::size_t j = i + 1; j < X.size(); ++j) {
                for (const auto& p : paths_between(inst, X[i], X[j], std::min(best_len, R))) {
                    bool absorbed = true;
                    for (int c : p.edges)
                        if (!in_A[c]) absorbed = false;
                    if (absorbed) continue;
                    if (p.length() < best_len) {
                        best_len = p.length();
                        batch.clear();
                    }
                    if (p.length() == best_len) batch.push_back(p);
                }
            }
        }
        if (batch.empty()) break;
        for (const auto& p : batch)
            for (int c : p.edges) {
                if (!in_A[c]) X = vs_union(X, inst.clause(c).vars);
                in_A[c] = 1;
            }
        res.trace.push_back(std::move(batch));
        if (static_cast<int>(X.size()) > budget)
            throw budget_error("closure of " + vs_to_string(vs_sorted(S)) + " exceeded " +
                               std::to_string(budget) +
                               " variables; the size lemma's hypothesis is violated");
    }
    res.set.vars = X;
    res.set.clauses = inst.induced_clauses(X);
    res.set.radius = R;
    return res;
}

/// Convenience: just the closed set.
inline ClosedSet closure_of(const Instance& inst, const VarSet& S, int radius = 3) {
    ClosureOptions o;
    o.radius = radius;
    return compute_closure(inst, S, o).set;
}

/// Replays a closure trace from S: applies each recorded batch in order.
/// Reproducing the final set certifies that every induced clause was forced
/// by some violating path.
inline ClosedSet replay_closure_trace(const Instance& inst, const VarSet& S,
                                      const std::vector<std::vector<HyperPath>>& trace,
                                      int radius) {
    VarSet X = vs_sorted(S);
    for (const auto& batch : trace)
        for (const auto& p : batch)
            for (int c : p.edges) X = vs_union(X, inst.clause(c).vars);
    ClosedSet out;
    out.vars = X;
    out.clauses = inst.induced_clauses(X);
    out.radius = radius;
    return out;
}

/// The effective ball radius: min(100, floor((girth-1)/2)); 100 on forests.
inline int ball_radius(const Instance& inst, std::optional<int> girth_value) {
    if (!girth_value) return 100;
    return std::min(100, (*girth_value - 1) / 2);
}

inline int ball_radius(const Instance& inst) { return ball_radius(inst, girth_value(inst)); }

// --- randomized property verification --------------------------------------

struct PropertyCheck {
    std::string name;
    int trials = 0;
    std::vector<std::string> violations;
    bool pass() const { return violations.empty(); }
};

struct PropertyReport {
    std::vector<PropertyCheck> checks;
    std::string note;
    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass()) return false;
        return true;
    }
};

namespace detail {

inline VarSet random_subset(int n, int size, std::mt19937_64& rng) {
    VarSet s;
    while (static_cast<int>(s.size()) < size) {
        int v = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        if (!vs_contains(s, v)) s = vs_union(s, {v});
    }
    return s;
}

inline std::vector<VarSet> components_of(const Instance& inst, const VarSet& vars,
                                         const std::vector<int>& clauses) {
    std::map<int, int> comp;
    for (int v : vars) comp[v] = v;
    auto find = [&](int v) {
        while (comp[v] != v) v = comp[v] = comp[comp[v]];
        return v;
    };
    for (int c : clauses) {
        const auto& cv = inst.clause(c).vars;
        for (std::size_t i = 1; i < cv.size(); ++i) comp[find(cv[0])] = find(cv[i]);
    }
    std::map<int, VarSet> groups;
    for (int v : vars) groups[find(v)].push_back(v);
    std::vector<VarSet> out;
    for (auto& [root, grp] : groups) out.push_back(vs_sorted(grp));
    return out;
}

}  // namespace detail

/// Randomized verification of the simple closure properties: closedness under
/// intersection, monotonicity, component anchoring, and closure of unions of
/// closures.
inline PropertyReport check_closure_properties(const Instance& inst, int trials, int R,
                                               std::uint64_t seed) {
    PropertyReport rep;
    auto gr = girth(inst);
    if (gr.girth && 2 * R >= *gr.girth)
        rep.note = "hypothesis R < girth/2 violated (girth " + std::to_string(*gr.girth) +
                   "); properties are reported, not asserted";
    std::mt19937_64 rng(seed);
    ClosureOptions opts;
    opts.radius = R;
    opts.budget_vars = inst.n();

    PropertyCheck inter{"intersection-closed"}, mono{"monotonicity"},
        comp{"component-anchoring"}, uni{"closure-of-union"};
    for (int t = 0; t < trials; ++t) {
        int sz = 1 + static_cast<int>(rng() % 3);
        VarSet a = detail::random_subset(inst.n(), sz, rng);
        VarSet b = detail::random_subset(inst.n(), 1 + static_cast<int>(rng() % 3), rng);
        ClosedSet ca = compute_closure(inst, a, opts).set;
        ClosedSet cb = compute_closure(inst, b, opts).set;

        ++inter.trials;
        VarSet ab = vs_intersect(ca.vars, cb.vars);
        if (!is_closed(inst, ab, R).closed)
            inter.violations.push_back("cl" + vs_to_string(a) + " cap cl" + vs_to_string(b) +
                                       " = " + vs_to_string(ab) + " is not closed");

        ++mono.trials;
        VarSet sub = a;
        VarSet sup = vs_union(a, b);
        ClosedSet csup = compute_closure(inst, sup, opts).set;
        if (!vs_subset(ca.vars, csup.vars))
            mono.violations.push_back("cl" + vs_to_string(sub) + " not within cl" +
                                      vs_to_string(sup));

        ++comp.trials;
        for (const auto& component : detail::components_of(inst, ca.vars, ca.clauses)) {
            if (component.size() >= 2 && vs_intersect(component, a).size() < 2)
                comp.violations.push_back("component " + vs_to_string(component) + " of cl" +
                                          vs_to_string(a) + " meets it in < 2 elements");
        }

        ++uni.trials;
        VarSet u = vs_union(a, b);
        ClosedSet direct = compute_closure(inst, u, opts).set;
        ClosedSet staged = compute_closure(inst, vs_union(ca.vars, cb.vars), opts).set;
        if (direct.vars != staged.vars)
            uni.violations.push_back("cl(A cup B) != cl(cl(A) cup cl(B)) for A=" +
                                     vs_to_string(a) + " B=" + vs_to_string(b));
    }
    rep.checks = {inter, mono, comp, uni};
    return rep;
}

struct SizeBoundOptions {
    int radius = 3;
    int max_set_size = 4;            // desk-scale sampling cap for |S|
    std::optional<double> eta;       // when set, records the lemma's |S| bound
};

/// Samples random sets S and asserts the closure size bounds
/// |C(cl_R(S))| <= 2R|S| and |cl_R(S)| <= 2Rk|S|.
inline PropertyReport check_size_bound(const Instance& inst, int trials, std::uint64_t seed,
                                       const SizeBoundOptions& opts = {}) {
    PropertyReport rep;
    const int R = opts.radius;
    if (opts.eta) {
        double hyp = *opts.eta * inst.n() / (10.0 * R);
        rep.note = "lemma hypothesis |S| <= eta*n/(10R) = " + std::to_string(hyp) +
                   "; sampled |S| <= " + std::to_string(opts.max_set_size);
    }
    std::mt19937_64 rng(seed);
    PropertyCheck clauses_bound{"clause-count-bound"}, vars_bound{"variable-count-bound"};
    for (int t = 0; t < trials; ++t) {
        int sz = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(opts.max_set_size));
        VarSet s = detail::random_subset(inst.n(), sz, rng);
        ClosureOptions copts;
        copts.radius = R;
        ClosedSet cl;
        try {
            cl = compute_closure(inst, s, copts).set;
        } catch (const budget_error&) {
            clauses_bound.violations.push_back("closure of " + vs_to_string(s) +
                                               " exceeded its size budget");
            ++clauses_bound.trials;
            ++vars_bound.trials;
            continue;
        }
        ++clauses_bound.trials;
        if (static_cast<int>(cl.clauses.size()) > 2 * R * sz)
            clauses_bound.violations.push_back(
                "S=" + vs_to_string(s) + ": " + std::to_string(cl.clauses.size()) +
                " clauses > 2R|S| = " + std::to_string(2 * R * sz));
        ++vars_bound.trials;
        if (static_cast<int>(cl.vars.size()) > 2 * R * inst.k() * sz)
            vars_bound.violations.push_back(
                "S=" + vs_to_string(s) + ": " + std::to_string(cl.vars.size()) +
                " vars > 2Rk|S| = " + std::to_string(2 * R * inst.k() * sz));
    }
    rep.checks = {clauses_bound, vars_bound};
    return rep;
}

}  // namespace pexp
