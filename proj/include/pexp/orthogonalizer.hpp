#pragma once

#include "pexp/ordering.hpp"
#include "pexp/pseudo_expectation.hpp"

namespace pexp {

/// One member of the locally orthogonalized family: chi~_i = chi_{A_i} -
/// proj, where the projection lives in the local correlated space V_i. The
/// coefficient of chi_{A_i} is always exactly 1.
struct OrthoElement {
    VarSet set;                     // A_i
    std::map<SetMask, Rat> coeffs;  // full support of chi~_i, including A_i
    Rat norm2 = 0;                  // E~[chi~_i^2] (zero is legitimate)
    int kernel_dim = 0;             // rank deficiency of the local Gram
};

struct OrthoBasis {
    std::vector<OrthoElement> elems;  // aligned with ordering positions
    int ball_radius = 0;
    bool restricted = false;
};

/// The basis index sets of the i-th local correlated space
/// V_i = Span{ chi_B : |B| <= d, B within cl_R(A_i), B strictly before A_i },
/// listed in ordering rank.
inline std::vector<SetMask> local_space(const Instance& inst, const SetOrdering& ordering,
                                        int i, int ball_radius,
                                        int budget_vars = kDefaultTableBudgetVars) {
    ClosureOptions opts;
    opts.radius = ball_radius;
    opts.budget_vars = budget_vars;
    ClosedSet ball = compute_closure(inst, ordering.vars_at(i), opts).set;
    const SetMask ai = ordering.set_at(i);
    std::vector<std::pair<int, SetMask>> ranked;
    for (const auto& b : subsets_up_to(ball.vars, ordering.degree())) {
        SetMask m = vs_to_mask(b);
        if (m == ai) continue;
        auto r = ordering.rank_of(m);
        if (!r) throw input_error("local_space: subset missing from the ordering");
        if (ordering.precedes(m, ai)) ranked.push_back({*r, m});
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<SetMask> out;
    out.reserve(ranked.size());
    for (auto& [r, m] : ranked) out.push_back(m);
    return out;
}

struct Projection {
    std::map<SetMask, Rat> coeffs;  // coefficients of the projection in V_i
    int kernel_dim = 0;
};

/// Solves the normal equations of min_{f in V_i} E~[(chi_i - f)^2] over the
/// rationals; rank deficiency is resolved by the minimum-norm solution on the
/// kernel complement, making the output canonical.
inline Projection project(const PseudoExpectation& pe, const SetOrdering& ordering, int i,
                          int ball_radius) {
    auto basis = local_space(pe.instance(), ordering, i, ball_radius,
                             pe.params().table_budget_vars);
    Projection pr;
    if (basis.empty()) return pr;
    const SetMask ai = ordering.set_at(i);
    const std::size_t n = basis.size();
    std::vector<std::vector<Rat>> g(n, std::vector<Rat>(n));
    std::vector<Rat> b(n);
    for (std::size_t r = 0; r < n; ++r) {
        b[r] = pe.char_moment(basis[r] ^ ai);
        for (std::size_t c = r; c < n; ++c) {
            Rat v = pe.char_moment(basis[r] ^ basis[c]);
            g[r][c] = v;
            g[c][r] = v;
        }
    }
    PsdSolve sol;
    try {
        sol = solve_psd_system(g, b);
    } catch (const verification_error& e) {
        throw verification_error("local Gram at index " + std::to_string(i) +
                                 " is not PSD: " + e.what());
    }
    if (!sol.consistent)
        throw verification_error("normal equations at index " + std::to_string(i) +
                                 " are inconsistent; the local moments are broken");
    pr.kernel_dim = sol.kernel_dim;
    for (std::size_t r = 0; r < n; ++r)
        if (sol.solution[r] != 0) pr.coeffs[basis[r]] = sol.solution[r];
    return pr;
}

/// Runs the full local orthogonalization in ordering sequence.
inline OrthoBasis orthogonalize_all(const PseudoExpectation& pe, const SetOrdering& ordering,
                                    int ball_radius) {
    OrthoBasis basis;
    basis.ball_radius = ball_radius;
    for (int i = 0; i < static_cast<int>(ordering.size()); ++i) {
        auto proj = project(pe, ordering, i, ball_radius);
        OrthoElement el;
        el.set = ordering.vars_at(i);
        el.kernel_dim = proj.kernel_dim;
        el.coeffs[ordering.set_at(i)] = 1;
        for (const auto& [m, c] : proj.coeffs) el.coeffs[m] -= c;
        for (auto it = el.coeffs.begin(); it != el.coeffs.end();)
            it = (it->second == 0 && it->first != ordering.set_at(i)) ? el.coeffs.erase(it)
                                                                      : std::next(it);
        Polynomial p(el.coeffs.begin(), el.coeffs.end());
        el.norm2 = pe(poly_mul(p, p));
        basis.elems.push_back(std::move(el));
    }
    return basis;
}

/// Restricted mode: orthogonalizes only a user-supplied family of sets,
/// ordered by the same comparator; V_i is cut down to family members.
inline OrthoBasis orthogonalize_family(const PseudoExpectation& pe,
                                       const std::vector<VarSet>& family, int ball_radius,
                                       int closure_radius = 3) {
    const Instance& inst = pe.instance();
    int d = 0;
    for (const auto& s : family) d = std::max(d, static_cast<int>(s.size()));
    SetOrdering ordering(inst, d, family, closure_radius);
    OrthoBasis basis;
    basis.ball_radius = ball_radius;
    basis.restricted = true;
    for (int i = 0; i < static_cast<int>(ordering.size()); ++i) {
        ClosureOptions opts;
        opts.radius = ball_radius;
        opts.budget_vars = pe.params().table_budget_vars;
        ClosedSet ball = compute_closure(inst, ordering.vars_at(i), opts).set;
        std::vector<SetMask> vi;
        for (int j = 0; j < i; ++j) {
            SetMask m = ordering.set_at(j);
            if (vs_subset(ordering.vars_at(j), ball.vars)) vi.push_back(m);
        }
        OrthoElement el;
        el.set = ordering.vars_at(i);
        el.coeffs[ordering.set_at(i)] = 1;
        if (!vi.empty()) {
            const std::size_t n = vi.size();
            std::vector<std::vector<Rat>> g(n, std::vector<Rat>(n));
            std::vector<Rat> b(n);
            for (std::size_t r = 0; r < n; ++r) {
                b[r] = pe.char_moment(vi[r] ^ ordering.set_at(i));
                for (std::size_t c = r; c < n; ++c) {
                    Rat v = pe.char_moment(vi[r] ^ vi[c]);
                    g[r][c] = v;
                    g[c][r] = v;
                }
            }
            auto sol = solve_psd_system(g, b);
            if (!sol.consistent)
                throw verification_error("restricted normal equations inconsistent at " +
                                         vs_to_string(el.set));
            el.kernel_dim = sol.kernel_dim;
            for (std::size_t r = 0; r < n; ++r)
                if (sol.solution[r] != 0) el.coeffs[vi[r]] -= sol.solution[r];
        }
        Polynomial p(el.coeffs.begin(), el.coeffs.end());
        el.norm2 = pe(poly_mul(p, p));
        basis.elems.push_back(std::move(el));
    }
    return basis;
}

/// E~[chi~_i * chi_B] = 0 for every basis set B of V_i.
inline CheckResult verify_local_orthogonality(const PseudoExpectation& pe,
                                              const SetOrdering& ordering,
                                              const OrthoBasis& basis, int i) {
    auto vi = local_space(pe.instance(), ordering, i, basis.ball_radius,
                          pe.params().table_budget_vars);
    const auto& el = basis.elems.at(i);
    for (SetMask b : vi) {
        Rat acc = 0;
        for (const auto& [m, c] : el.coeffs) acc += c * pe.char_moment(m ^ b);
        if (acc != 0)
            return {CheckStatus::fail, "E~[chi~_" + std::to_string(i) + " * chi_" +
                                           vs_to_string(vs_from_mask(b)) +
                                           "] = " + rat_to_string(acc)};
    }
    return {};
}

/// The change of basis is unit-triangular: the coefficient of chi_{A_i} in
/// chi~_i is 1 and every other support set strictly precedes A_i.
inline CheckResult verify_span(const SetOrdering& ordering, const OrthoBasis& basis, int i) {
    const auto& el = basis.elems.at(i);
    const SetMask ai = ordering.set_at(i);
    auto it = el.coeffs.find(ai);
    if (it == el.coeffs.end() || it->second != 1)
        return {CheckStatus::fail,
                "diagonal coefficient of chi~_" + std::to_string(i) + " is not 1"};
    for (const auto& [m, c] : el.coeffs) {
        if (m == ai || c == 0) continue;
        if (!ordering.precedes(m, ai))
            return {CheckStatus::fail, "chi~_" + std::to_string(i) + " uses chi_" +
                                           vs_to_string(vs_from_mask(m)) +
                                           " which does not precede A_i"};
    }
    return {};
}

// --- boundary decomposition --------------------------------------------------

/// The B_in / B_out / B_bdy / B_rest split of B against the ball around A.
struct BoundaryDecomp {
    VarSet b_in, b_out, b_bdy, b_rest;
    bool claim_size_ok = true;      // |B_bdy u B_in| <= |B|
    bool claim_ordering_ok = true;  // B_out nonempty => subsets precede A
    std::string note;
};

inline BoundaryDecomp decompose_boundary(const Instance& inst, const SetOrdering& ordering,
                                         const VarSet& A, const VarSet& B, int ball_radius,
                                         int closure_radius = 3) {
    BoundaryDecomp bd;
    VarSet a = vs_sorted(A), b = vs_sorted(B);
    ClosureOptions ball_opts;
    ball_opts.radius = ball_radius;
    ball_opts.budget_vars = inst.n();
    ClosedSet ballA = compute_closure(inst, a, ball_opts).set;
    ClosedSet clB = closure_of(inst, b, closure_radius);

    for (int x : clB.vars) {
        for (int ci : clB.clauses) {
            auto w = vs_intersect(inst.clause(ci).vars, ballA.vars);
            if (w == VarSet{x}) {
                bd.b_bdy.push_back(x);
                break;
            }
        }
    }
    bd.b_bdy = vs_sorted(bd.b_bdy);
    bd.b_out = vs_diff(b, ballA.vars);
    bd.b_in = vs_diff(vs_diff(b, bd.b_out), bd.b_bdy);
    bd.b_rest = vs_diff(vs_diff(b, bd.b_out), bd.b_in);

    VarSet bdy_in = vs_union(bd.b_bdy, bd.b_in);
    if (bdy_in.size() > b.size()) {
        bd.claim_size_ok = false;
        bd.note = "|B_bdy u B_in| = " + std::to_string(bdy_in.size()) + " exceeds |B| = " +
                  std::to_string(b.size());
    }
    if (!bd.b_out.empty() && static_cast<int>(bdy_in.size()) <= ordering.degree()) {
        SetMask am = vs_to_mask(a);
        for (const auto& s : subsets_up_to(bdy_in, ordering.degree())) {
            SetMask sm = vs_to_mask(s);
            if (sm == am) {
                bd.claim_ordering_ok = false;
            } else if (ordering.rank_of(sm) && ordering.rank_of(am) &&
                       !ordering.precedes(sm, am)) {
                bd.claim_ordering_ok = false;
            }
            if (!bd.claim_ordering_ok) {
                bd.note += (bd.note.empty() ? "" : "; ") + ("subset " + vs_to_string(s) +
                           " of B_in u B_bdy does not precede A");
                break;
            }
        }
    }
    return bd;
}

/// E~[chi~_i * chi_j] = 0 for every j < i; on failure the witness pair plus
/// its boundary decomposition diagnostics.
struct GlobalOrthogonality {
    CheckResult result;
    std::optional<std::pair<int, int>> witness;
    std::optional<BoundaryDecomp> diagnostics;
};

inline GlobalOrthogonality verify_global_orthogonality(const PseudoExpectation& pe,
                                                       const SetOrdering& ordering,
                                                       const OrthoBasis& basis) {
    GlobalOrthogonality res;
    for (int i = 0; i < static_cast<int>(basis.elems.size()); ++i) {
        const auto& el = basis.elems[i];
        for (int j = 0; j < i; ++j) {
            const SetMask aj = ordering.set_at(j);
            Rat acc = 0;
            for (const auto& [m, c] : el.coeffs) acc += c * pe.char_moment(m ^ aj);
            if (acc != 0) {
                res.result = {CheckStatus::fail,
                              "E~[chi~_" + std::to_string(i) + " * chi_" + std::to_string(j) +
                                  "] = " + rat_to_string(acc)};
                res.witness = {i, j};
                res.diagnostics = decompose_boundary(pe.instance(), ordering,
                                                     ordering.vars_at(i), ordering.vars_at(j),
                                                     basis.ball_radius);
                return res;
            }
        }
    }
    return res;
}

/// Full pairwise orthogonality E~[chi~_i * chi~_j] = 0, checked directly.
inline CheckResult verify_pairwise_orthogonality(const PseudoExpectation& pe,
                                                 const OrthoBasis& basis) {
    const auto& els = basis.elems;
    for (std::size_t i = 0; i < els.size(); ++i)
        for (std::size_t j = i + 1; j < els.size(); ++j) {
            Rat acc = 0;
            for (const auto& [m1, c1] : els[i].coeffs)
                for (const auto& [m2, c2] : els[j].coeffs)
                    acc += c1 * c2 * pe.char_moment(m1 ^ m2);
            if (acc != 0)
                return {CheckStatus::fail, "E~[chi~_" + std::to_string(i) + " * chi~_" +
                                               std::to_string(j) +
                                               "] = " + rat_to_string(acc)};
        }
    return {};
}

/// Connected component with pairwise-distant marked vertices must be large:
/// |edges| >= |U| * R / 2.
inline CheckResult check_long_dist_edges(const Instance& inst,
                                         const std::vector<int>& component_clauses,
                                         const VarSet& U, int R) {
    auto comp = vs_sorted(component_clauses);
    if (U.size() < 2) return {CheckStatus::precondition, "|U| must be at least 2"};
    // connectivity of the clause collection
    if (comp.empty()) return {CheckStatus::precondition, "empty component"};
    std::vector<char> seen(comp.size(), 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        auto x = stack.back();
        stack.pop_back();
        for (std::size_t j = 0; j < comp.size(); ++j)
            if (!seen[j] && inst.clauses_intersect(comp[x], comp[j])) {
                seen[j] = 1;
                ++reached;
                stack.push_back(j);
            }
    }
    if (reached != comp.size())
        return {CheckStatus::precondition, "clause collection is not connected"};
    // pairwise distances within the sub-hypergraph must exceed R
    auto dist_in = [&](int u, int v) {
        std::map<int, int> dist;
        dist[u] = 0;
        std::vector<int> frontier{u};
        while (!frontier.empty()) {
            std::vector<int> next;
            for (int x : frontier)
                for (int ci : comp)
                    if (vs_contains(inst.clause(ci).vars, x))
                        for (int y : inst.clause(ci).vars)
                            if (!dist.count(y)) {
                                dist[y] = dist[x] + 1;
                                next.push_back(y);
                            }
            frontier = std::move(next);
        }
        return dist.count(v) ? dist[v] : -1;
    };
    VarSet u = vs_sorted(U);
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = i + 1; j < u.size(); ++j) {
            int dij = dist_in(u[i], u[j]);
            if (dij >= 0 && dij <= R)
                return {CheckStatus::precondition,
                        "distance between " + std::to_string(u[i]) + " and " +
                            std::to_string(u[j]) + " is " + std::to_string(dij) +
                            " <= R = " + std::to_string(R)};
        }
    if (2 * static_cast<long>(comp.size()) < static_cast<long>(u.size()) * R)
        return {CheckStatus::fail, std::to_string(comp.size()) + " edges < |U|R/2 = " +
                                       std::to_string(u.size() * R / 2.0)};
    return {};
}

// --- JSON -------------------------------------------------------------------

inline std::string mask_key(SetMask m) {
    VarSet v = vs_from_mask(m);
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

/// Basis file format: a JSON array, one entry per chi~ in ordering sequence.
inline json ortho_basis_to_json(const OrthoBasis& basis) {
    json arr = json::array();
    for (const auto& el : basis.elems) {
        json e;
        e["set"] = el.set;
        e["coeffs"] = json::object();
        for (const auto& [m, c] : el.coeffs) e["coeffs"][mask_key(m)] = rat_to_string(c);
        e["norm2"] = rat_to_string(el.norm2);
        if (el.kernel_dim > 0) e["kernel_dim"] = el.kernel_dim;
        arr.push_back(e);
    }
    return arr;
}

}  // namespace pexp
