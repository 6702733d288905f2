#pragma once

#include <cmath>
#include <random>

#include "pexp/cycles.hpp"
#include "pexp/rational.hpp"

namespace pexp {

struct ExpansionResult {
    CheckStatus status = CheckStatus::pass;
    std::vector<int> witness;     // violating clause collection on fail
    Rat measured_beta = Rat(-1);  // max over checked collections of k-1-|V|/|C|
    std::uint64_t checked = 0;    // collections examined exhaustively
    std::uint64_t sampled = 0;    // collections examined by sampling
    bool exhausted = true;        // false once the enumeration budget was hit
};

namespace detail {

// ESU-style enumeration of connected vertex sets of the clause-intersection
// graph, each set produced exactly once (its minimal element acts as seed).
// Coverage is additive across vertex-disjoint components, so connected
// collections certify the expansion property for all collections.
template <typename Visit>
class ConnectedEnumerator {
public:
    ConnectedEnumerator(const std::vector<std::vector<int>>& adj, int max_size,
                        std::uint64_t budget, Visit& visit)
        : adj_(adj), max_size_(max_size), budget_(budget), visit_(visit),
          in_sub_(adj.size(), 0), nbr_(adj.size(), 0) {}

    // Returns false if the visitor aborted; sets exhausted=false on budget.
    bool run() {
        const int m = static_cast<int>(adj_.size());
        for (int seed = 0; seed < m; ++seed) {
            sub_.assign(1, seed);
            in_sub_[seed] = 1;
            std::vector<int> ext, marked;
            for (int u : adj_[seed])
                if (u > seed) {
                    ext.push_back(u);
                    nbr_[u] = 1;
                    marked.push_back(u);
                }
            bool ok = extend(seed, ext);
            in_sub_[seed] = 0;
            for (int u : marked) nbr_[u] = 0;
            if (!ok) return false;
            if (!exhausted) return true;
        }
        return true;
    }

    std::uint64_t count = 0;
    bool exhausted = true;

private:
    bool extend(int seed, std::vector<int> ext) {
        if (++count > budget_) {
            exhausted = false;
            return true;
        }
        if (!visit_(sub_)) return false;
        if (static_cast<int>(sub_.size()) >= max_size_) return true;
        while (!ext.empty()) {
            int w = ext.back();
            ext.pop_back();
            std::vector<int> child = ext;
            std::vector<int> marked;
            for (int u : adj_[w])
                if (u > seed && !in_sub_[u] && !nbr_[u]) {
                    child.push_back(u);
                    nbr_[u] = 1;
                    marked.push_back(u);
                }
            sub_.push_back(w);
            in_sub_[w] = 1;
            bool ok = extend(seed, std::move(child));
            in_sub_[w] = 0;
            sub_.pop_back();
            for (int u : marked) nbr_[u] = 0;
            if (!ok) return false;
            if (!exhausted) return true;
        }
        return true;
    }

    const std::vector<std::vector<int>>& adj_;
    int max_size_;
    std::uint64_t budget_;
    Visit& visit_;
    std::vector<char> in_sub_, nbr_;
    std::vector<int> sub_;
};

}  // namespace detail

/// Verifies (r, beta)-expansion: every collection of at most r hyperedges
/// covers at least (k-1-beta)*|collection| vertices. Exhaustive over connected
/// collections up to `budget`, then randomized sampling with partial status;
/// never a silent pass.
inline ExpansionResult check_expansion(const Instance& inst, int r, const Rat& beta,
                                       std::uint64_t budget = 1000000,
                                       std::uint64_t samples = 20000,
                                       std::uint64_t seed = 1) {
    if (r < 1) throw input_error("check_expansion requires r >= 1");
    ExpansionResult res;
    const Rat need_slope = Rat(inst.k() - 1) - beta;

    std::vector<std::vector<int>> adj(inst.m());
    for (int a = 0; a < inst.m(); ++a)
        for (int v : inst.clause(a).vars)
            for (int b : inst.clauses_of(v))
                if (b != a) adj[a].push_back(b);
    for (auto& lst : adj) {
        std::sort(lst.begin(), lst.end());
        lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
    }

    auto examine = [&](const std::vector<int>& coll) -> bool {
        VarSet vs;
        for (int c : coll) vs = vs_union(vs, inst.clause(c).vars);
        const int cov = static_cast<int>(vs.size());
        const int cnt = static_cast<int>(coll.size());
        Rat b = Rat(inst.k() - 1) - Rat(cov) / Rat(cnt);
        if (b > res.measured_beta) res.measured_beta = b;
        if (Rat(cov) < need_slope * Rat(cnt)) {
            res.status = CheckStatus::fail;
            res.witness = coll;
            std::sort(res.witness.begin(), res.witness.end());
            return false;
        }
        return true;
    };

    detail::ConnectedEnumerator<decltype(examine)> en(adj, std::min(r, inst.m()), budget,
                                                      examine);
    en.run();
    res.checked = en.count;
    res.exhausted = en.exhausted;
    if (res.status == CheckStatus::fail) return res;

    if (!res.exhausted) {
        std::mt19937_64 rng(seed);
        for (std::uint64_t s = 0; s < samples; ++s) {
            std::vector<int> coll{static_cast<int>(rng() % inst.m())};
            std::vector<char> in(inst.m(), 0);
            in[coll[0]] = 1;
            int target = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(r));
            while (static_cast<int>(coll.size()) < target) {
                std::vector<int> frontier;
                for (int c : coll)
                    for (int u : adj[c])
                        if (!in[u]) frontier.push_back(u);
                if (frontier.empty()) break;
                int pick = frontier[rng() % frontier.size()];
                in[pick] = 1;
                coll.push_back(pick);
            }
            ++res.sampled;
            if (!examine(coll)) return res;
        }
        res.status = CheckStatus::partial;
    }
    return res;
}

/// Niceness parameters. eta, tau, and the girth bound follow the random
/// construction's formulas and are recorded in reports even when a
/// desk-scale override is in force.
struct NiceParams {
    double epsilon = 0.1;         // soundness slack
    Rat delta = Rat(1, 200);      // expansion slack
    Rat gamma = Rat(2);           // clause density
    double eta = 0;               // (1/gamma^2)^(2/delta)
    double tau = 0;               // 1/tau = 4*log2(gamma*k^2)
    double girth_bound = 0;       // tau*log2(n)

    static NiceParams make(int n, int k, const Rat& gamma, double epsilon = 0.1,
                           Rat delta = Rat(1, 200)) {
        NiceParams p;
        p.epsilon = epsilon;
        p.delta = delta;
        p.gamma = gamma;
        const double g = rat_to_double(gamma);
        const double d = rat_to_double(delta);
        if (g <= 0 || d <= 0) throw input_error("nice params require gamma, delta > 0");
        p.eta = std::pow(1.0 / (g * g), 2.0 / d);
        const double denom = 4.0 * std::log2(g * static_cast<double>(k) * k);
        if (denom <= 0) throw input_error("nice params require gamma*k^2 > 1");
        p.tau = 1.0 / denom;
        p.girth_bound = p.tau * std::log2(static_cast<double>(n));
        return p;
    }
};

struct NicenessReport {
    NiceParams params;
    std::optional<int> girth_value;  // nullopt = infinite (forest)
    double girth_bound_used = 0;
    bool girth_pass = false;
    std::optional<Cycle> girth_witness;
    int expansion_radius = 0;  // floor(eta*n), possibly 0 (vacuous)
    ExpansionResult expansion;
    bool pass = false;
    std::string note;
};

/// Aggregates the girth and expansion checks into one structured report.
/// girth_override, when set, replaces the formula bound (which is recorded
/// either way). Clause pairs sharing two vertices count as 2-cycles.
inline NicenessReport check_nice(const Instance& inst, const NiceParams& params,
                                 std::optional<double> girth_override = std::nullopt,
                                 std::uint64_t budget = 1000000, std::uint64_t seed = 1) {
    NicenessReport rep;
    rep.params = params;
    auto gr = girth(inst);
    rep.girth_value = gr.girth;
    rep.girth_bound_used = girth_override.value_or(params.girth_bound);
    rep.girth_pass = !gr.girth || static_cast<double>(*gr.girth) >= rep.girth_bound_used;
    if (!rep.girth_pass) rep.girth_witness = gr.witness;

    // floor(eta*n), clamped into [0, m]: eta explodes for gamma < 1 and the
    // radius can never usefully exceed the clause count
    double raw_radius = params.eta * inst.n();
    if (!(raw_radius >= 0)) raw_radius = 0;
    rep.expansion_radius =
        raw_radius > inst.m() ? inst.m() : static_cast<int>(std::floor(raw_radius));
    if (rep.expansion_radius < 1) {
        rep.expansion.status = CheckStatus::pass;
        rep.note = "expansion radius floor(eta*n) < 1: expansion check is vacuous at this scale";
    } else {
        rep.expansion =
            check_expansion(inst, rep.expansion_radius, params.delta, budget, 20000, seed);
    }
    rep.pass = rep.girth_pass && rep.expansion.status != CheckStatus::fail;
    return rep;
}

}  // namespace pexp
