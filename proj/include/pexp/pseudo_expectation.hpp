#pragma once

#include <map>
#include <mutex>
#include <unordered_map>

#include "pexp/local_dist.hpp"
#include "pexp/psd.hpp"

namespace pexp {

/// Multilinear polynomial in the x_j^2 = 1 quotient: character index sets
/// (as masks) mapped to rational coefficients.
using Polynomial = std::map<SetMask, Rat>;

inline Polynomial poly_mul(const Polynomial& p, const Polynomial& q) {
    Polynomial out;
    for (const auto& [s, a] : p)
        for (const auto& [t, b] : q) {
            Rat c = a * b;
            if (c != 0) out[s ^ t] += c;
        }
    for (auto it = out.begin(); it != out.end();)
        it = it->second == 0 ? out.erase(it) : std::next(it);
    return out;
}

struct PeParams {
    int degree_cap = 10;       // s: maximal |S| admitted by the operator
    int closure_radius = 3;
    int table_budget_vars = kDefaultTableBudgetVars;
};

/// Degree-bound presets recorded alongside reports: the asymptotic formulas
/// are vacuous at desk scale but are what the construction prescribes.
struct DegreePresets {
    double d_girth = 0;  // sqrt(girth)/(100 k)
    double d_eta = 0;    // eta*n/(10000 k)
    double s_eta = 0;    // eta*n/6
};

inline DegreePresets degree_presets(int n, int k, std::optional<int> girth_value, double eta) {
    DegreePresets p;
    p.d_girth = girth_value ? std::sqrt(static_cast<double>(*girth_value)) / (100.0 * k)
                            : std::numeric_limits<double>::infinity();
    p.d_eta = eta * n / (10000.0 * k);
    p.s_eta = eta * n / 6.0;
    return p;
}

/// The operator E~ on characters: E~[chi_S] is the expectation of chi_S under
/// the marginal of nu on cl(S). Memoized; exact. Thread-safe for concurrent
/// readers (single lock around the memo).
class PseudoExpectation {
public:
    PseudoExpectation(const Instance& inst, PairwiseDist mu, PeParams params = {})
        : inst_(&inst), mu_(std::move(mu)), params_(params) {
        if (inst.n() > 64)
            throw budget_error("pseudo-expectation memo requires n <= 64 at desk scale");
        if (mu_.k != inst.k()) throw input_error("mu arity differs from instance k");
    }

    const Instance& instance() const { return *inst_; }
    const PairwiseDist& mu() const { return mu_; }
    const PeParams& params() const { return params_; }

    /// E~[chi_S], exact and memoized.
    Rat char_moment(SetMask s) const {
        if (std::popcount(s) > params_.degree_cap)
            throw budget_error("character degree " + std::to_string(std::popcount(s)) +
                               " exceeds the cap s = " + std::to_string(params_.degree_cap));
        {
            std::lock_guard<std::mutex> lock(lock_);
            auto it = memo_.find(s);
            if (it != memo_.end()) return it->second;
        }
        Rat val = compute(s);
        std::lock_guard<std::mutex> lock(lock_);
        memo_.emplace(s, val);
        return val;
    }

    Rat char_moment(const VarSet& S) const { return char_moment(vs_to_mask(S)); }

    /// Linear extension to polynomials.
    Rat operator()(const Polynomial& p) const {
        Rat acc = 0;
        for (const auto& [s, c] : p)
            if (c != 0) acc += c * char_moment(s);
        return acc;
    }

    std::size_t memo_size() const {
        std::lock_guard<std::mutex> lock(lock_);
        return memo_.size();
    }

private:
    Rat compute(SetMask s) const {
        if (s == 0) return 1;
        VarSet S = vs_from_mask(s);
        ClosureOptions opts;
        opts.radius = params_.closure_radius;
        opts.budget_vars = params_.table_budget_vars;
        ClosedSet cl = compute_closure(*inst_, S, opts).set;
        auto nu = nu_closed(*inst_, mu_, cl, params_.table_budget_vars);
        auto pos = detail::positions_in(cl.vars, S);
        std::uint64_t pmask = 0;
        for (int p : pos) pmask |= std::uint64_t{1} << p;
        Rat acc = 0;
        for (std::uint64_t x = 0; x < nu.table.size(); ++x) {
            if (nu.table[x] == 0) continue;
            if (std::popcount(x & pmask) % 2)
                acc -= nu.table[x];
            else
                acc += nu.table[x];
        }
        return acc;
    }

    const Instance* inst_;
    PairwiseDist mu_;
    PeParams params_;
    mutable std::mutex lock_;
    mutable std::unordered_map<SetMask, Rat> memo_;
};

/// Completeness at one clause: for every y in {+-1}^k the indicator of
/// C(x) = y has E~[1_{C(x)=y}] = mu(y), exactly. Checking all indicators
/// covers every f by linearity.
inline CheckResult check_completeness(const PseudoExpectation& pe, const Clause& clause) {
    const Instance& inst = pe.instance();
    const int k = inst.k();
    for (std::uint32_t y = 0; y < (std::uint32_t{1} << k); ++y) {
        // 1_{C(x)=y} = 2^-k sum_{T subseteq [k]} prod_{j in T} y_j sigma_j chi_{S_T}
        Rat acc = 0;
        for (std::uint32_t T = 0; T < (std::uint32_t{1} << k); ++T) {
            int sign = 1;
            SetMask s = 0;
            for (int j = 0; j < k; ++j) {
                if (!((T >> j) & 1)) continue;
                if ((y >> j) & 1) sign = -sign;
                if (clause.signs[j] == -1) sign = -sign;
                s |= SetMask{1} << (clause.vars[j] - 1);
            }
            Rat term = pe.char_moment(s);
            acc += sign == 1 ? term : -term;
        }
        acc *= rat_pow2(-k);
        const Rat& want = pe.mu().probs[y];
        if (acc != want)
            return {CheckStatus::fail, "clause indicator y=" + mask_to_signs(y, k) +
                                           ": E~ gives " + rat_to_string(acc) +
                                           ", mu gives " + rat_to_string(want)};
    }
    return {};
}

// --- moment matrices ---------------------------------------------------------

struct MomentMatrix {
    std::vector<VarSet> index;  // sets of size <= d, sorted by (size, lex)
    std::vector<std::vector<Rat>> entries;  // entries[i][j] = E~[chi_{Si xor Sj}]
};

/// All subsets of the universe of size <= d, sorted by (size, lexicographic).
inline std::vector<VarSet> moment_index_sets(const VarSet& universe, int d) {
    return subsets_up_to(universe, d);
}

/// Degree-d moment matrix M[S,T] = E~[chi_{S symdiff T}] over the given
/// variable universe (default: all variables).
inline MomentMatrix build_moment_matrix(const PseudoExpectation& pe, int d,
                                        std::optional<VarSet> universe = std::nullopt,
                                        std::size_t max_rows = 4096) {
    if (2 * d > pe.params().degree_cap)
        throw input_error("moment matrix of degree " + std::to_string(d) +
                          " needs degree cap >= " + std::to_string(2 * d));
    VarSet u;
    if (universe) {
        u = vs_sorted(*universe);
    } else {
        for (int v = 1; v <= pe.instance().n(); ++v) u.push_back(v);
    }
    MomentMatrix mm;
    mm.index = moment_index_sets(u, d);
    if (mm.index.size() > max_rows)
        throw budget_error("moment matrix would have " + std::to_string(mm.index.size()) +
                           " rows, budget " + std::to_string(max_rows));
    std::vector<SetMask> masks;
    masks.reserve(mm.index.size());
    for (const auto& s : mm.index) masks.push_back(vs_to_mask(s));
    const std::size_t n = masks.size();
    mm.entries.assign(n, std::vector<Rat>(n, Rat(0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            Rat v = pe.char_moment(masks[i] ^ masks[j]);
            mm.entries[i][j] = v;
            mm.entries[j][i] = v;
        }
    return mm;
}

struct LocalPsdReport {
    PsdCertificate gram;
    int square_trials = 0;
    std::vector<std::string> violations;
    bool pass() const { return gram.psd && violations.empty(); }
};

/// Local PSD: the Gram matrix of all characters on T under E~ must be PSD,
/// and E~[f^2] >= 0 for random rational f supported on subsets of T.
inline LocalPsdReport check_local_psd(const PseudoExpectation& pe, const VarSet& T,
                                      int trials, std::uint64_t seed) {
    VarSet t = vs_sorted(T);
    if (static_cast<int>(t.size()) > pe.params().degree_cap)
        throw budget_error("check_local_psd: |T| exceeds the degree cap");
    auto sets = moment_index_sets(t, static_cast<int>(t.size()));
    std::vector<SetMask> masks;
    for (const auto& s : sets) masks.push_back(vs_to_mask(s));
    const std::size_t n = masks.size();
    std::vector<std::vector<Rat>> g(n, std::vector<Rat>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            Rat v = pe.char_moment(masks[i] ^ masks[j]);
            g[i][j] = v;
            g[j][i] = v;
        }
    LocalPsdReport rep;
    rep.gram = check_psd_exact(g);
    std::mt19937_64 rng(seed);
    for (int tr = 0; tr < trials; ++tr) {
        ++rep.square_trials;
        Polynomial f;
        for (const auto& m : masks) {
            int num = static_cast<int>(rng() % 9) - 4;
            if (num != 0) f[m] = Rat(num) / Rat(1 + static_cast<int>(rng() % 4));
        }
        Rat sq = pe(poly_mul(f, f));
        if (sq < 0)
            rep.violations.push_back("E~[f^2] = " + rat_to_string(sq) + " < 0 at trial " +
                                     std::to_string(tr));
    }
    return rep;
}

// --- JSON -------------------------------------------------------------------

inline json moment_matrix_to_json(const MomentMatrix& mm) {
    json j;
    j["index"] = json::array();
    for (const auto& s : mm.index) j["index"].push_back(s);
    j["entries"] = json::array();
    for (const auto& row : mm.entries) {
        json r = json::array();
        for (const auto& v : row) r.push_back(rat_to_string(v));
        j["entries"].push_back(r);
    }
    return j;
}

inline json psd_certificate_to_json(const PsdCertificate& c) {
    json j;
    j["psd"] = c.psd;
    if (c.psd) {
        j["pivots"] = json::array();
        for (const auto& p : c.pivots) j["pivots"].push_back(rat_to_string(p));
        j["pivot_order"] = c.pivot_order;
    } else {
        j["witness"] = json::array();
        for (const auto& w : c.witness) j["witness"].push_back(rat_to_string(w));
        j["witness_value"] = rat_to_string(c.witness_value);
    }
    return j;
}

}  // namespace pexp
