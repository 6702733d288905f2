// pexp: build and verify the exact objects behind pairwise-independence SOS
// lower bounds at desk scale. Subcommands: gen, check-nice, closure, verify,
// moments, orthogonalize, soundness. Machine-readable JSON goes to files or
// stdout; human summaries go to stderr. Exit codes: 0 pass, 1 verification
// failure, 2 input/config error.

#include <CLI11.hpp>

#include <cctype>
#include <cmath>
#include <iostream>

#include "pexp/pexp.hpp"

using namespace pexp;

namespace {

int g_exit = 0;  // sticky verification-failure flag

json report_head(const std::string& command, json config,
                 const std::map<std::string, std::string>& hashes) {
    json j;
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = std::move(config);
    j["input_hashes"] = json::object();
    for (const auto& [path, h] : hashes) j["input_hashes"][path] = h;
    return j;
}

Instance load_inst(const std::string& path, std::map<std::string, std::string>& hashes) {
    std::string bytes = read_file(path);
    hashes[path] = fnv1a64_hex(bytes);
    return load_instance(bytes);
}

PairwiseDist resolve_mu(const std::string& spec, int k,
                        std::map<std::string, std::string>& hashes) {
    if (spec == "uniform") return uniform_distribution(k);
    if (spec == "parity+") return parity_distribution(k, 1);
    if (spec == "parity-") return parity_distribution(k, -1);
    if (spec.rfind("file:", 0) == 0) {
        std::string path = spec.substr(5);
        std::string bytes = read_file(path);
        hashes[path] = fnv1a64_hex(bytes);
        auto d = dist_from_json(json::parse(bytes));
        if (d.k != k)
            throw input_error("distribution arity " + std::to_string(d.k) +
                              " does not match instance k = " + std::to_string(k));
        return d;
    }
    throw input_error("unknown mu spec '" + spec +
                      "' (use uniform, parity+, parity-, or file:PATH)");
}

VarSet parse_var_list(const std::string& csv) {
    VarSet out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoi(tok));
    }
    return vs_sorted(out);
}

void emit(const std::optional<std::string>& path, const json& j) {
    std::string bytes = j.dump(2) + "\n";
    if (path)
        write_file(*path, bytes);
    else
        std::cout << bytes;
}

std::string mask_to_bitstring(std::uint64_t mask, int n) {
    std::string s(n, '0');
    for (int i = 0; i < n; ++i)
        if ((mask >> i) & 1) s[i] = '1';
    return s;
}

// --- gen ---------------------------------------------------------------------

struct GenArgs {
    int n = 60, k = 3;
    std::string gamma = "2", delta = "1/200";
    double epsilon = 0.1;
    std::uint64_t seed = 1;
    double girth_bound = -1;  // <0: use the tau*log2(n) formula
    bool forest = false;
    std::string out;
    std::string report;
};

void run_gen(const GenArgs& a) {
    Rat gamma = rat_from_string(a.gamma);
    Rat delta = rat_from_string(a.delta);
    auto params = NiceParams::make(a.n, a.k, gamma, a.epsilon, delta);
    Instance raw = generate_random(a.n, a.k, gamma, a.seed);

    double bound = a.girth_bound >= 0 ? a.girth_bound : params.girth_bound;
    int prune_bound = a.forest || bound > raw.m() ? raw.m()
                                                  : static_cast<int>(std::floor(bound));
    auto pruned = prune_cycles(raw, prune_bound);
    auto nice = check_nice(pruned.instance, params,
                           a.forest ? std::optional<double>{} : std::optional<double>{bound});

    json config{{"n", a.n},         {"k", a.k},
                {"gamma", a.gamma}, {"delta", a.delta},
                {"epsilon", a.epsilon}, {"seed", a.seed},
                {"girth_bound", a.forest ? json("forest") : json(bound)},
                {"out", a.out}};
    json rep = report_head("gen", config, {});
    rep["generated_m"] = raw.m();
    rep["removed_clauses"] = pruned.removed;
    rep["final_m"] = pruned.instance.m();
    rep["niceness"] = niceness_to_json(nice);

    write_file(a.out, serialize_instance(pruned.instance));
    if (!a.report.empty()) write_file(a.report, rep.dump(2) + "\n");
    std::cerr << "gen: m=" << raw.m() << " -> " << pruned.instance.m() << " after pruning, girth "
              << (nice.girth_value ? std::to_string(*nice.girth_value) : "infinity")
              << ", niceness " << (nice.pass ? "pass" : "FAIL") << "\n";
    if (!nice.pass) g_exit = std::max(g_exit, 1);
}

// --- check-nice ----------------------------------------------------------------

struct NiceArgs {
    std::string instance;
    std::string gamma = "";  // default: measured m/n
    std::string delta = "1/200";
    double epsilon = 0.1;
    double girth_bound = -1;
    std::uint64_t budget = 1000000, seed = 1;
    std::string report;
};

void run_check_nice(const NiceArgs& a) {
    std::map<std::string, std::string> hashes;
    Instance inst = load_inst(a.instance, hashes);
    Rat gamma = a.gamma.empty() ? Rat(inst.m()) / Rat(inst.n()) : rat_from_string(a.gamma);
    auto params = NiceParams::make(inst.n(), inst.k(), gamma, a.epsilon,
                                   rat_from_string(a.delta));
    std::optional<double> over;
    if (a.girth_bound >= 0) over = a.girth_bound;
    auto nice = check_nice(inst, params, over, a.budget, a.seed);

    json config{{"instance", a.instance}, {"gamma", rat_to_string(gamma)},
                {"delta", a.delta},       {"epsilon", a.epsilon},
                {"girth_bound", a.girth_bound}, {"budget", a.budget},
                {"seed", a.seed}};
    json rep = report_head("check-nice", config, hashes);
    rep["niceness"] = niceness_to_json(nice);
    emit(a.report.empty() ? std::optional<std::string>{} : a.report, rep);
    std::cerr << "check-nice: " << (nice.pass ? "pass" : "FAIL") << "\n";
    if (!nice.pass) g_exit = std::max(g_exit, 1);
}

// --- closure -------------------------------------------------------------------

struct ClosureArgs {
    std::string instance;
    std::string set;
    int radius = 3;
    std::string report;
};

void run_closure(const ClosureArgs& a) {
    std::map<std::string, std::string> hashes;
    Instance inst = load_inst(a.instance, hashes);
    VarSet s = parse_var_list(a.set);
    ClosureOptions opts;
    opts.radius = a.radius;
    opts.girth = girth(inst).girth;
    auto res = compute_closure(inst, s, opts);

    json config{{"instance", a.instance}, {"set", s}, {"radius", a.radius}};
    json rep = report_head("closure", config, hashes);
    rep["closed_set"] = closed_set_to_json(res.set);
    rep["rounds"] = res.trace.size();
    if (res.hypothesis_warning) rep["warning"] = res.note;
    emit(a.report.empty() ? std::optional<std::string>{} : a.report, rep);
    std::cerr << "closure: |cl| = " << res.set.vars.size() << ", "
              << res.set.clauses.size() << " clauses\n";
}

// --- verify ----------------------------------------------------------------------

struct VerifyArgs {
    std::string instance;
    std::string mu = "parity+";
    std::string suites = "all";
    int d = 2;
    int s = -1;  // auto: 2d + k
    int radius = 3;
    int ball = -1;  // auto: min(100, (girth-1)/2)
    int trials = 200;
    std::uint64_t seed = 1;
    int budget_vars = kDefaultTableBudgetVars;
    std::size_t max_sets = 20000;
    double epsilon = -1;
    std::uint64_t soundness_budget = 20000;
    int workers = 1;
    std::string arithmetic = "both";  // exact | float | both
    double tolerance = 1e-9;
    std::string report;
};

const std::map<std::string, std::string> kSuiteLemma{
    {"mu", "pairwise-independence"},
    {"closure", "closure-props, closure-size"},
    {"consistency", "prob-normalization"},
    {"union", "disjoint-closure-indep, local-dist-union"},
    {"completeness", "girth-SA completeness"},
    {"local-psd", "local-PSD"},
    {"moments", "positivity (moment matrix)"},
    {"orthogonality", "orthonormalization, local-projections-exist, equal-spans, crucial"},
    {"soundness", "soundness"}};

json suite_entry(const std::string& name, bool pass, json body = json::object()) {
    body["suite"] = name;
    auto it = kSuiteLemma.find(name);
    if (it != kSuiteLemma.end()) body["lemma"] = it->second;
    body["status"] = pass ? "pass" : "fail";
    return body;
}

void run_verify(const VerifyArgs& a) {
    std::map<std::string, std::string> hashes;
    Instance inst = load_inst(a.instance, hashes);
    PairwiseDist mu = resolve_mu(a.mu, inst.k(), hashes);
    const int s_cap = a.s > 0 ? a.s : 2 * a.d + inst.k();
    auto gr = girth(inst);
    const int ball = a.ball > 0 ? a.ball : ball_radius(inst, gr.girth);

    std::vector<std::string> wanted;
    if (a.suites == "all") {
        wanted = {"mu",        "closure",    "consistency",   "union", "completeness",
                  "local-psd", "moment-psd", "orthogonality", "soundness"};
    } else {
        std::stringstream ss(a.suites);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            for (auto& ch : tok) ch = static_cast<char>(std::tolower(ch));
            if (tok == "psd" || tok == "moments") tok = "moment-psd";
            wanted.push_back(tok);
        }
    }

    PeParams pe_params;
    pe_params.degree_cap = s_cap;
    pe_params.closure_radius = a.radius;
    pe_params.table_budget_vars = a.budget_vars;

    json suites = json::array();
    bool all_pass = true;
    auto add = [&](json e) {
        if (e["status"] != "pass") all_pass = false;
        suites.push_back(std::move(e));
    };
    std::mt19937_64 rng(a.seed);
    auto rand_var = [&]() { return 1 + static_cast<int>(rng() % inst.n()); };

    for (const std::string& name : wanted) {
        try {
            if (name == "mu") {
                auto chk = verify_pairwise_independent(mu);
                json body;
                if (!chk.ok) body["witness"] = chk.failure;
                std::vector<std::uint32_t> support;
                for (std::uint32_t y = 0; y < mu.probs.size(); ++y)
                    if (mu.probs[y] != 0) support.push_back(y);
                body["support_size"] = support.size();
                body["support_contains_affine_plane"] =
                    contains_affine_plane(support, mu.k).found;
                add(suite_entry(name, chk.ok, std::move(body)));
            } else if (name == "closure") {
                auto props = check_closure_properties(inst, a.trials, a.radius, rng());
                SizeBoundOptions so;
                so.radius = a.radius;
                auto sizes = check_size_bound(inst, a.trials, rng(), so);
                json body;
                body["properties"] = property_report_to_json(props);
                body["size_bounds"] = property_report_to_json(sizes);
                add(suite_entry(name, props.pass() && sizes.pass(), std::move(body)));
            } else if (name == "consistency") {
                int done = 0, skipped = 0;
                CheckResult first_fail;
                for (int t = 0; t < a.trials * 20 && done < a.trials; ++t) {
                    VarSet b{rand_var(), rand_var()};
                    if (rng() % 2) b.push_back(rand_var());
                    b = vs_sorted(b);
                    VarSet sub;
                    for (int v : b)
                        if (rng() & 1) sub.push_back(v);
                    if (sub.empty()) sub = {b[0]};
                    try {
                        auto r = check_consistency(inst, mu, sub, b, a.radius, a.budget_vars);
                        if (r.status == CheckStatus::fail) {
                            first_fail = r;
                            break;
                        }
                        ++done;
                    } catch (const budget_error&) {
                        ++skipped;
                    }
                }
                json body{{"trials", done}, {"skipped_budget", skipped}};
                if (first_fail.status == CheckStatus::fail) body["witness"] = first_fail.detail;
                add(suite_entry(name, first_fail.status != CheckStatus::fail && done > 0,
                                std::move(body)));
            } else if (name == "union") {
                int done = 0, skipped = 0;
                std::vector<std::string> claim_findings;
                CheckResult first_fail;
                for (int t = 0; t < a.trials * 40 && done < a.trials; ++t) {
                    try {
                        VarSet sa{rand_var()};
                        if (rng() % 2) sa.push_back(rand_var());
                        auto A = closure_of(inst, vs_sorted(sa), ball);
                        auto B = closure_of(inst, vs_sorted({rand_var(), rand_var()}), a.radius);
                        if (vs_union(A.vars, B.vars).size() >
                            static_cast<std::size_t>(a.budget_vars)) {
                            ++skipped;
                            continue;
                        }
                        auto uf = check_union_factorization(inst, mu, A, B, a.radius,
                                                            a.budget_vars);
                        if (uf.result.status == CheckStatus::precondition) {
                            ++skipped;
                            continue;
                        }
                        // intersection-pattern and containment findings are
                        // reported, not asserted: the table equality is the
                        // lemma, the rest holds only under the full-radius
                        // hypothesis
                        for (const auto& v : uf.bridges.claim_violations)
                            if (claim_findings.size() < 5) claim_findings.push_back(v);
                        if (!uf.containment_finding.empty() && claim_findings.size() < 5)
                            claim_findings.push_back(uf.containment_finding);
                        if (uf.result.status == CheckStatus::fail) {
                            first_fail = uf.result;
                            break;
                        }
                        ++done;
                        // disjoint product, when applicable
                        if (vs_intersect(A.vars, B.vars).empty()) {
                            ClosedSet b3{B.vars, B.clauses, a.radius};
                            auto dp = check_disjoint_product(inst, mu, A, b3, a.radius,
                                                             a.budget_vars);
                            if (dp.status == CheckStatus::fail) {
                                first_fail = dp;
                                break;
                            }
                        }
                    } catch (const budget_error&) {
                        ++skipped;
                    }
                }
                json body{{"trials", done}, {"skipped", skipped}};
                if (!claim_findings.empty()) body["claim_findings"] = claim_findings;
                if (first_fail.status == CheckStatus::fail) body["witness"] = first_fail.detail;
                add(suite_entry(name, first_fail.status != CheckStatus::fail && done > 0,
                                std::move(body)));
            } else if (name == "completeness") {
                PseudoExpectation pe(inst, mu, pe_params);
                json body{{"clauses", inst.m()}};
                bool ok = true;
                for (const auto& c : inst.clauses()) {
                    auto r = check_completeness(pe, c);
                    if (!r.pass()) {
                        ok = false;
                        body["witness"] = r.detail;
                        break;
                    }
                }
                add(suite_entry(name, ok, std::move(body)));
            } else if (name == "local-psd") {
                PseudoExpectation pe(inst, mu, pe_params);
                bool ok = true;
                json body;
                for (const auto& c : inst.clauses()) {
                    auto r = check_local_psd(pe, c.vars, 5, rng());
                    if (!r.pass()) {
                        ok = false;
                        body["witness"] = "clause " + vs_to_string(c.vars);
                        break;
                    }
                }
                for (int t = 0; ok && t < std::min(a.trials, 20); ++t) {
                    VarSet T = vs_sorted({rand_var(), rand_var(), rand_var()});
                    auto r = check_local_psd(pe, T, 5, rng());
                    if (!r.pass()) {
                        ok = false;
                        body["witness"] = "set " + vs_to_string(T);
                    }
                }
                add(suite_entry(name, ok, std::move(body)));
            } else if (name == "moment-psd") {
                PseudoExpectation pe(inst, mu, pe_params);
                VarSet w;
                for (int t = 0; t < 2000; ++t) {
                    auto cl = closure_of(inst, vs_sorted({rand_var(), rand_var()}), a.radius);
                    if (cl.vars.size() >= 4 &&
                        static_cast<int>(cl.vars.size()) <= std::min(12, a.budget_vars)) {
                        w = cl.vars;
                        break;
                    }
                }
                if (w.empty())
                    for (int v = 1; v <= std::min(inst.n(), 8); ++v) w.push_back(v);
                auto mm = build_moment_matrix(pe, std::min(a.d, 2), w);
                json body{{"neighborhood", w}, {"rows", mm.index.size()}};
                bool ok = true;
                std::optional<bool> exact_psd, float_psd;
                if (a.arithmetic != "float") {
                    auto exact = check_psd_exact(mm.entries);
                    body["exact"] = psd_certificate_to_json(exact);
                    exact_psd = exact.psd;
                    ok = ok && exact.psd;
                }
                if (a.arithmetic != "exact") {
                    auto fl = check_psd_float(mm.entries, a.tolerance);
                    body["float_min_eigenvalue"] = fl.min_eigenvalue;
                    float_psd = fl.psd;
                    ok = ok && fl.psd;
                }
                if (exact_psd && float_psd) {
                    body["verdicts_agree"] = *exact_psd == *float_psd;
                    ok = ok && *exact_psd == *float_psd;
                }
                add(suite_entry(name, ok, std::move(body)));
            } else if (name == "orthogonality") {
                PseudoExpectation pe(inst, mu, pe_params);
                auto ordering = build_ordering(inst, a.d, a.radius, a.max_sets);
                auto basis = orthogonalize_all(pe, ordering, ball);
                auto global = verify_global_orthogonality(pe, ordering, basis);
                bool spans = true, locals = true;
                for (int i = 0; i < static_cast<int>(ordering.size()); ++i) {
                    if (!verify_span(ordering, basis, i).pass()) spans = false;
                    if (!verify_local_orthogonality(pe, ordering, basis, i).pass())
                        locals = false;
                }
                json body{{"sets", ordering.size()},
                          {"ball_radius", ball},
                          {"unit_triangular", spans},
                          {"local_orthogonality", locals}};
                if (!global.result.pass()) body["witness"] = global.result.detail;
                add(suite_entry(name, global.result.pass() && spans && locals,
                                std::move(body)));
            } else if (name == "soundness") {
                auto mode = inst.n() <= 20 ? DeviationMode::exhaustive : DeviationMode::sampled;
                auto rep = max_deviation(inst, mode, a.soundness_budget, a.seed, a.workers);
                bool ok = a.epsilon < 0 || rat_to_double(rep.max_distance) <= a.epsilon;
                json body{{"mode", mode == DeviationMode::exhaustive ? "exhaustive" : "sampled"},
                          {"max_distance", rat_to_string(rep.max_distance)},
                          {"argmax_x", mask_to_bitstring(rep.argmax, inst.n())},
                          {"epsilon_target", a.epsilon}};
                add(suite_entry(name, ok, std::move(body)));
            } else {
                throw input_error("unknown suite: " + name);
            }
        } catch (const verification_error& e) {
            add(suite_entry(name, false, json{{"witness", e.what()}}));
        } catch (const budget_error& e) {
            add(suite_entry(name, false, json{{"witness", std::string("budget: ") + e.what()}}));
        } catch (const input_error& e) {
            add(suite_entry(name, false,
                            json{{"witness", std::string("precondition: ") + e.what()}}));
        }
    }

    json config{{"instance", a.instance}, {"mu", a.mu},       {"suites", a.suites},
                {"d", a.d},               {"s", s_cap},       {"radius", a.radius},
                {"ball", ball},           {"trials", a.trials}, {"seed", a.seed},
                {"budget_vars", a.budget_vars}, {"epsilon", a.epsilon},
                {"workers", a.workers},   {"arithmetic", a.arithmetic},
                {"tolerance", a.tolerance}};
    json rep = report_head("verify", config, hashes);
    rep["degree_presets"] = json::object();
    rep["degree_presets"]["d_used"] = a.d;
    rep["degree_presets"]["s_used"] = s_cap;
    try {
        Rat density = Rat(std::max(inst.m(), 1)) / Rat(inst.n());
        auto pr = degree_presets(inst.n(), inst.k(), gr.girth,
                                 NiceParams::make(inst.n(), inst.k(), density).eta);
        auto fin = [](double x) { return std::isfinite(x) ? json(x) : json("infinity"); };
        rep["degree_presets"]["d_girth_rule"] = fin(pr.d_girth);
        rep["degree_presets"]["d_eta_rule"] = fin(pr.d_eta);
        rep["degree_presets"]["s_eta_rule"] = fin(pr.s_eta);
    } catch (const input_error&) {
        rep["degree_presets"]["note"] = "preset formulas undefined at this density";
    }
    rep["suites"] = suites;
    rep["pass"] = all_pass;
    emit(a.report.empty() ? std::optional<std::string>{} : a.report, rep);
    for (const auto& e : suites)
        std::cerr << "verify: " << e["suite"].get<std::string>() << " "
                  << e["status"].get<std::string>() << "\n";
    if (!all_pass) g_exit = std::max(g_exit, 1);
}

// --- moments --------------------------------------------------------------------

struct MomentArgs {
    std::string instance;
    std::string mu = "parity+";
    int d = 2;
    std::string vars;
    int neighborhood = 12;
    std::uint64_t seed = 1;
    std::string psd = "both";
    int radius = 3;
    int budget_vars = kDefaultTableBudgetVars;
    std::string out;
    std::string report;
};

void run_moments(const MomentArgs& a) {
    std::map<std::string, std::string> hashes;
    Instance inst = load_inst(a.instance, hashes);
    PairwiseDist mu = resolve_mu(a.mu, inst.k(), hashes);
    PeParams pp;
    pp.degree_cap = 2 * a.d + inst.k();
    pp.closure_radius = a.radius;
    pp.table_budget_vars = a.budget_vars;
    PseudoExpectation pe(inst, mu, pp);

    VarSet w;
    if (!a.vars.empty()) {
        w = parse_var_list(a.vars);
    } else {
        std::mt19937_64 rng(a.seed);
        for (int t = 0; t < 5000 && w.empty(); ++t) {
            int u = 1 + static_cast<int>(rng() % inst.n());
            int v = 1 + static_cast<int>(rng() % inst.n());
            auto cl = closure_of(inst, vs_sorted({u, v}), a.radius);
            if (cl.vars.size() >= 4 && static_cast<int>(cl.vars.size()) <= a.neighborhood)
                w = cl.vars;
        }
        if (w.empty()) throw input_error("no closed neighborhood of the requested size found");
    }
    auto mm = build_moment_matrix(pe, a.d, w);

    json config{{"instance", a.instance}, {"mu", a.mu},   {"d", a.d},
                {"vars", w},              {"psd", a.psd}, {"seed", a.seed},
                {"radius", a.radius}};
    json rep = report_head("moments", config, hashes);
    rep["matrix"] = moment_matrix_to_json(mm);
    bool ok = true;
    if (a.psd == "exact" || a.psd == "both") {
        auto cert = check_psd_exact(mm.entries);
        rep["exact"] = psd_certificate_to_json(cert);
        ok = ok && cert.psd;
    }
    if (a.psd == "float" || a.psd == "both") {
        auto fl = check_psd_float(mm.entries, 1e-9);
        rep["float_min_eigenvalue"] = fl.min_eigenvalue;
        rep["float_psd"] = fl.psd;
        ok = ok && fl.psd;
    }
    if (!a.out.empty()) write_file(a.out, moment_matrix_to_json(mm).dump(2) + "\n");
    emit(a.report.empty() ? std::optional<std::string>{} : a.report, rep);
    std::cerr << "moments: " << mm.index.size() << " rows over " << vs_to_string(w) << ", "
              << (ok ? "PSD" : "NOT PSD") << "\n";
    if (!ok) g_exit = std::max(g_exit, 1);
}

// --- orthogonalize ----------------------------------------------------------------

struct OrthoArgs {
    std::string instance;
    std::string mu = "parity+";
    int d = 2;
    int radius = 3;
    int ball = -1;
    int budget_vars = kDefaultTableBudgetVars;
    std::size_t max_sets = 20000;
    std::string restrict_file;
    std::string out;
    std::string report;
};

void run_orthogonalize(const OrthoArgs& a) {
    std::map<std::string, std::string> hashes;
    Instance inst = load_inst(a.instance, hashes);
    PairwiseDist mu = resolve_mu(a.mu, inst.k(), hashes);
    auto gr = girth(inst);
    const int ball = a.ball > 0 ? a.ball : ball_radius(inst, gr.girth);
    PeParams pp;
    pp.degree_cap = 2 * a.d + inst.k();
    pp.closure_radius = a.radius;
    pp.table_budget_vars = a.budget_vars;
    PseudoExpectation pe(inst, mu, pp);

    json config{{"instance", a.instance}, {"mu", a.mu},     {"d", a.d},
                {"radius", a.radius},     {"ball", ball},   {"restrict", a.restrict_file}};
    json rep = report_head("orthogonalize", config, hashes);
    rep["degree_presets"] = json::object();
    rep["degree_presets"]["d_used"] = a.d;
    try {
        Rat density = Rat(std::max(inst.m(), 1)) / Rat(inst.n());
        auto pr = degree_presets(inst.n(), inst.k(), gr.girth,
                                 NiceParams::make(inst.n(), inst.k(), density).eta);
        auto fin = [](double x) { return std::isfinite(x) ? json(x) : json("infinity"); };
        rep["degree_presets"]["d_girth_rule"] = fin(pr.d_girth);
        rep["degree_presets"]["d_eta_rule"] = fin(pr.d_eta);
    } catch (const input_error&) {
        rep["degree_presets"]["note"] = "preset formulas undefined at this density";
    }
    bool ok = true;

    if (!a.restrict_file.empty()) {
        std::string bytes = read_file(a.restrict_file);
        hashes[a.restrict_file] = fnv1a64_hex(bytes);
        std::vector<VarSet> family;
        for (const auto& arr : json::parse(bytes)) family.push_back(arr.get<VarSet>());
        auto basis = orthogonalize_family(pe, family, ball, a.radius);
        auto pair = verify_pairwise_orthogonality(pe, basis);
        rep["restricted"] = true;
        rep["elements"] = basis.elems.size();
        rep["pairwise_orthogonal"] = pair.pass();
        if (!pair.pass()) rep["witness"] = pair.detail;
        ok = pair.pass();
        if (!a.out.empty()) write_file(a.out, ortho_basis_to_json(basis).dump(2) + "\n");
    } else {
        SetOrdering ordering = [&]() {
            try {
                return build_ordering(inst, a.d, a.radius, a.max_sets);
            } catch (const budget_error& e) {
                throw budget_error(std::string(e.what()) +
                                   " (pass --restrict FILE with an explicit set family)");
            }
        }();
        auto basis = orthogonalize_all(pe, ordering, ball);
        auto global = verify_global_orthogonality(pe, ordering, basis);
        bool spans = true, locals = true;
        int zero_norms = 0, kernels = 0;
        for (int i = 0; i < static_cast<int>(ordering.size()); ++i) {
            if (!verify_span(ordering, basis, i).pass()) spans = false;
            if (!verify_local_orthogonality(pe, ordering, basis, i).pass()) locals = false;
            if (basis.elems[i].norm2 == 0) ++zero_norms;
            if (basis.elems[i].kernel_dim > 0) ++kernels;
        }
        rep["restricted"] = false;
        rep["elements"] = basis.elems.size();
        rep["unit_triangular"] = spans;
        rep["local_orthogonality"] = locals;
        rep["global_orthogonality"] = global.result.pass();
        rep["zero_norm_count"] = zero_norms;
        rep["singular_gram_count"] = kernels;
        if (!global.result.pass()) rep["witness"] = global.result.detail;
        ok = spans && locals && global.result.pass();
        if (!a.out.empty()) write_file(a.out, ortho_basis_to_json(basis).dump(2) + "\n");
    }
    emit(a.report.empty() ? std::optional<std::string>{} : a.report, rep);
    std::cerr << "orthogonalize: " << (ok ? "all checks pass" : "FAILED") << "\n";
    if (!ok) g_exit = std::max(g_exit, 1);
}

// --- soundness --------------------------------------------------------------------

struct SoundArgs {
    std::string instance;
    std::string mode = "sampled";
    std::uint64_t budget = 100000;
    std::uint64_t seed = 1;
    double epsilon = -1;
    int workers = 1;
    std::string report;
};

void run_soundness(const SoundArgs& a) {
    std::map<std::string, std::string> hashes;
    Instance inst = load_inst(a.instance, hashes);
    DeviationMode mode;
    if (a.mode == "exhaustive")
        mode = DeviationMode::exhaustive;
    else if (a.mode == "sampled")
        mode = DeviationMode::sampled;
    else
        throw input_error("mode must be exhaustive or sampled");
    auto dev = max_deviation(inst, mode, a.budget, a.seed, a.workers);
    bool ok = a.epsilon < 0 || rat_to_double(dev.max_distance) <= a.epsilon;

    json config{{"instance", a.instance}, {"mode", a.mode},   {"budget", a.budget},
                {"seed", a.seed},         {"epsilon", a.epsilon}, {"workers", a.workers}};
    json rep = report_head("soundness", config, hashes);
    rep["n"] = inst.n();
    rep["m"] = inst.m();
    rep["k"] = inst.k();
    rep["mode"] = a.mode;
    rep["scanned"] = dev.scanned;
    rep["max_distance"] = rat_to_string(dev.max_distance);
    rep["max_distance_float"] = rat_to_double(dev.max_distance);
    rep["argmax_x"] = mask_to_bitstring(dev.argmax, inst.n());
    rep["epsilon_target"] = a.epsilon;
    rep["pass"] = ok;
    // the construction needs m = Omega(2^O(k) eps^-2 n) for epsilon-soundness;
    // reported for scale, never asserted
    if (a.epsilon > 0)
        rep["reference_m_scale"] =
            std::pow(2.0, inst.k() + 1) * inst.n() / (a.epsilon * a.epsilon);
    emit(a.report.empty() ? std::optional<std::string>{} : a.report, rep);
    std::cerr << "soundness: max distance " << rat_to_string(dev.max_distance) << " ("
              << rat_to_double(dev.max_distance) << "), " << (ok ? "pass" : "FAIL") << "\n";
    if (!ok) g_exit = std::max(g_exit, 1);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact construction and verification of pairwise-independence SOS "
                 "lower-bound objects"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "generate, prune, and check a random instance");
    gen->add_option("--n", ga.n, "variable count")->required();
    gen->add_option("--k", ga.k, "clause arity");
    gen->add_option("--gamma", ga.gamma, "clause density (rational or decimal)");
    gen->add_option("--delta", ga.delta, "expansion slack");
    gen->add_option("--epsilon", ga.epsilon, "soundness slack");
    gen->add_option("--seed", ga.seed, "RNG seed");
    gen->add_option("--girth-bound", ga.girth_bound, "prune cycles up to this length");
    gen->add_flag("--forest", ga.forest, "prune every cycle");
    gen->add_option("--out", ga.out, "instance output path")->required();
    gen->add_option("--report", ga.report, "report output path");
    gen->callback([&]() { run_gen(ga); });

    NiceArgs na;
    auto* nice = app.add_subcommand("check-nice", "girth and expansion report");
    nice->add_option("--instance", na.instance)->required();
    nice->add_option("--gamma", na.gamma, "density (default: measured m/n)");
    nice->add_option("--delta", na.delta);
    nice->add_option("--epsilon", na.epsilon);
    nice->add_option("--girth-bound", na.girth_bound, "override the formula bound");
    nice->add_option("--budget", na.budget, "expansion enumeration budget");
    nice->add_option("--seed", na.seed);
    nice->add_option("--report", na.report);
    nice->callback([&]() { run_check_nice(na); });

    ClosureArgs ca;
    auto* clo = app.add_subcommand("closure", "R-closure of a variable set");
    clo->add_option("--instance", ca.instance)->required();
    clo->add_option("--set", ca.set, "comma-separated variables")->required();
    clo->add_option("--radius", ca.radius);
    clo->add_option("--report", ca.report);
    clo->callback([&]() { run_closure(ca); });

    VerifyArgs va;
    auto* ver = app.add_subcommand("verify", "run lemma verification suites");
    ver->add_option("--instance", va.instance)->required();
    ver->add_option("--mu", va.mu, "uniform | parity+ | parity- | file:PATH");
    ver->add_option("--suite", va.suites, "all or comma list");
    ver->add_option("--d", va.d, "moment degree");
    ver->add_option("--s", va.s, "degree cap (default 2d+k)");
    ver->add_option("--radius", va.radius, "closure radius");
    ver->add_option("--ball", va.ball, "ball radius (default girth-capped 100)");
    ver->add_option("--trials", va.trials);
    ver->add_option("--seed", va.seed);
    ver->add_option("--budget-vars", va.budget_vars, "table budget in variables");
    ver->add_option("--max-sets", va.max_sets, "ordering budget");
    ver->add_option("--epsilon", va.epsilon, "soundness target");
    ver->add_option("--soundness-budget", va.soundness_budget);
    ver->add_option("--workers", va.workers);
    ver->add_option("--arithmetic", va.arithmetic, "exact | float | both");
    ver->add_option("--tolerance", va.tolerance, "float PSD tolerance");
    ver->add_option("--report", va.report);
    ver->callback([&]() { run_verify(va); });

    MomentArgs ma;
    auto* mom = app.add_subcommand("moments", "moment matrix and PSD certificates");
    mom->add_option("--instance", ma.instance)->required();
    mom->add_option("--mu", ma.mu);
    mom->add_option("--d", ma.d);
    mom->add_option("--vars", ma.vars, "explicit variable universe");
    mom->add_option("--neighborhood", ma.neighborhood, "auto-pick a closed set this large");
    mom->add_option("--seed", ma.seed);
    mom->add_option("--psd", ma.psd, "exact | float | both");
    mom->add_option("--radius", ma.radius);
    mom->add_option("--budget-vars", ma.budget_vars);
    mom->add_option("--out", ma.out, "matrix output path");
    mom->add_option("--report", ma.report);
    mom->callback([&]() { run_moments(ma); });

    OrthoArgs oa;
    auto* ort = app.add_subcommand("orthogonalize", "build and verify the chi~ family");
    ort->add_option("--instance", oa.instance)->required();
    ort->add_option("--mu", oa.mu);
    ort->add_option("--d", oa.d);
    ort->add_option("--radius", oa.radius);
    ort->add_option("--ball", oa.ball);
    ort->add_option("--budget-vars", oa.budget_vars);
    ort->add_option("--max-sets", oa.max_sets);
    ort->add_option("--restrict", oa.restrict_file, "JSON array of variable sets");
    ort->add_option("--out", oa.out, "basis output path");
    ort->add_option("--report", oa.report);
    ort->callback([&]() { run_orthogonalize(oa); });

    SoundArgs sa;
    auto* snd = app.add_subcommand("soundness", "worst-assignment output deviation");
    snd->add_option("--instance", sa.instance)->required();
    snd->add_option("--mode", sa.mode, "exhaustive | sampled");
    snd->add_option("--budget", sa.budget);
    snd->add_option("--seed", sa.seed);
    snd->add_option("--epsilon", sa.epsilon, "pass threshold on the distance");
    snd->add_option("--workers", sa.workers);
    snd->add_option("--report", sa.report);
    snd->callback([&]() { run_soundness(sa); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const budget_error& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 2;
    } catch (const verification_error& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return g_exit;
}
