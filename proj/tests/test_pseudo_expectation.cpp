#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"
#include "pexp/generate.hpp"
#include "pexp/pseudo_expectation.hpp"

using namespace pexp;

namespace {

PseudoExpectation make_pe(const Instance& inst, PairwiseDist mu, int s = 10) {
    PeParams p;
    p.degree_cap = s;
    return PseudoExpectation(inst, std::move(mu), p);
}

}  // namespace

TEST_CASE("character moments on the path fixture") {
    Instance inst = fixtures::path3();
    auto pe = make_pe(inst, parity_distribution(3, 1));

    CHECK(pe.char_moment(VarSet{}) == 1);
    for (int v = 1; v <= 7; ++v) CHECK(pe.char_moment(VarSet{v}) == 0);
    CHECK(pe.char_moment(VarSet{1, 2, 3}) == 1);
    CHECK(pe.char_moment(VarSet{3, 4, 5}) == 1);
    CHECK(pe.char_moment(VarSet{1, 2}) == 0);
    // on the support x1x2 = x3, x4x5 = x3, x6x7 = x5, so chi_{1..7} = x3*x5
    CHECK(pe.char_moment(VarSet{1, 2, 3, 4, 5, 6, 7}) == 0);
    CHECK(pe.char_moment(VarSet{3, 5}) == 0);

    // memoized calls return identical values
    CHECK(pe.char_moment(VarSet{1, 2, 3}) == 1);
    CHECK(pe.memo_size() >= 1);
}

TEST_CASE("degree cap is enforced") {
    Instance inst = fixtures::path3();
    auto pe = make_pe(inst, parity_distribution(3, 1), 2);
    CHECK_THROWS_AS(pe.char_moment(VarSet{1, 2, 3}), budget_error);
}

TEST_CASE("polynomial evaluation is exactly linear") {
    Instance inst = fixtures::path3();
    auto pe = make_pe(inst, parity_distribution(3, 1));

    Polynomial one{{0, Rat(1)}};
    CHECK(pe(one) == 1);

    // (x1 + x2)^2 = 2 + 2 x1 x2 in the quotient
    Polynomial f{{vs_to_mask({1}), Rat(1)}, {vs_to_mask({2}), Rat(1)}};
    Polynomial sq = poly_mul(f, f);
    CHECK(sq == Polynomial{{0, Rat(2)}, {vs_to_mask({1, 2}), Rat(2)}});
    CHECK(pe(sq) == 2);

    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
        Polynomial p, q;
        for (int j = 0; j < 4; ++j) {
            VarSet s;
            for (int v = 1; v <= 7; ++v)
                if (rng() & 1) s.push_back(v);
            p[vs_to_mask(s)] = Rat(static_cast<int>(rng() % 7) - 3);
            VarSet s2;
            for (int v = 1; v <= 7; ++v)
                if (rng() & 1) s2.push_back(v);
            q[vs_to_mask(s2)] = Rat(static_cast<int>(rng() % 7) - 3);
        }
        Rat alpha = Rat(static_cast<int>(rng() % 5) - 2) / Rat(1 + static_cast<int>(rng() % 3));
        Rat beta = Rat(static_cast<int>(rng() % 5) - 2) / Rat(1 + static_cast<int>(rng() % 3));
        Polynomial comb;
        for (const auto& [m, c] : p) comb[m] += alpha * c;
        for (const auto& [m, c] : q) comb[m] += beta * c;
        CHECK(pe(comb) == alpha * pe(p) + beta * pe(q));
    }
}

TEST_CASE("x^2 = 1 reduction is sound") {
    Instance inst = fixtures::path3();
    auto mu = parity_distribution(3, 1);
    auto pe = make_pe(inst, mu);
    std::mt19937_64 rng(9);
    for (int t = 0; t < 15; ++t) {
        VarSet S, T;
        for (int v = 1; v <= 7; ++v) {
            if (rng() % 3 == 0) S.push_back(v);
            if (rng() % 3 == 0) T.push_back(v);
        }
        // direct route: expectation of the product under nu on cl(S cup T)
        ClosedSet cl = closure_of(inst, vs_union(S, T), 3);
        auto nu = nu_closed(inst, mu, cl);
        auto posS = detail::positions_in(cl.vars, S);
        auto posT = detail::positions_in(cl.vars, T);
        std::uint64_t mS = 0, mT = 0;
        for (int p : posS) mS |= std::uint64_t{1} << p;
        for (int p : posT) mT |= std::uint64_t{1} << p;
        Rat direct = 0;
        for (std::uint64_t x = 0; x < nu.table.size(); ++x) {
            if (nu.table[x] == 0) continue;
            int sgn = (std::popcount(x & mS) + std::popcount(x & mT)) % 2 ? -1 : 1;
            direct += sgn == 1 ? nu.table[x] : -nu.table[x];
        }
        CHECK(pe.char_moment(vs_symdiff(S, T)) == direct);
    }
}

TEST_CASE("completeness on every fixture clause") {
    Instance inst = fixtures::path3();
    auto pe = make_pe(inst, parity_distribution(3, 1));
    for (const auto& c : inst.clauses()) CHECK(check_completeness(pe, c).pass());

    // flipped signs are absorbed into mu_C
    Instance flipped(7, 3,
                     {fixtures::cl({1, 2, 3}, {-1, 1, 1}), fixtures::cl({3, 4, 5}, {1, -1, 1}),
                      fixtures::cl({5, 6, 7}, {-1, -1, -1})});
    auto pe2 = make_pe(flipped, parity_distribution(3, 1));
    for (const auto& c : flipped.clauses()) CHECK(check_completeness(pe2, c).pass());

    // uniform mu: every indicator evaluates to 1/8
    auto pe3 = make_pe(inst, uniform_distribution(3));
    for (const auto& c : inst.clauses()) CHECK(check_completeness(pe3, c).pass());
}

TEST_CASE("a non-pairwise-independent mu is caught by the consistency machinery") {
    Instance inst = fixtures::path3();

    // biased single-variable marginals clash with the uniform singleton
    // closures, so completeness itself reports the defect
    PairwiseDist point;
    point.k = 3;
    point.probs.assign(8, Rat(0));
    point.probs[0] = 1;
    auto pe = make_pe(inst, point);
    auto comp = check_completeness(pe, inst.clause(0));
    CHECK(comp.status == CheckStatus::fail);
    CHECK_FALSE(comp.detail.empty());
    auto res = check_consistency(inst, point, {3}, {3, 5});
    CHECK(res.status == CheckStatus::fail);

    // fully-correlated mu: normalization survives, union factorization fails
    PairwiseDist corr;
    corr.k = 3;
    corr.probs.assign(8, Rat(0));
    corr.probs[0b000] = Rat(1, 2);
    corr.probs[0b111] = Rat(1, 2);
    ClosedSet a{{1}, {}, 100};
    ClosedSet b{{5}, {}, 3};
    auto uf = check_union_factorization(inst, corr, a, b);
    CHECK(uf.result.status == CheckStatus::fail);
}

TEST_CASE("moment matrix of an empty instance is the identity") {
    Instance empty(5, 3, {});
    auto pe = make_pe(empty, parity_distribution(3, 1));
    auto mm = build_moment_matrix(pe, 1);
    REQUIRE(mm.index.size() == 6);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            CHECK(mm.entries[i][j] == (i == j ? Rat(1) : Rat(0)));
}

TEST_CASE("moment matrix on the path fixture") {
    Instance inst = fixtures::path3();
    auto pe = make_pe(inst, parity_distribution(3, 1));

    auto m1 = build_moment_matrix(pe, 1);
    REQUIRE(m1.index.size() == 8);
    for (std::size_t i = 0; i < m1.index.size(); ++i)
        for (std::size_t j = 0; j < m1.index.size(); ++j)
            CHECK(m1.entries[i][j] == (i == j ? Rat(1) : Rat(0)));

    auto m2 = build_moment_matrix(pe, 2);
    // row {1,2} against column {3}: E~[chi_123] = 1
    auto find = [&](const VarSet& s) {
        return static_cast<std::size_t>(
            std::find(m2.index.begin(), m2.index.end(), s) - m2.index.begin());
    };
    CHECK(m2.entries[find({1, 2})][find({3})] == 1);
    CHECK(m2.entries[find({1, 2})][find({1, 2})] == 1);

    auto cert = check_psd_exact(m2.entries);
    CHECK(cert.psd);
    auto fl = check_psd_float(m2.entries, 1e-9);
    CHECK(fl.psd);
    CHECK(fl.min_eigenvalue >= -1e-9);

    CHECK_THROWS_AS(build_moment_matrix(pe, 6), input_error);
}

TEST_CASE("exact PSD certification") {
    auto I2 = std::vector<std::vector<Rat>>{{Rat(1), Rat(0)}, {Rat(0), Rat(1)}};
    auto c1 = check_psd_exact(I2);
    CHECK(c1.psd);
    CHECK(c1.pivots == std::vector<Rat>{Rat(1), Rat(1)});

    auto bad = std::vector<std::vector<Rat>>{{Rat(1), Rat(2)}, {Rat(2), Rat(1)}};
    auto c2 = check_psd_exact(bad);
    REQUIRE_FALSE(c2.psd);
    CHECK(c2.witness_value < 0);
    // the witness certifies indefiniteness exactly: p^T M p recomputes to it
    Rat recomputed = 0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) recomputed += c2.witness[i] * bad[i][j] * c2.witness[j];
    CHECK(recomputed == c2.witness_value);

    auto rank1 = std::vector<std::vector<Rat>>{{Rat(1), Rat(1)}, {Rat(1), Rat(1)}};
    auto c3 = check_psd_exact(rank1);
    CHECK(c3.psd);
    CHECK(std::count(c3.pivots.begin(), c3.pivots.end(), Rat(0)) == 1);

    // zero diagonal with nonzero off-diagonal is indefinite
    auto hollow = std::vector<std::vector<Rat>>{{Rat(0), Rat(3)}, {Rat(3), Rat(0)}};
    auto c4 = check_psd_exact(hollow);
    REQUIRE_FALSE(c4.psd);
    CHECK(c4.witness_value < 0);

    CHECK_THROWS_AS(check_psd_exact({{Rat(1), Rat(2)}, {Rat(3), Rat(1)}}), input_error);
}

TEST_CASE("exact and float PSD verdicts agree on random matrices") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 25; ++t) {
        const int n = 2 + static_cast<int>(rng() % 5);
        std::vector<std::vector<Rat>> B(n, std::vector<Rat>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) B[i][j] = Rat(static_cast<int>(rng() % 7) - 3);
        // A = B^T B is PSD
        std::vector<std::vector<Rat>> A(n, std::vector<Rat>(n, Rat(0)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l) A[i][j] += B[l][i] * B[l][j];
        auto cert = check_psd_exact(A);
        CHECK(cert.psd);
        CHECK(check_psd_float(A, 1e-9).psd);

        // shift the diagonal down until indefinite
        for (int i = 0; i < n; ++i) A[i][i] -= Rat(1 + static_cast<int>(rng() % 3));
        auto maybe = check_psd_exact(A);
        auto flres = check_psd_float(A, 1e-9);
        CHECK(maybe.psd == flres.psd);
        if (!maybe.psd) {
            // witness evaluates below zero, exactly
            Rat val = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) val += maybe.witness[i] * A[i][j] * maybe.witness[j];
            CHECK(val == maybe.witness_value);
            CHECK(val < 0);
        }
    }
}

TEST_CASE("local PSD on fixtures") {
    Instance inst = fixtures::path3();
    auto pe = make_pe(inst, parity_distribution(3, 1));

    auto single = check_local_psd(pe, {4}, 10, 1);
    CHECK(single.pass());
    CHECK(single.gram.pivots == std::vector<Rat>{Rat(1), Rat(1)});

    // T = V(C1): chi_123 is forced to 1, so the Gram is rank deficient but PSD
    auto clause = check_local_psd(pe, {1, 2, 3}, 100, 2);
    CHECK(clause.pass());
    CHECK(std::count(clause.gram.pivots.begin(), clause.gram.pivots.end(), Rat(0)) > 0);
}

TEST_CASE("gram of a subset is a submatrix of the larger moment matrix") {
    Instance inst = fixtures::path3();
    auto pe = make_pe(inst, parity_distribution(3, 1));
    auto big = build_moment_matrix(pe, 2, VarSet{1, 2, 3, 4, 5});
    auto small = build_moment_matrix(pe, 2, VarSet{1, 2, 3});
    for (std::size_t i = 0; i < small.index.size(); ++i)
        for (std::size_t j = 0; j < small.index.size(); ++j) {
            auto bi = std::find(big.index.begin(), big.index.end(), small.index[i]) -
                      big.index.begin();
            auto bj = std::find(big.index.begin(), big.index.end(), small.index[j]) -
                      big.index.begin();
            CHECK(small.entries[i][j] == big.entries[bi][bj]);
        }
}

TEST_CASE("moment matrix on a pruned random instance is PSD") {
    Instance gen = generate_random(24, 3, Rat(2), 77);
    Instance inst = prune_to_forest(gen).instance;
    PeParams params;
    params.degree_cap = 10;
    PseudoExpectation pe(inst, parity_distribution(3, -1), params);

    // a closed neighborhood of moderate size
    std::mt19937_64 rng(8);
    VarSet w;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        VarSet s{1 + static_cast<int>(rng() % inst.n()), 1 + static_cast<int>(rng() % inst.n()),
                 1 + static_cast<int>(rng() % inst.n())};
        auto cl = closure_of(inst, vs_sorted(s), 3);
        if (cl.vars.size() >= 3 && cl.vars.size() <= 10) {
            w = cl.vars;
            break;
        }
    }
    REQUIRE(!w.empty());
    auto mm = build_moment_matrix(pe, 2, w);
    auto cert = check_psd_exact(mm.entries);
    CHECK(cert.psd);
    auto fl = check_psd_float(mm.entries, 1e-9);
    CHECK(fl.psd);
}

TEST_CASE("larger moment matrix: exact and float agree at 121x121") {
    Instance gen = generate_random(30, 3, Rat(2), 77);
    Instance inst = prune_to_forest(gen).instance;
    PeParams params;
    params.degree_cap = 8;
    PseudoExpectation pe(inst, parity_distribution(3, 1), params);
    VarSet universe;
    for (int v = 1; v <= 15; ++v) universe.push_back(v);
    auto mm = build_moment_matrix(pe, 2, universe);
    REQUIRE(mm.index.size() == 121);
    auto exact = check_psd_exact(mm.entries);
    auto fl = check_psd_float(mm.entries, 1e-9);
    CHECK(exact.psd);
    CHECK(fl.psd);
    CHECK(exact.psd == fl.psd);
}

TEST_CASE("rational least squares returns kernel-orthogonal solutions") {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 20; ++t) {
        const int n = 3 + static_cast<int>(rng() % 4);
        const int r = 1 + static_cast<int>(rng() % (n - 1));  // deficient rank
        std::vector<std::vector<Rat>> B(r, std::vector<Rat>(n));
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < n; ++j) B[i][j] = Rat(static_cast<int>(rng() % 5) - 2);
        std::vector<std::vector<Rat>> G(n, std::vector<Rat>(n, Rat(0)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < r; ++l) G[i][j] += B[l][i] * B[l][j];
        // b = G y lies in the range by construction
        std::vector<Rat> y(n), b(n, Rat(0));
        for (int j = 0; j < n; ++j) y[j] = Rat(static_cast<int>(rng() % 7) - 3);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) b[i] += G[i][j] * y[j];

        auto sol = solve_psd_system(G, b);
        REQUIRE(sol.consistent);
        // G c = b exactly
        for (int i = 0; i < n; ++i) {
            Rat acc = 0;
            for (int j = 0; j < n; ++j) acc += G[i][j] * sol.solution[j];
            CHECK(acc == b[i]);
        }
        // minimal norm: the solution is orthogonal to every kernel vector,
        // equivalently it lies in the row space; check against brute kernel
        if (sol.kernel_dim > 0) {
            // any vector z with G z = 0 must satisfy <z, c> = 0
            // sample kernel candidates by projecting random vectors
            for (int s2 = 0; s2 < 5; ++s2) {
                std::vector<Rat> z(n);
                for (int j = 0; j < n; ++j) z[j] = Rat(static_cast<int>(rng() % 5) - 2);
                // project z onto ker(G) by solving least squares on the range
                auto pz = solve_psd_system(G, [&] {
                    std::vector<Rat> gz(n, Rat(0));
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j) gz[i] += G[i][j] * z[j];
                    return gz;
                }());
                std::vector<Rat> kernel_part(n);
                for (int j = 0; j < n; ++j) kernel_part[j] = z[j] - pz.solution[j];
                Rat gnorm = 0, dot = 0;
                for (int i = 0; i < n; ++i) {
                    Rat gi = 0;
                    for (int j = 0; j < n; ++j) gi += G[i][j] * kernel_part[j];
                    gnorm += gi * gi;
                    dot += kernel_part[i] * sol.solution[i];
                }
                if (gnorm == 0) CHECK(dot == 0);
            }
        }
    }
}

TEST_CASE("completeness and consistency at arity four") {
    Instance inst(10, 4,
                  {fixtures::cl({1, 2, 3, 4}, {1, -1, 1, 1}),
                   fixtures::cl({4, 5, 6, 7}, {-1, 1, 1, -1}),
                   fixtures::cl({7, 8, 9, 10}, {1, 1, -1, 1})});
    auto mu = from_generator_matrix(4, {0b1111});  // even-weight code
    auto pe = make_pe(inst, mu);
    for (const auto& c : inst.clauses()) CHECK(check_completeness(pe, c).pass());
    CHECK(check_consistency(inst, mu, {2, 5}, {2, 5, 9}).pass());
    CHECK(pe.char_moment(VarSet{1, 2, 3, 4}) == -1);  // sign -1 on one literal
}

TEST_CASE("moment matrix JSON export") {
    Instance inst = fixtures::path3();
    auto pe = make_pe(inst, parity_distribution(3, 1));
    auto mm = build_moment_matrix(pe, 1, VarSet{1, 2});
    json j = moment_matrix_to_json(mm);
    CHECK(j["index"].size() == 3);
    CHECK(j["entries"][0][0] == "1");

    auto cert = check_psd_exact(mm.entries);
    json cj = psd_certificate_to_json(cert);
    CHECK(cj["psd"] == true);
}
