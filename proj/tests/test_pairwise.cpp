#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"
#include "pexp/pairwise.hpp"

using namespace pexp;

namespace {

// Affine-plane oracle: enumerate all 4-point subsets of the cube that form an
// affine subspace, then test containment in the support.
bool oracle_has_plane(const std::vector<std::uint32_t>& support, int k) {
    std::vector<char> in(std::size_t{1} << k, 0);
    for (auto v : support) in[v] = 1;
    const std::uint32_t top = std::uint32_t{1} << k;
    for (std::uint32_t a = 0; a < top; ++a)
        for (std::uint32_t b = a + 1; b < top; ++b)
            for (std::uint32_t c = b + 1; c < top; ++c) {
                std::uint32_t d = a ^ b ^ c;
                if (d <= c) continue;  // canonical: a<b<c<d
                if (in[a] && in[b] && in[c] && in[d]) return true;
            }
    return false;
}

}  // namespace

TEST_CASE("rational parsing and formatting") {
    CHECK(rat_from_string("3/4") == Rat(3, 4));
    CHECK(rat_from_string("-7/2") == Rat(-7, 2));
    CHECK(rat_from_string("5") == 5);
    CHECK(rat_from_string("0.25") == Rat(1, 4));
    CHECK(rat_from_string("-1.5") == Rat(-3, 2));
    CHECK(rat_from_string("2.0") == 2);
    CHECK(rat_from_string("6/4") == Rat(3, 2));  // canonicalized
    CHECK(rat_to_string(Rat(3, 4)) == "3/4");
    CHECK(rat_to_string(Rat(2)) == "2");
    CHECK(rat_pow2(3) == 8);
    CHECK(rat_pow2(-2) == Rat(1, 4));
    CHECK(rat_pow2(0) == 1);
    CHECK_THROWS_AS(rat_from_string(""), input_error);
    CHECK_THROWS_AS(rat_from_string("1/0"), input_error);
    CHECK_THROWS_AS(rat_from_string("x"), input_error);
    CHECK_THROWS_AS(rat_from_string("1/2.5"), input_error);
}

TEST_CASE("verify_pairwise_independent") {
    CHECK(verify_pairwise_independent(uniform_distribution(3)).ok);
    CHECK(verify_pairwise_independent(parity_distribution(3, 1)).ok);

    PairwiseDist point;
    point.k = 3;
    point.probs.assign(8, Rat(0));
    point.probs[0] = 1;  // mass on (+1,+1,+1)
    auto res = verify_pairwise_independent(point);
    CHECK_FALSE(res.ok);
    CHECK(res.failure == "E[y1] = 1");

    PairwiseDist unnorm = uniform_distribution(3);
    unnorm.probs[0] = Rat(1, 2);
    auto bad = verify_pairwise_independent(unnorm);
    CHECK_FALSE(bad.ok);
    CHECK(bad.failure.starts_with("validation:"));
}

TEST_CASE("parity distribution") {
    auto d = parity_distribution(3, 1);
    int support = 0;
    for (const auto& p : d.probs)
        if (p != 0) {
            ++support;
            CHECK(p == Rat(1, 4));
        }
    CHECK(support == 4);

    CHECK(verify_pairwise_independent(parity_distribution(4, -1)).ok);
    CHECK_THROWS_AS(parity_distribution(2, 1), input_error);
}

TEST_CASE("code-based distributions") {
    auto code = from_generator_matrix(3, {0b111});
    auto parity = parity_distribution(3, 1);
    CHECK(code.probs == parity.probs);

    auto full = from_generator_matrix(3, {});
    CHECK(full.probs == uniform_distribution(3).probs);

    CHECK_THROWS_AS(from_generator_matrix(3, {0b011}), input_error);
}

TEST_CASE("contains_affine_plane on hand cases") {
    std::vector<std::uint32_t> cube;
    for (std::uint32_t v = 0; v < 8; ++v) cube.push_back(v);
    CHECK(contains_affine_plane(cube, 3).found);

    CHECK_FALSE(contains_affine_plane({0b000, 0b011, 0b101}, 3).found);

    auto plane = contains_affine_plane({0b000, 0b011, 0b101, 0b110}, 3);
    CHECK(plane.found);
    CHECK((plane.plane[0] ^ plane.plane[1] ^ plane.plane[2]) == plane.plane[3]);
}

TEST_CASE("affine plane checker agrees with enumeration for k <= 4") {
    // k=3: all 256 supports
    for (std::uint32_t mask = 0; mask < 256; ++mask) {
        std::vector<std::uint32_t> support;
        for (int v = 0; v < 8; ++v)
            if ((mask >> v) & 1) support.push_back(v);
        CHECK(contains_affine_plane(support, 3).found == oracle_has_plane(support, 3));
    }
    // k=4: random supports
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 500; ++t) {
        std::vector<std::uint32_t> support;
        for (std::uint32_t v = 0; v < 16; ++v)
            if (rng() & 1) support.push_back(v);
        CHECK(contains_affine_plane(support, 4).found == oracle_has_plane(support, 4));
    }
}

TEST_CASE("clause distributions") {
    auto mu = parity_distribution(3, 1);

    // all-positive signs: the table is mu itself
    auto cd = clause_distribution(mu, fixtures::cl({2, 5, 7}));
    CHECK(cd.table == mu.probs);

    // one flipped sign moves the support to the product = -1 pattern
    auto flipped = clause_distribution(mu, fixtures::cl({2, 5, 7}, {-1, 1, 1}));
    for (std::uint32_t x = 0; x < 8; ++x) {
        bool odd = std::popcount(x) % 2 == 1;
        CHECK(flipped.table[x] == (odd ? Rat(1, 4) : Rat(0)));
    }

    // single-variable marginals are uniform (forced by pairwise independence)
    for (int pos = 0; pos < 3; ++pos) {
        Rat plus = 0;
        for (std::uint32_t x = 0; x < 8; ++x)
            if (((x >> pos) & 1) == 0) plus += flipped.table[x];
        CHECK(plus == Rat(1, 2));
    }
}

TEST_CASE("clause distribution commutes with sign flips") {
    auto mu = parity_distribution(3, -1);
    auto base = clause_distribution(mu, fixtures::cl({1, 4, 6}, {1, -1, 1}));
    auto flip = clause_distribution(mu, fixtures::cl({1, 4, 6}, {1, 1, 1}));
    // flipping sign j equals negating variable j in the table index
    for (std::uint32_t x = 0; x < 8; ++x) CHECK(base.table[x] == flip.table[x ^ 0b010]);
}

TEST_CASE("distribution JSON round trip") {
    auto mu = parity_distribution(3, 1);
    json j = dist_to_json(mu);
    CHECK(j["probs"].contains("+++"));
    CHECK(j["probs"]["+++"] == "1/4");
    auto back = dist_from_json(j);
    CHECK(back.k == 3);
    CHECK(back.probs == mu.probs);

    CHECK_THROWS_AS(dist_from_json(json::parse(R"({"k":3,"probs":{"++":"1"}})")), input_error);
}
