#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "closure/fixtures.hpp"
#include "closure/info_measures.hpp"
#include "support/oracles.hpp"

using namespace closure;

namespace {

Variable coin(const std::string& name) { return {name, {"0", "1"}}; }

JointDistribution xor_triple() {
    std::vector<std::pair<std::vector<std::string>, double>> entries;
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            entries.push_back({{std::to_string(x), std::to_string(y), std::to_string(x ^ y)}, 0.25});
        }
    }
    return JointDistribution::from_outcomes({coin("x"), coin("y"), coin("z")}, entries);
}

JointDistribution copy_pair() {
    return JointDistribution::from_outcomes({coin("x"), coin("y")}, {{{"0", "0"}, 0.5}, {{"1", "1"}, 0.5}});
}

// binary symmetric channel with uniform input and flip probability 0.25
JointDistribution bsc_quarter() {
    return JointDistribution::from_outcomes(
        {coin("x"), coin("y")},
        {{{"0", "0"}, 0.375}, {{"0", "1"}, 0.125}, {{"1", "0"}, 0.125}, {{"1", "1"}, 0.375}});
}

constexpr double kBinaryEntropyQuarter = 0.8112781244591328;  // -0.25 log2 0.25 - 0.75 log2 0.75

}  // namespace

TEST_CASE("entropy examples", "[info_measures]") {
    CHECK(entropy(JointDistribution::uniform({coin("x"), coin("y")}), {"x", "y"}) ==
          Catch::Approx(2.0).margin(1e-12));
    CHECK(entropy(JointDistribution::from_outcomes({coin("x")}, {{{"1"}, 1.0}}), {"x"}) == 0.0);
    JointDistribution d({Variable{"x", {"a", "b", "c"}}}, {0.5, 0.25, 0.25});
    CHECK(entropy(d, {"x"}) == Catch::Approx(1.5).margin(1e-12));
    CHECK_THROWS_AS(entropy(d, {"nope"}), NameError);
    CHECK_THROWS_AS(entropy(d, {}), ArgumentError);
}

TEST_CASE("joint entropy examples", "[info_measures]") {
    CHECK(joint_entropy(JointDistribution::uniform({coin("x"), coin("y")}), {"x"}, {"y"}) ==
          Catch::Approx(2.0).margin(1e-12));
    CHECK(joint_entropy(copy_pair(), {"x"}, {"y"}) == Catch::Approx(1.0).margin(1e-12));
    CHECK(joint_entropy(xor_triple(), {"x"}, {"z"}) == Catch::Approx(2.0).margin(1e-12));
    CHECK_THROWS_AS(joint_entropy(copy_pair(), {"x"}, {"x"}), ArgumentError);
}

TEST_CASE("conditional entropy examples", "[info_measures]") {
    CHECK(conditional_entropy(copy_pair(), {"y"}, {"x"}) == Catch::Approx(0.0).margin(1e-12));
    JointDistribution indep = product(JointDistribution({coin("x")}, {0.5, 0.5}),
                                      JointDistribution({coin("y")}, {0.25, 0.75}));
    CHECK(conditional_entropy(indep, {"y"}, {"x"}) ==
          Catch::Approx(entropy(indep, {"y"})).margin(1e-12));
    CHECK(conditional_entropy(bsc_quarter(), {"y"}, {"x"}) == Catch::Approx(kBinaryEntropyQuarter).margin(1e-12));
}

TEST_CASE("mutual information examples", "[info_measures]") {
    JointDistribution indep = JointDistribution::uniform({coin("x"), coin("y")});
    CHECK(mutual_information(indep, {"x"}, {"y"}) == Catch::Approx(0.0).margin(1e-12));
    CHECK(mutual_information(copy_pair(), {"x"}, {"y"}) == Catch::Approx(1.0).margin(1e-12));
    CHECK(mutual_information(bsc_quarter(), {"x"}, {"y"}) ==
          Catch::Approx(1.0 - kBinaryEntropyQuarter).margin(1e-12));
}

TEST_CASE("conditional mutual information examples", "[info_measures]") {
    SECTION("conditioning on a constant reduces to mutual information") {
        JointDistribution d = product(bsc_quarter(), JointDistribution({Variable{"c", {"only"}}}, {1.0}));
        CHECK(conditional_mutual_information(d, {"x"}, {"y"}, {"c"}) ==
              Catch::Approx(mutual_information(d, {"x"}, {"y"})).margin(1e-12));
    }
    SECTION("xor: independent inputs become fully informative given parity") {
        JointDistribution d = xor_triple();
        CHECK(mutual_information(d, {"x"}, {"y"}) == Catch::Approx(0.0).margin(1e-12));
        CHECK(conditional_mutual_information(d, {"x"}, {"y"}, {"z"}) == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("chain x -> z -> y has no conditional information") {
        // y is a noisy copy of z, z a noisy copy of x
        std::vector<std::pair<std::vector<std::string>, double>> entries;
        for (int x = 0; x < 2; ++x) {
            for (int z = 0; z < 2; ++z) {
                for (int y = 0; y < 2; ++y) {
                    double p = 0.5 * (z == x ? 0.75 : 0.25) * (y == z ? 0.7 : 0.3);
                    entries.push_back({{std::to_string(x), std::to_string(z), std::to_string(y)}, p});
                }
            }
        }
        JointDistribution d = JointDistribution::from_outcomes({coin("x"), coin("z"), coin("y")}, entries);
        CHECK(conditional_mutual_information(d, {"x"}, {"y"}, {"z"}) == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("identity report", "[info_measures]") {
    SECTION("seeded random distributions satisfy every identity") {
        for (std::uint64_t seed = 100; seed < 150; ++seed) {
            JointDistribution d = fixtures::random_distribution(seed);
            VariableGroup x{d.variables()[0].name};
            VariableGroup y{d.variables()[1].name};
            VariableGroup z;
            for (std::size_t i = 2; i < d.variable_count(); ++i) z.push_back(d.variables()[i].name);
            IdentityReport report = verify_identities(d, x, y, z, 1e-9);
            REQUIRE(report.all_pass);
            REQUIRE(report.max_residual < 1e-9);
        }
    }
    SECTION("copy pair pins the conditional entropies to zero") {
        JointDistribution d = copy_pair();
        CHECK(conditional_entropy(d, {"y"}, {"x"}) == Catch::Approx(0.0).margin(1e-12));
        CHECK(conditional_entropy(d, {"x"}, {"y"}) == Catch::Approx(0.0).margin(1e-12));
        IdentityReport report = verify_identities(d, {"x"}, {"y"}, {}, 1e-12);
        CHECK(report.all_pass);
    }
    SECTION("xor triple is exact in dyadic arithmetic") {
        IdentityReport report = verify_identities(xor_triple(), {"x"}, {"y"}, {"z"}, 1e-12);
        CHECK(report.all_pass);
        CHECK(report.max_residual < 1e-12);
    }
    SECTION("impossible tolerance flags failures") {
        JointDistribution d = fixtures::random_distribution(7);
        VariableGroup x{d.variables()[0].name};
        VariableGroup y{d.variables()[1].name};
        IdentityReport report = verify_identities(d, x, y, {}, 1e-300);
        CHECK_FALSE(report.all_pass);
    }
}

TEST_CASE("measure properties on seeded fixtures", "[info_measures]") {
    for (std::uint64_t seed = 200; seed < 260; ++seed) {
        JointDistribution d = fixtures::random_distribution(seed);
        VariableGroup x{d.variables()[0].name};
        VariableGroup y{d.variables()[1].name};

        double hx = entropy(d, x);
        REQUIRE(hx >= 0.0);
        REQUIRE(hx <= std::log2(double(d.variables()[0].cardinality())) + 1e-9);

        REQUIRE(mutual_information(d, x, y) >= -1e-9);
        REQUIRE(conditional_entropy(d, y, x) <= entropy(d, y) + 1e-9);

        // cross-check the definitional sums against the independent oracle
        REQUIRE(entropy(d, x) == Catch::Approx(oracle::entropy(d, x)).margin(1e-10));
        REQUIRE(mutual_information(d, x, y) == Catch::Approx(oracle::mutual_information(d, x, y)).margin(1e-10));
        REQUIRE(conditional_entropy(d, y, x) == Catch::Approx(oracle::conditional_entropy(d, y, x)).margin(1e-10));

        if (d.variable_count() > 2) {
            VariableGroup z;
            for (std::size_t i = 2; i < d.variable_count(); ++i) z.push_back(d.variables()[i].name);
            REQUIRE(conditional_mutual_information(d, x, y, z) >= -1e-9);
            REQUIRE(conditional_mutual_information(d, x, y, z) ==
                    Catch::Approx(oracle::conditional_mutual_information(d, x, y, z)).margin(1e-10));
        }
    }
}
