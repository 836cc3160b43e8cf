#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "closure/estimation.hpp"
#include "closure/fixtures.hpp"
#include "closure/io.hpp"
#include "closure/scenarios.hpp"

using namespace closure;

namespace {

Variable coin(const std::string& name) { return {name, {"0", "1"}}; }

MarkovScenario fully_deterministic_scenario() {
    SystemPartition p({coin("s")}, {Variable{"m", {"u"}}}, {coin("e")});
    TransitionKernel ctx = TransitionKernel::deterministic(4, 2, [](std::size_t r) { return (r >> 1) ^ (r & 1u); });
    TransitionKernel env = TransitionKernel::deterministic(4, 2, [](std::size_t r) { return r >> 1; });
    JointDistribution initial = JointDistribution::from_outcomes(p.universe(), {{{"1", "u", "1"}, 1.0}});
    return MarkovScenario(p, initial, ctx, env);
}

double max_measure_error(const ClosureMeasures& a, const ClosureMeasures& b) {
    double err = std::abs(a.info_closure - b.info_closure);
    err = std::max(err, std::abs(a.func_closure - b.func_closure));
    err = std::max(err, std::abs(a.env_coupling - b.env_coupling));
    err = std::max(err, std::abs(a.self_information - b.self_information));
    err = std::max(err, std::abs(a.next_entropy - b.next_entropy));
    err = std::max(err, std::abs(a.state_env_information - b.state_env_information));
    return err;
}

}  // namespace

TEST_CASE("sampling determinism", "[estimation]") {
    MarkovScenario scenario = decoupled_scenario();

    SECTION("same seed, same trajectories, byte-identical CSV") {
        TrajectorySet a = sample(scenario, 50, 4, 912);
        TrajectorySet b = sample(scenario, 50, 4, 912);
        REQUIRE(a.context_states == b.context_states);
        REQUIRE(a.env_states == b.env_states);
        std::ostringstream csv_a;
        std::ostringstream csv_b;
        io::write_trajectories_csv(csv_a, a);
        io::write_trajectories_csv(csv_b, b);
        REQUIRE(csv_a.str() == csv_b.str());
    }
    SECTION("different seeds give different draws") {
        TrajectorySet a = sample(scenario, 50, 4, 912);
        TrajectorySet c = sample(scenario, 50, 4, 913);
        CHECK(a.context_states != c.context_states);
    }
    SECTION("deterministic scenarios are seed-independent") {
        MarkovScenario det = fully_deterministic_scenario();
        TrajectorySet a = sample(det, 10, 5, 1);
        TrajectorySet b = sample(det, 10, 5, 999);
        CHECK(a.context_states == b.context_states);
        CHECK(a.env_states == b.env_states);
        // every path identical
        for (std::size_t t = 1; t < a.count; ++t) {
            for (std::size_t k = 0; k <= a.horizon; ++k) {
                REQUIRE(a.context_state(t, k) == a.context_state(0, k));
            }
        }
    }
    SECTION("argument validation") {
        CHECK_THROWS_AS(sample(scenario, 0, 3, 1), ArgumentError);
        CHECK_THROWS_AS(sample(scenario, 3, 0, 1), ArgumentError);
        CHECK_THROWS_AS(sample(scenario, 1, scenario.limits().max_horizon + 1, 1), LimitError);
    }
}

TEST_CASE("sampled frequencies track the exact law", "[estimation]") {
    // decoupled scenario: the context coordinate s is a fair coin at step 1
    MarkovScenario scenario = decoupled_scenario();
    TrajectorySet traj = sample(scenario, 10000, 2, 77);
    EmpiricalJoint emp = empirical_closure_joint(traj, 1);
    JointDistribution freq = emp.to_distribution();
    JointDistribution s_marginal = marginalize(freq, {"s"});
    CHECK(s_marginal.masses()[0] > 0.47);
    CHECK(s_marginal.masses()[0] < 0.53);
}

TEST_CASE("empirical closure joint", "[estimation]") {
    SECTION("a single trajectory gives a point mass") {
        TrajectorySet traj = sample(copy_scenario(), 1, 2, 5);
        EmpiricalJoint emp = empirical_closure_joint(traj, 0);
        CHECK(emp.sample_size == 1);
        std::size_t nonzero = 0;
        for (auto c : emp.counts) nonzero += (c != 0);
        CHECK(nonzero == 1);
        JointDistribution freq = emp.to_distribution();
        double total = 0.0;
        for (double p : freq.masses()) total += p;
        CHECK(total == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("a deterministic scenario reproduces the exact joint without noise") {
        MarkovScenario det = fully_deterministic_scenario();
        TrajectorySet traj = sample(det, 100, 3, 42);
        EmpiricalJoint emp = empirical_closure_joint(traj, 1);
        JointDistribution exact = closure_joint(det, 1);
        JointDistribution freq = emp.to_distribution();
        for (std::size_t i = 0; i < exact.size(); ++i) {
            REQUIRE(freq.masses()[i] == Catch::Approx(exact.masses()[i]).margin(1e-15));
        }
    }
    SECTION("step must leave room for the successor state") {
        TrajectorySet traj = sample(copy_scenario(), 3, 2, 5);
        CHECK_NOTHROW(empirical_closure_joint(traj, 1));
        CHECK_THROWS_AS(empirical_closure_joint(traj, 2), LimitError);
    }
}

TEST_CASE("estimated measures", "[estimation]") {
    SECTION("plug-in on exactly proportional counts equals the exact measures") {
        // copy scenario at step 1: the exact joint is two outcomes of mass 1/2
        JointDistribution exact = closure_joint(copy_scenario(), 1);
        EmpiricalJoint emp;
        emp.variables = exact.variables();
        emp.groups = closure_groups(copy_scenario());
        emp.counts.assign(exact.size(), 0);
        for (std::size_t i = 0; i < exact.size(); ++i) {
            emp.counts[i] = static_cast<std::uint64_t>(exact.masses()[i] * 2.0);
        }
        emp.sample_size = 2;
        emp.env_outcome_count = 2;
        ClosureMeasures estimated = estimate_measures(emp, 1).measures;
        ClosureMeasures reference = measure(copy_scenario(), 1);
        CHECK(max_measure_error(estimated, reference) < 1e-12);
    }

    SECTION("copy scenario at n=1: every plug-in estimate lands within 0.02 bits at N=1e5") {
        ClosureMeasures exact = measure(copy_scenario(), 1);
        TrajectorySet traj = sample(copy_scenario(), 100000, 2, 2024);
        ClosureMeasures estimated = estimate_measures(empirical_closure_joint(traj, 1), 1).measures;
        CHECK(max_measure_error(estimated, exact) < 0.02);
    }

    SECTION("error shrinks from N=1e3 to N=1e5") {
        ClosureMeasures exact = measure(copy_scenario(), 1);
        std::size_t improved = 0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            TrajectorySet small = sample(copy_scenario(), 1000, 2, seed);
            TrajectorySet large = sample(copy_scenario(), 100000, 2, seed);
            double err_small =
                max_measure_error(estimate_measures(empirical_closure_joint(small, 1), 1).measures, exact);
            double err_large =
                max_measure_error(estimate_measures(empirical_closure_joint(large, 1), 1).measures, exact);
            if (err_large < err_small) ++improved;
        }
        CHECK(improved >= 9);
    }

    SECTION("independent blocks give near-zero plug-in information at N=1e4") {
        // decoupled scenario keeps context and environment independent
        TrajectorySet traj = sample(decoupled_scenario(), 10000, 2, 31);
        ClosureMeasures m = estimate_measures(empirical_closure_joint(traj, 1), 1).measures;
        CHECK(m.func_closure >= 0.0);
        CHECK(m.func_closure < 0.01);
        CHECK(m.env_coupling < 0.01);
    }

    SECTION("miller_madow entropy dominates plug-in entropy") {
        TrajectorySet traj = sample(decoupled_scenario(), 500, 2, 8);
        EmpiricalJoint plug = empirical_closure_joint(traj, 1, Estimator::plug_in);
        EmpiricalJoint mm = empirical_closure_joint(traj, 1, Estimator::miller_madow);
        double h_plug = estimate_measures(plug, 1).measures.next_entropy;
        double h_mm = estimate_measures(mm, 1).measures.next_entropy;
        CHECK(h_mm >= h_plug);
        CHECK(h_mm - h_plug < 0.05);
    }

    SECTION("estimator metadata is carried through") {
        TrajectorySet traj = sample(copy_scenario(), 10, 2, 3);
        EmpiricalJoint emp = empirical_closure_joint(traj, 0, Estimator::miller_madow);
        EstimatedMeasures est = estimate_measures(emp, 0);
        CHECK(est.estimator == Estimator::miller_madow);
        CHECK(est.sample_size == 10);
    }
}

TEST_CASE("trajectory CSV round trip", "[estimation]") {
    MarkovScenario scenario = copy_scenario();
    TrajectorySet traj = sample(scenario, 25, 3, 456);
    traj.scenario_fingerprint = io::fingerprint(scenario);

    std::ostringstream out;
    io::write_trajectories_csv(out, traj);
    std::istringstream in(out.str());
    TrajectorySet loaded = io::trajectories_from_csv(in, "roundtrip");

    CHECK(loaded.count == traj.count);
    CHECK(loaded.horizon == traj.horizon);
    CHECK(loaded.seed == traj.seed);
    CHECK(loaded.rng_algorithm == kRngAlgorithm);
    CHECK(loaded.scenario_fingerprint == traj.scenario_fingerprint);
    REQUIRE(loaded.context_vars.size() == traj.context_vars.size());
    REQUIRE(loaded.env_vars.size() == traj.env_vars.size());

    // measured the same way after the round trip
    EmpiricalJoint a = empirical_closure_joint(traj, 1);
    EmpiricalJoint b = empirical_closure_joint(loaded, 1);
    CHECK(a.counts == b.counts);
}
