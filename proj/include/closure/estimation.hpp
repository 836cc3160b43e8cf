#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "closure/closure_analysis.hpp"
#include "closure/system_model.hpp"

namespace closure {

/// Verdict tolerance used by default on estimated (sampling-noise) pipelines.
inline constexpr double kDefaultEmpiricalTolerance = 0.01;

/// Fixed, named RNG scheme: per-trajectory substreams are mt19937_64 engines
/// seeded by splitmix64(seed ^ trajectory index), and uniform deviates take
/// the top 53 bits of each draw.
inline constexpr const char* kRngAlgorithm = "splitmix64-mt19937_64";

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Inverse-CDF draw over a probability vector, scanning in index order.
inline std::size_t draw_index(std::mt19937_64& rng, const double* p, std::size_t n) {
    double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        acc += p[i];
        if (u < acc) return i;
    }
    return n - 1;
}

}  // namespace detail

/// A batch of sampled (context, env) state paths with identical horizon.
/// States are stored as block outcome indices; labels are recovered through
/// the variable metadata.
struct TrajectorySet {
    std::string scenario_fingerprint;  // empty when unknown
    std::string rng_algorithm;         // empty for externally logged traces
    std::uint64_t seed = 0;
    std::size_t count = 0;
    std::size_t horizon = 0;
    std::vector<Variable> context_vars;
    std::vector<Variable> env_vars;
    std::vector<std::uint32_t> context_states;  // count * (horizon + 1)
    std::vector<std::uint32_t> env_states;      // count * (horizon + 1)

    std::size_t states_per_path() const { return horizon + 1; }

    std::uint32_t context_state(std::size_t trajectory, std::size_t step) const {
        return context_states[trajectory * states_per_path() + step];
    }
    std::uint32_t env_state(std::size_t trajectory, std::size_t step) const {
        return env_states[trajectory * states_per_path() + step];
    }

    std::size_t context_outcomes() const {
        std::size_t n = 1;
        for (const auto& v : context_vars) n *= v.cardinality();
        return n;
    }
    std::size_t env_outcomes() const {
        std::size_t n = 1;
        for (const auto& v : env_vars) n *= v.cardinality();
        return n;
    }
};

/// Draws `count` i.i.d. trajectories of `horizon` steps. Bit-reproducible for
/// a fixed (seed, scenario, count, horizon); trajectories use independent
/// substreams, so a different traversal or a parallel fan-out produces the
/// same paths.
inline TrajectorySet sample(const MarkovScenario& scenario, std::size_t count, std::size_t horizon,
                            std::uint64_t seed) {
    if (count < 1) throw ArgumentError("count must be at least 1");
    if (horizon < 1) throw ArgumentError("horizon must be at least 1");
    if (horizon > scenario.limits().max_horizon) {
        throw LimitError("horizon " + std::to_string(horizon) + " exceeds limit " +
                         std::to_string(scenario.limits().max_horizon));
    }

    TrajectorySet out;
    out.rng_algorithm = kRngAlgorithm;
    out.seed = seed;
    out.count = count;
    out.horizon = horizon;
    out.context_vars = scenario.partition().context();
    out.env_vars = scenario.partition().outer_env();
    out.context_states.resize(count * (horizon + 1));
    out.env_states.resize(count * (horizon + 1));

    std::size_t ctx_n = scenario.partition().context_outcomes();
    std::size_t env_n = scenario.partition().env_outcomes();
    const auto& initial = scenario.initial().masses();
    const auto& ctx_kernel = scenario.context_kernel();
    const auto& env_kernel = scenario.env_kernel();

    for (std::size_t t = 0; t < count; ++t) {
        std::mt19937_64 rng(detail::splitmix64(seed ^ static_cast<std::uint64_t>(t)));
        std::size_t joint = detail::draw_index(rng, initial.data(), initial.size());
        std::size_t s = joint / env_n;
        std::size_t e = joint % env_n;
        out.context_states[t * (horizon + 1)] = static_cast<std::uint32_t>(s);
        out.env_states[t * (horizon + 1)] = static_cast<std::uint32_t>(e);
        for (std::size_t k = 1; k <= horizon; ++k) {
            std::size_t row = s * env_n + e;
            std::size_t s2 = detail::draw_index(rng, ctx_kernel.table().data() + row * ctx_n, ctx_n);
            std::size_t e2 = detail::draw_index(rng, env_kernel.table().data() + row * env_n, env_n);
            s = s2;
            e = e2;
            out.context_states[t * (horizon + 1) + k] = static_cast<std::uint32_t>(s);
            out.env_states[t * (horizon + 1) + k] = static_cast<std::uint32_t>(e);
        }
    }
    return out;
}

enum class Estimator { plug_in, miller_madow };

inline const char* estimator_name(Estimator e) {
    return e == Estimator::plug_in ? "plug_in" : "miller_madow";
}

/// Counts over (context_n, env_n, context_{n+1}) outcomes across trajectories.
struct EmpiricalJoint {
    std::vector<Variable> variables;  // context, env, next-context
    ClosureGroups groups;
    std::vector<std::uint64_t> counts;
    std::size_t sample_size = 0;
    std::size_t env_outcome_count = 1;
    Estimator estimator = Estimator::plug_in;

    JointDistribution to_distribution() const {
        std::vector<double> mass(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i) {
            mass[i] = static_cast<double>(counts[i]) / static_cast<double>(sample_size);
        }
        return JointDistribution(variables, std::move(mass));
    }
};

inline EmpiricalJoint empirical_closure_joint(const TrajectorySet& traj, std::size_t step,
                                              Estimator estimator = Estimator::plug_in) {
    if (step + 1 > traj.horizon) {
        throw LimitError("step " + std::to_string(step) + " needs step " + std::to_string(step + 1) +
                         " states, horizon is " + std::to_string(traj.horizon));
    }
    EmpiricalJoint emp;
    emp.estimator = estimator;
    emp.variables = traj.context_vars;
    emp.variables.insert(emp.variables.end(), traj.env_vars.begin(), traj.env_vars.end());
    for (auto v : traj.context_vars) {
        v.name += kNextSuffix;
        emp.variables.push_back(v);
    }
    for (const auto& v : traj.context_vars) emp.groups.context.push_back(v.name);
    for (const auto& v : traj.env_vars) emp.groups.env.push_back(v.name);
    for (const auto& v : traj.context_vars) emp.groups.next.push_back(v.name + kNextSuffix);

    std::size_t ctx_n = traj.context_outcomes();
    std::size_t env_n = traj.env_outcomes();
    emp.env_outcome_count = env_n;
    emp.counts.assign(ctx_n * env_n * ctx_n, 0);
    for (std::size_t t = 0; t < traj.count; ++t) {
        std::size_t s = traj.context_state(t, step);
        std::size_t e = traj.env_state(t, step);
        std::size_t s2 = traj.context_state(t, step + 1);
        ++emp.counts[(s * env_n + e) * ctx_n + s2];
    }
    emp.sample_size = traj.count;
    return emp;
}

struct EstimatedMeasures {
    ClosureMeasures measures;
    Estimator estimator = Estimator::plug_in;
    std::size_t sample_size = 0;
};

namespace detail {

/// Plug-in entropy of the marginal over `group`, plus the Miller–Madow
/// correction (m-1)/(2N ln 2) with m the number of outcomes actually observed.
inline double corrected_entropy(const JointDistribution& freq, const VariableGroup& group, std::size_t sample_size) {
    JointDistribution marginal = marginalize(freq, group);
    double h = 0.0;
    std::size_t support = 0;
    for (double p : marginal.masses()) {
        if (p > 0.0) {
            h -= p * std::log2(p);
            ++support;
        }
    }
    return h + static_cast<double>(support - 1) / (2.0 * static_cast<double>(sample_size) * std::log(2.0));
}

}  // namespace detail

/// Full per-step analysis on the empirical joint. Structural checks (bound,
/// propositions, derivation, identities) always use the plug-in frequencies;
/// with miller_madow the reported measures, verdict and budget come from the
/// bias-corrected estimates.
inline StepAnalysis analyze_empirical(const EmpiricalJoint& emp, std::size_t step, double tolerance,
                                      std::optional<double> delta = std::nullopt);

/// Closure measures on the empirical frequencies. The plug-in route applies
/// the exact-pipeline formulas verbatim; miller_madow recomputes each measure
/// from bias-corrected entropy terms.
inline EstimatedMeasures estimate_measures(const EmpiricalJoint& emp, std::size_t step = 0) {
    if (emp.sample_size < 1) throw ArgumentError("empirical joint has no samples");
    JointDistribution freq = emp.to_distribution();
    EstimatedMeasures out;
    out.estimator = emp.estimator;
    out.sample_size = emp.sample_size;
    out.measures = measure_joint(freq, emp.groups, step);

    if (emp.estimator == Estimator::miller_madow) {
        auto h = [&](const VariableGroup& g) { return detail::corrected_entropy(freq, g, emp.sample_size); };
        const auto& g = emp.groups;
        VariableGroup next_ctx = detail::group_union(g.next, g.context);
        double h_next = h(g.next);
        double h_ctx = h(g.context);
        double h_next_ctx = h(next_ctx);
        out.measures.next_entropy = h_next;
        out.measures.self_information = h_next + h_ctx - h_next_ctx;
        if (!g.env.empty()) {
            double h_env = h(g.env);
            double h_next_env = h(detail::group_union(g.next, g.env));
            double h_ctx_env = h(detail::group_union(g.context, g.env));
            double h_next_ctx_env = h(detail::group_union(next_ctx, g.env));
            out.measures.func_closure = h_next + h_env - h_next_env;
            out.measures.env_coupling = h_ctx + h_env - h_ctx_env;
            out.measures.info_closure = h_next_ctx + h_ctx_env - h_next_ctx_env - h_ctx;
            out.measures.state_env_information = h_next_ctx + h_env - h_next_ctx_env;
        }
    }
    return out;
}

inline StepAnalysis analyze_empirical(const EmpiricalJoint& emp, std::size_t step, double tolerance,
                                      std::optional<double> delta) {
    StepAnalysis a = analyze_joint(emp.to_distribution(), emp.groups, step, tolerance, delta);
    if (emp.estimator == Estimator::miller_madow) {
        a.measures = estimate_measures(emp, step).measures;
        a.verdict = classify(a.measures, tolerance);
        if (delta) a.budget = check_delta_budget(a.measures, *delta, tolerance);
    }
    return a;
}

}  // namespace closure
