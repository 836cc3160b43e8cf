#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "closure/info_measures.hpp"
#include "closure/system_model.hpp"

namespace closure {

/// Variable groups inside a (context_n, env_n, context_{n+1}) joint.
/// `env` may be empty, which models a scenario with no outer environment.
struct ClosureGroups {
    VariableGroup context;
    VariableGroup env;
    VariableGroup next;
};

inline ClosureGroups closure_groups(const MarkovScenario& scenario) {
    ClosureGroups g;
    g.context = scenario.partition().context_names();
    g.env = scenario.partition().outer_env_names();
    for (const auto& v : scenario.next_context_variables()) g.next.push_back(v.name);
    return g;
}

/// Per-step closure measures, all in bits:
///   info_closure      I(context_{n+1} ; env_n | context_n) — new information
///                     crossing the boundary; zero means informationally closed
///   func_closure      I(context_{n+1} ; env_n) — any shared information with
///                     the current environment; zero means functionally closed
///   env_coupling      I(context_n ; env_n) — standing system/environment
///                     correlation at step n
///   self_information  I(context_{n+1} ; context_n)
///   next_entropy      H(context_{n+1})
///   state_env_information  I(context_{n+1}, context_n ; env_n) — the coupling
///                     floor appearing in the lower-bound check
struct ClosureMeasures {
    double info_closure = 0.0;
    double func_closure = 0.0;
    double env_coupling = 0.0;
    double self_information = 0.0;
    double next_entropy = 0.0;
    double state_env_information = 0.0;
    std::size_t step = 0;
    std::size_t env_outcomes = 1;
};

namespace detail {

/// Every entropy/information quantity the closure checks draw on, evaluated
/// once per joint. With an empty environment block all environment-dependent
/// quantities are exactly zero and conditionals reduce to their unconditional
/// forms.
struct ChainQuantities {
    double h_next = 0.0;
    double h_ctx = 0.0;
    double h_env = 0.0;
    double h_next_ctx = 0.0;
    double h_ctx_env = 0.0;
    double h_next_given_env = 0.0;
    double h_ctx_given_env = 0.0;
    double h_env_given_ctx = 0.0;
    double h_next_ctx_given_env = 0.0;
    double i_next_ctx = 0.0;
    double i_next_env = 0.0;
    double i_ctx_env = 0.0;
    double i_next_env_given_ctx = 0.0;
    double i_next_ctx_given_env = 0.0;
    double i_next_ctx_env = 0.0;  // I(next ; context ∪ env)
};

inline ChainQuantities chain_quantities(const JointDistribution& joint, const ClosureGroups& g) {
    ChainQuantities q;
    VariableGroup next_ctx = group_union(g.next, g.context);
    q.h_next = entropy(joint, g.next);
    q.h_ctx = entropy(joint, g.context);
    q.h_next_ctx = entropy(joint, next_ctx);
    q.i_next_ctx = mutual_information(joint, g.next, g.context);
    if (g.env.empty()) {
        q.h_next_given_env = q.h_next;
        q.h_ctx_given_env = q.h_ctx;
        q.h_ctx_env = q.h_ctx;
        q.h_next_ctx_given_env = q.h_next_ctx;
        q.i_next_ctx_given_env = q.i_next_ctx;
        q.i_next_ctx_env = q.i_next_ctx;
        return q;
    }
    q.h_env = entropy(joint, g.env);
    q.h_ctx_env = entropy(joint, group_union(g.context, g.env));
    q.h_next_given_env = conditional_entropy(joint, g.next, g.env);
    q.h_ctx_given_env = conditional_entropy(joint, g.context, g.env);
    q.h_env_given_ctx = conditional_entropy(joint, g.env, g.context);
    q.h_next_ctx_given_env = conditional_entropy(joint, next_ctx, g.env);
    q.i_next_env = mutual_information(joint, g.next, g.env);
    q.i_ctx_env = mutual_information(joint, g.context, g.env);
    q.i_next_env_given_ctx = conditional_mutual_information(joint, g.next, g.env, g.context);
    q.i_next_ctx_given_env = conditional_mutual_information(joint, g.next, g.context, g.env);
    q.i_next_ctx_env = mutual_information(joint, g.next, group_union(g.context, g.env));
    return q;
}

inline std::size_t env_outcomes_of(const JointDistribution& joint, const VariableGroup& env) {
    std::size_t n = 1;
    for (const auto& name : env) n *= joint.variables()[joint.position(name)].cardinality();
    return n;
}

}  // namespace detail

inline ClosureMeasures measure_joint(const JointDistribution& joint, const ClosureGroups& groups, std::size_t step) {
    detail::ChainQuantities q = detail::chain_quantities(joint, groups);
    ClosureMeasures m;
    m.info_closure = q.i_next_env_given_ctx;
    m.func_closure = q.i_next_env;
    m.env_coupling = q.i_ctx_env;
    m.self_information = q.i_next_ctx;
    m.next_entropy = q.h_next;
    m.state_env_information = q.h_next_ctx - q.h_next_ctx_given_env;
    m.step = step;
    m.env_outcomes = detail::env_outcomes_of(joint, groups.env);
    return m;
}

/// All closure measures at one step, computed on the exact closure joint.
inline ClosureMeasures measure(const MarkovScenario& scenario, std::size_t step) {
    return measure_joint(closure_joint(scenario, step), closure_groups(scenario), step);
}

/// Per-step verdict at an explicit tolerance. The informational and functional
/// flags are independent threshold tests; neither implies the other. The
/// systems-theoretic flag additionally requires the environment to be absent
/// or degenerate (a single outcome), i.e. no input/output alphabet at all.
struct ClosureVerdict {
    bool informationally_closed = false;
    bool functionally_closed_informational = false;
    bool systems_theoretic_closed = false;
    double tolerance = kDefaultExactTolerance;
};

inline ClosureVerdict classify(const ClosureMeasures& m, double tolerance) {
    if (!(tolerance > 0.0)) throw ArgumentError("tolerance must be positive");
    ClosureVerdict v;
    v.tolerance = tolerance;
    v.informationally_closed = m.info_closure < tolerance;
    v.functionally_closed_informational = m.func_closure < tolerance;
    v.systems_theoretic_closed = m.env_outcomes <= 1 && v.informationally_closed &&
                                 v.functionally_closed_informational && m.env_coupling < tolerance;
    return v;
}

/// Result of a conditional check: when the hypothesis is unmet the check is
/// "not applicable" rather than failed.
struct PropositionCheck {
    bool applicable = false;
    double residual = 0.0;
    bool pass = true;
};

/// Lower-bound check on the standing coupling:
///   I(context_n ; env_n)  >=  H(next, context) - H(next, context | env_n).
/// Its derivation assumes informational closure, so `satisfied` is only
/// contractual when `conditioned` is true; open scenarios report the slack
/// informationally.
struct CouplingBoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool satisfied = true;
    bool conditioned = false;
};

enum class StepKind { equality, inequality };

/// One verified algebraic step: equalities carry a residual that must vanish,
/// inequalities carry a slack that must be non-negative under the closure
/// hypothesis (`applicable`).
struct DerivationStep {
    std::string name;
    StepKind kind = StepKind::equality;
    double value = 0.0;
    bool applicable = true;
    bool pass = true;
};

namespace detail {

inline PropositionCheck state_sufficiency_check(const ChainQuantities& q, double tolerance) {
    PropositionCheck c;
    c.applicable = q.i_next_env_given_ctx < tolerance;
    c.residual = std::abs(q.i_next_ctx_env - q.i_next_ctx);
    c.pass = !c.applicable || c.residual < tolerance;
    return c;
}

inline PropositionCheck entropy_inheritance_check(const ChainQuantities& q, double tolerance) {
    PropositionCheck c;
    double h_next_given_ctx = q.h_next_ctx - q.h_ctx;
    c.applicable = h_next_given_ctx < tolerance;
    c.residual = std::abs(q.i_next_ctx - q.h_next);
    c.pass = !c.applicable || c.residual < tolerance;
    return c;
}

inline CouplingBoundCheck coupling_bound_check(const ChainQuantities& q, double tolerance) {
    CouplingBoundCheck c;
    c.lhs = q.i_ctx_env;
    c.rhs = q.h_next_ctx - q.h_next_ctx_given_env;
    c.slack = c.lhs - c.rhs;
    c.satisfied = c.slack >= -tolerance;
    c.conditioned = q.i_next_env_given_ctx < tolerance;
    return c;
}

inline std::vector<DerivationStep> derivation_steps(const ChainQuantities& q, double tolerance) {
    bool closed = q.i_next_env_given_ctx < tolerance;
    std::vector<DerivationStep> steps;
    auto equality = [&](std::string name, double residual) {
        steps.push_back({std::move(name), StepKind::equality, residual, true, std::abs(residual) <= tolerance});
    };
    auto inequality = [&](std::string name, double slack) {
        steps.push_back({std::move(name), StepKind::inequality, slack, closed, !closed || slack >= -tolerance});
    };

    equality("chain_rule_over_state", q.i_next_ctx_env - (q.i_next_ctx + q.i_next_env_given_ctx));
    equality("chain_rule_over_environment", q.i_next_ctx_env - (q.i_next_env + q.i_next_ctx_given_env));
    inequality("conditioning_drop", q.i_next_ctx - q.i_next_ctx_given_env);
    equality("self_information_entropy_form", q.i_next_ctx - (q.h_next + q.h_ctx - q.h_next_ctx));
    equality("conditional_self_information_entropy_form",
             q.i_next_ctx_given_env - (q.h_next_given_env + q.h_ctx_given_env - q.h_next_ctx_given_env));
    inequality("entropy_form_gap",
               (q.h_next + q.h_ctx - q.h_next_ctx) - (q.h_next + q.h_ctx_given_env - q.h_next_ctx_given_env));
    equality("joint_entropy_split_env_first", q.h_env + q.h_ctx_given_env - q.h_ctx_env);
    equality("joint_entropy_split_state_first", q.h_ctx + q.h_env_given_ctx - q.h_ctx_env);
    equality("coupling_entropy_difference", (q.h_env - q.h_env_given_ctx) - q.i_ctx_env);
    inequality("coupling_lower_bound", q.i_ctx_env - (q.h_next_ctx - q.h_next_ctx_given_env));
    return steps;
}

}  // namespace detail

/// Under informational closure, the information the next state shares with
/// (env, state) collapses onto the state alone:
/// I(next ; env ∪ context) = I(next ; context).
inline PropositionCheck check_state_sufficiency(const MarkovScenario& scenario, std::size_t step,
                                                double tolerance = kDefaultExactTolerance) {
    return detail::state_sufficiency_check(
        detail::chain_quantities(closure_joint(scenario, step), closure_groups(scenario)), tolerance);
}

/// When the next context state is determined by the current one
/// (H(next|context) = 0), the next state's entire entropy is inherited:
/// I(next ; context) = H(next).
inline PropositionCheck check_entropy_inheritance(const MarkovScenario& scenario, std::size_t step,
                                                  double tolerance = kDefaultExactTolerance) {
    return detail::entropy_inheritance_check(
        detail::chain_quantities(closure_joint(scenario, step), closure_groups(scenario)), tolerance);
}

inline CouplingBoundCheck check_coupling_bound(const MarkovScenario& scenario, std::size_t step,
                                               double tolerance = kDefaultExactTolerance) {
    return detail::coupling_bound_check(
        detail::chain_quantities(closure_joint(scenario, step), closure_groups(scenario)), tolerance);
}

/// Verifies every algebraic step linking the closure definition to the
/// coupling lower bound, as numeric identities/inequalities on the actual
/// joint.
inline std::vector<DerivationStep> check_coupling_derivation(const MarkovScenario& scenario, std::size_t step,
                                                             double tolerance = kDefaultExactTolerance) {
    return detail::derivation_steps(
        detail::chain_quantities(closure_joint(scenario, step), closure_groups(scenario)), tolerance);
}

/// Design budget on the standing coupling: the measured I(context;env) must
/// sit between the lower bound required to maintain closure and the
/// user-chosen delta. A delta below the lower bound is unsatisfiable and
/// reported as infeasible.
struct DeltaBudget {
    double delta = 0.0;
    double coupling = 0.0;
    double required_floor = 0.0;
    bool within_budget = false;
    bool infeasible = false;
};

inline DeltaBudget check_delta_budget(const ClosureMeasures& m, double delta,
                                      double tolerance = kDefaultExactTolerance) {
    if (delta < 0.0) throw ArgumentError("delta must be non-negative");
    DeltaBudget b;
    b.delta = delta;
    b.coupling = m.env_coupling;
    b.required_floor = m.state_env_information;
    b.infeasible = delta < b.required_floor - tolerance;
    b.within_budget = (m.env_coupling >= b.required_floor - tolerance) && (m.env_coupling <= delta + tolerance);
    return b;
}

/// Everything the reporting layer needs for one step.
struct StepAnalysis {
    ClosureMeasures measures;
    ClosureVerdict verdict;
    CouplingBoundCheck bound;
    PropositionCheck state_sufficiency;
    PropositionCheck entropy_inheritance;
    std::vector<DerivationStep> derivation;
    IdentityReport identities;
    std::optional<DeltaBudget> budget;
};

inline StepAnalysis analyze_joint(const JointDistribution& joint, const ClosureGroups& groups, std::size_t step,
                                  double tolerance, std::optional<double> delta = std::nullopt) {
    detail::ChainQuantities q = detail::chain_quantities(joint, groups);
    StepAnalysis a;
    a.measures = measure_joint(joint, groups, step);
    a.verdict = classify(a.measures, tolerance);
    a.bound = detail::coupling_bound_check(q, tolerance);
    a.state_sufficiency = detail::state_sufficiency_check(q, tolerance);
    a.entropy_inheritance = detail::entropy_inheritance_check(q, tolerance);
    a.derivation = detail::derivation_steps(q, tolerance);
    if (groups.env.empty()) {
        a.identities = verify_identities(joint, groups.next, groups.context, {}, tolerance);
    } else {
        a.identities = verify_identities(joint, groups.next, groups.env, groups.context, tolerance);
    }
    if (delta) a.budget = check_delta_budget(a.measures, *delta, tolerance);
    return a;
}

inline StepAnalysis analyze_step(const MarkovScenario& scenario, std::size_t step, double tolerance,
                                 std::optional<double> delta = std::nullopt) {
    return analyze_joint(closure_joint(scenario, step), closure_groups(scenario), step, tolerance, delta);
}

}  // namespace closure
