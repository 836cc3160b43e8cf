#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "closure/closure_analysis.hpp"
#include "closure/estimation.hpp"
#include "closure/fixtures.hpp"
#include "closure/functional_closure.hpp"
#include "closure/io.hpp"
#include "closure/scenarios.hpp"

namespace closure::report {

using nlohmann::json;

inline constexpr const char* kToolName = "closure";
inline constexpr const char* kToolVersion = "0.1.0";

/// The one-step model assumption surfaced in every scenario report.
inline constexpr const char* kKernelFactorizationNote =
    "one-step model: next context and environment states are conditionally independent given the current pair, "
    "P(context',env'|context,env) = P(context'|context,env) * P(env'|context,env)";

namespace detail {

inline std::string fixed6(double bits) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6f", bits);
    return buffer;
}

inline std::string sci3(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.3e", value);
    return buffer;
}

inline std::string general(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%g", value);
    return buffer;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// analyze / sweep reports

struct EstimationInfo {
    Estimator estimator = Estimator::plug_in;
    std::size_t sample_size = 0;
    std::string rng_algorithm;
};

struct ClosureReport {
    std::string command;      // analyze | sweep
    std::string source;       // file path or builtin scenario name
    std::string fingerprint;  // empty when unknown
    std::string pipeline;     // exact | empirical
    double tolerance = kDefaultExactTolerance;
    std::optional<double> delta;
    std::optional<EstimationInfo> estimation;
    std::vector<StepAnalysis> steps;
    std::vector<std::string> notes;
};

inline ClosureReport build_closure_report(std::string command, std::string source, std::string fingerprint,
                                          std::string pipeline, double tolerance, std::optional<double> delta,
                                          std::vector<StepAnalysis> steps,
                                          std::optional<EstimationInfo> estimation = std::nullopt) {
    ClosureReport r;
    r.command = std::move(command);
    r.source = std::move(source);
    r.fingerprint = std::move(fingerprint);
    r.pipeline = std::move(pipeline);
    r.tolerance = tolerance;
    r.delta = delta;
    r.estimation = std::move(estimation);
    r.steps = std::move(steps);
    r.notes.push_back(kKernelFactorizationNote);
    for (const auto& s : r.steps) {
        if (s.verdict.functionally_closed_informational && !s.verdict.informationally_closed) {
            r.notes.push_back("step " + std::to_string(s.measures.step) +
                              ": functionally closed but informationally open; the two closure flags are "
                              "independent threshold tests and neither implies the other");
        }
        if (s.budget && s.budget->infeasible) {
            r.notes.push_back("step " + std::to_string(s.measures.step) +
                              ": delta budget infeasible, the coupling floor " +
                              detail::fixed6(s.budget->required_floor) + " bits exceeds delta " +
                              detail::fixed6(s.budget->delta));
        }
    }
    return r;
}

inline json step_to_json(const StepAnalysis& s) {
    const ClosureMeasures& m = s.measures;
    json step{{"step", m.step},
              {"measures",
               {{"info_closure", clamp_reported(m.info_closure)},
                {"func_closure", clamp_reported(m.func_closure)},
                {"env_coupling", clamp_reported(m.env_coupling)},
                {"self_information", clamp_reported(m.self_information)},
                {"next_entropy", clamp_reported(m.next_entropy, 1e-12)},
                {"state_env_information", clamp_reported(m.state_env_information)}}},
              {"verdict",
               {{"informationally_closed", s.verdict.informationally_closed},
                {"functionally_closed_informational", s.verdict.functionally_closed_informational},
                {"systems_theoretic_closed", s.verdict.systems_theoretic_closed},
                {"tolerance", s.verdict.tolerance}}},
              {"theorem",
               {{"lhs", clamp_reported(s.bound.lhs)},
                {"rhs", clamp_reported(s.bound.rhs)},
                {"slack", s.bound.slack},
                {"satisfied", s.bound.satisfied},
                {"conditioned", s.bound.conditioned}}}};

    json propositions;
    propositions["p1"] = s.state_sufficiency.applicable ? json(s.state_sufficiency.residual) : json("n/a");
    propositions["p2"] = s.entropy_inheritance.applicable ? json(s.entropy_inheritance.residual) : json("n/a");
    step["propositions"] = propositions;

    json derivation = json::array();
    for (const auto& d : s.derivation) {
        derivation.push_back(json{{"name", d.name},
                                  {"kind", d.kind == StepKind::equality ? "equality" : "inequality"},
                                  {"value", d.value},
                                  {"applicable", d.applicable},
                                  {"pass", d.pass}});
    }
    step["derivation"] = derivation;
    step["identities"] = json{{"checks", s.identities.entries.size()},
                              {"max_residual", s.identities.max_residual},
                              {"all_pass", s.identities.all_pass}};
    if (s.budget) {
        step["delta"] = json{{"delta", s.budget->delta},
                             {"coupling", clamp_reported(s.budget->coupling)},
                             {"required_floor", clamp_reported(s.budget->required_floor)},
                             {"within_budget", s.budget->within_budget},
                             {"infeasible", s.budget->infeasible}};
    }
    return step;
}

inline json closure_report_to_json(const ClosureReport& r) {
    json out{{"tool", {{"name", kToolName}, {"version", kToolVersion}}},
             {"command", r.command},
             {"scenario", {{"source", r.source}, {"fingerprint", r.fingerprint}}},
             {"pipeline", r.pipeline},
             {"tolerance", r.tolerance},
             {"notes", r.notes}};
    if (r.delta) out["delta_parameter"] = *r.delta;
    if (r.estimation) {
        out["estimation"] = json{{"estimator", estimator_name(r.estimation->estimator)},
                                 {"sample_size", r.estimation->sample_size},
                                 {"rng", r.estimation->rng_algorithm}};
    }
    json steps = json::array();
    double max_identity_residual = 0.0;
    bool identities_pass = true;
    for (const auto& s : r.steps) {
        steps.push_back(step_to_json(s));
        max_identity_residual = std::max(max_identity_residual, s.identities.max_residual);
        identities_pass = identities_pass && s.identities.all_pass;
    }
    out["steps"] = steps;
    out["identity_summary"] = json{{"max_residual", max_identity_residual}, {"all_pass", identities_pass}};

    if (r.command == "sweep" && !r.steps.empty()) {
        auto minmax = [&](auto field) {
            double lo = field(r.steps.front().measures);
            double hi = lo;
            for (const auto& s : r.steps) {
                lo = std::min(lo, field(s.measures));
                hi = std::max(hi, field(s.measures));
            }
            return json{{"min", clamp_reported(lo)}, {"max", clamp_reported(hi)}};
        };
        out["summary"] = json{
            {"info_closure", minmax([](const ClosureMeasures& m) { return m.info_closure; })},
            {"func_closure", minmax([](const ClosureMeasures& m) { return m.func_closure; })},
            {"env_coupling", minmax([](const ClosureMeasures& m) { return m.env_coupling; })},
            {"self_information", minmax([](const ClosureMeasures& m) { return m.self_information; })},
            {"next_entropy", minmax([](const ClosureMeasures& m) { return m.next_entropy; })},
            {"state_env_information", minmax([](const ClosureMeasures& m) { return m.state_env_information; })}};
    }
    return out;
}

inline std::string closure_report_to_text(const ClosureReport& r) {
    std::string out;
    out += std::string(kToolName) + " " + r.command + " (" + r.pipeline + " pipeline, v" + kToolVersion + ")\n";
    out += "scenario: " + r.source;
    if (!r.fingerprint.empty()) out += " [" + r.fingerprint + "]";
    out += "\ntolerance: " + detail::general(r.tolerance) + " bits\n";
    if (r.estimation) {
        out += "estimator: " + std::string(estimator_name(r.estimation->estimator)) + ", samples: " +
               std::to_string(r.estimation->sample_size);
        if (!r.estimation->rng_algorithm.empty()) out += ", rng: " + r.estimation->rng_algorithm;
        out += "\n";
    }
    for (const auto& s : r.steps) {
        const ClosureMeasures& m = s.measures;
        out += "\nstep " + std::to_string(m.step) + "\n";
        out += "  info_closure          " + detail::fixed6(clamp_reported(m.info_closure)) + "\n";
        out += "  func_closure          " + detail::fixed6(clamp_reported(m.func_closure)) + "\n";
        out += "  env_coupling          " + detail::fixed6(clamp_reported(m.env_coupling)) + "\n";
        out += "  self_information      " + detail::fixed6(clamp_reported(m.self_information)) + "\n";
        out += "  next_entropy          " + detail::fixed6(clamp_reported(m.next_entropy, 1e-12)) + "\n";
        out += "  state_env_information " + detail::fixed6(clamp_reported(m.state_env_information)) + "\n";
        out += std::string("  verdict: ") + (s.verdict.informationally_closed ? "informationally closed" : "informationally open");
        out += s.verdict.functionally_closed_informational ? ", functionally closed" : ", functionally open";
        if (s.verdict.systems_theoretic_closed) out += ", systems-theoretic closed";
        out += "\n";
        out += "  coupling bound: lhs " + detail::fixed6(clamp_reported(s.bound.lhs)) + ", rhs " +
               detail::fixed6(clamp_reported(s.bound.rhs)) + ", slack " + detail::sci3(s.bound.slack) +
               (s.bound.satisfied ? " -> satisfied" : " -> violated") +
               (s.bound.conditioned ? " (closure hypothesis holds)" : " (unconditioned: closure hypothesis unmet)") + "\n";
        out += "  propositions: p1 ";
        out += s.state_sufficiency.applicable
                   ? detail::sci3(s.state_sufficiency.residual) + std::string(s.state_sufficiency.pass ? " pass" : " FAIL")
                   : std::string("n/a");
        out += ", p2 ";
        out += s.entropy_inheritance.applicable
                   ? detail::sci3(s.entropy_inheritance.residual) + std::string(s.entropy_inheritance.pass ? " pass" : " FAIL")
                   : std::string("n/a");
        out += "\n";
        std::size_t failed = 0;
        for (const auto& d : s.derivation) {
            if (!d.pass) ++failed;
        }
        out += "  derivation: " + std::to_string(s.derivation.size()) + " steps, " +
               (failed == 0 ? "all pass" : std::to_string(failed) + " FAILED") + "\n";
        out += "  identities: max residual " + detail::sci3(s.identities.max_residual) +
               (s.identities.all_pass ? " (pass)" : " (FAIL)") + "\n";
        if (s.budget) {
            out += "  delta budget: delta " + detail::fixed6(s.budget->delta) + ", coupling " +
                   detail::fixed6(clamp_reported(s.budget->coupling)) + ", floor " +
                   detail::fixed6(clamp_reported(s.budget->required_floor));
            if (s.budget->infeasible) {
                out += " -> INFEASIBLE\n";
            } else {
                out += s.budget->within_budget ? " -> within budget\n" : " -> OVER BUDGET\n";
            }
        }
    }
    if (r.command == "sweep" && !r.steps.empty()) {
        auto range = [&](const char* label, auto field) {
            double lo = field(r.steps.front().measures);
            double hi = lo;
            for (const auto& s : r.steps) {
                lo = std::min(lo, field(s.measures));
                hi = std::max(hi, field(s.measures));
            }
            return std::string("  ") + label + " " + detail::fixed6(clamp_reported(lo)) + " .. " +
                   detail::fixed6(clamp_reported(hi)) + "\n";
        };
        out += "\nsummary (min .. max over steps)\n";
        out += range("info_closure         ", [](const ClosureMeasures& m) { return m.info_closure; });
        out += range("func_closure         ", [](const ClosureMeasures& m) { return m.func_closure; });
        out += range("env_coupling         ", [](const ClosureMeasures& m) { return m.env_coupling; });
        out += range("self_information     ", [](const ClosureMeasures& m) { return m.self_information; });
        out += range("next_entropy         ", [](const ClosureMeasures& m) { return m.next_entropy; });
        out += range("state_env_information", [](const ClosureMeasures& m) { return m.state_env_information; });
    }
    for (const auto& note : r.notes) out += "\nnote: " + note + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// fd reports

struct FdReport {
    std::string source;
    std::vector<std::string> input_names;
    std::string output_name;
    std::vector<MinimalInputSet> minimal_sets;
    std::optional<std::vector<std::string>> environment_inputs;
    std::optional<FunctionalClosureResult> closure;
    std::vector<std::string> notes;
};

inline FdReport build_fd_report(const std::string& source, const FunctionTable& table,
                                std::optional<std::vector<std::string>> environment_inputs,
                                MinimalSetOptions options = {}) {
    FdReport r;
    r.source = source;
    for (const auto& v : table.inputs()) r.input_names.push_back(v.name);
    r.output_name = table.output().name;
    r.minimal_sets = minimal_input_sets(table, options);
    if (environment_inputs) {
        std::vector<std::string> env = *environment_inputs;
        std::sort(env.begin(), env.end());
        r.environment_inputs = env;
        r.closure = is_functionally_closed(table, env, r.minimal_sets);
        r.notes.push_back(
            "the output-side condition (system outputs leaving the environment state unaffected) has no "
            "function-table encoding; evaluate it on a scenario embedding where the environment kernel ignores the "
            "context");
    }
    return r;
}

inline json fd_report_to_json(const FdReport& r) {
    json sets = json::array();
    for (const auto& s : r.minimal_sets) {
        sets.push_back(json{{"members", s.members}, {"excluded", s.excluded}, {"verification", s.verification}});
    }
    json out{{"tool", {{"name", kToolName}, {"version", kToolVersion}}},
             {"command", "fd"},
             {"table", {{"source", r.source}, {"inputs", r.input_names}, {"output", r.output_name}}},
             {"minimal_sets", sets},
             {"notes", r.notes}};
    if (r.environment_inputs) {
        json closed{{"environment_inputs", *r.environment_inputs}, {"closed", r.closure->closed}};
        if (r.closure->evidence) {
            closed["evidence"] = r.closure->evidence->members;
        }
        out["functional_closure"] = closed;
    }
    return out;
}

inline std::string fd_report_to_text(const FdReport& r) {
    std::string out;
    out += std::string(kToolName) + " fd (v" + kToolVersion + ")\n";
    out += "table: " + r.source + "\n";
    out += "output: " + r.output_name + "\n";
    out += "minimal determinant sets (" + std::to_string(r.minimal_sets.size()) + "):\n";
    for (const auto& s : r.minimal_sets) {
        out += "  {";
        for (std::size_t i = 0; i < s.members.size(); ++i) {
            if (i) out += ", ";
            out += s.members[i];
        }
        out += "}  (" + s.verification + ")\n";
    }
    if (r.environment_inputs) {
        out += "environment inputs: {";
        for (std::size_t i = 0; i < r.environment_inputs->size(); ++i) {
            if (i) out += ", ";
            out += (*r.environment_inputs)[i];
        }
        out += "}\n";
        if (r.closure->closed) {
            out += "functionally closed: yes, evidence {";
            for (std::size_t i = 0; i < r.closure->evidence->members.size(); ++i) {
                if (i) out += ", ";
                out += r.closure->evidence->members[i];
            }
            out += "}\n";
        } else {
            out += "functionally closed: no (every minimal set reads an environment input)\n";
        }
    }
    for (const auto& note : r.notes) out += "note: " + note + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// verify reports

struct IdentityAggregate {
    std::string name;
    double max_residual = 0.0;
    std::size_t failures = 0;
};

struct ScenarioCheckRecord {
    std::string scenario;
    std::size_t step = 0;
    std::string name;
    std::string kind;
    double value = 0.0;
    bool applicable = true;
    bool pass = true;
};

struct VerifyReport {
    std::uint64_t seed = 0;
    std::size_t cases = 0;
    double tolerance = kDefaultExactTolerance;
    std::vector<IdentityAggregate> identities;
    std::vector<ScenarioCheckRecord> scenario_checks;
    std::string fixture_source;  // empty when no fixture distribution was given
    bool all_pass = true;
};

/// Runs the seeded random-distribution identity battery plus the derivation
/// checks on the bundled scenarios; optionally folds one fixture distribution
/// into the battery.
inline VerifyReport run_verify_suite(std::uint64_t seed, std::size_t cases, double tolerance,
                                     const std::optional<JointDistribution>& fixture = std::nullopt,
                                     const std::string& fixture_source = "") {
    VerifyReport r;
    r.seed = seed;
    r.cases = cases;
    r.tolerance = tolerance;
    r.fixture_source = fixture_source;

    auto fold = [&](const IdentityReport& report) {
        for (const auto& entry : report.entries) {
            auto it = std::find_if(r.identities.begin(), r.identities.end(),
                                   [&](const IdentityAggregate& a) { return a.name == entry.name; });
            if (it == r.identities.end()) {
                r.identities.push_back({entry.name, 0.0, 0});
                it = r.identities.end() - 1;
            }
            it->max_residual = std::max(it->max_residual, std::abs(entry.residual));
            if (!entry.pass) {
                ++it->failures;
                r.all_pass = false;
            }
        }
    };

    auto battery = [&](const JointDistribution& dist) {
        VariableGroup x{dist.variables()[0].name};
        VariableGroup y{dist.variables()[1].name};
        VariableGroup z;
        for (std::size_t i = 2; i < dist.variable_count(); ++i) z.push_back(dist.variables()[i].name);
        fold(verify_identities(dist, x, y, z, tolerance));
    };

    for (std::size_t i = 0; i < cases; ++i) {
        battery(fixtures::random_distribution(seed + i));
    }
    if (fixture) battery(*fixture);

    for (const auto& name : builtin_scenario_names()) {
        MarkovScenario scenario = *builtin_scenario(name);
        for (std::size_t step : {0u, 1u, 2u}) {
            for (const auto& d : check_coupling_derivation(scenario, step, tolerance)) {
                ScenarioCheckRecord rec;
                rec.scenario = name;
                rec.step = step;
                rec.name = d.name;
                rec.kind = d.kind == StepKind::equality ? "equality" : "inequality";
                rec.value = d.value;
                rec.applicable = d.applicable;
                rec.pass = d.pass;
                if (!d.pass) r.all_pass = false;
                r.scenario_checks.push_back(std::move(rec));
            }
        }
    }
    return r;
}

inline json verify_report_to_json(const VerifyReport& r) {
    json identities = json::array();
    for (const auto& a : r.identities) {
        identities.push_back(json{{"name", a.name}, {"max_residual", a.max_residual}, {"failures", a.failures}});
    }
    json checks = json::array();
    for (const auto& c : r.scenario_checks) {
        checks.push_back(json{{"scenario", c.scenario},
                              {"step", c.step},
                              {"name", c.name},
                              {"kind", c.kind},
                              {"value", c.value},
                              {"applicable", c.applicable},
                              {"pass", c.pass}});
    }
    json out{{"tool", {{"name", kToolName}, {"version", kToolVersion}}},
             {"command", "verify"},
             {"seed", r.seed},
             {"cases", r.cases},
             {"tolerance", r.tolerance},
             {"identities", identities},
             {"scenario_checks", checks},
             {"all_pass", r.all_pass}};
    if (!r.fixture_source.empty()) out["fixture"] = r.fixture_source;
    return out;
}

inline std::string verify_report_to_text(const VerifyReport& r) {
    std::string out;
    out += std::string(kToolName) + " verify (v" + kToolVersion + ")\n";
    out += "cases: " + std::to_string(r.cases) + ", seed: " + std::to_string(r.seed) + ", tolerance: " +
           detail::general(r.tolerance) + " bits\n";
    if (!r.fixture_source.empty()) out += "fixture: " + r.fixture_source + "\n";
    out += "identity battery:\n";
    for (const auto& a : r.identities) {
        out += "  " + a.name + ": max residual " + detail::sci3(a.max_residual);
        out += a.failures == 0 ? " pass\n" : (" FAIL (" + std::to_string(a.failures) + " cases)\n");
    }
    out += "bundled scenario derivation checks:\n";
    std::size_t failed = 0;
    for (const auto& c : r.scenario_checks) {
        if (!c.pass) {
            ++failed;
            out += "  FAIL " + c.scenario + " step " + std::to_string(c.step) + " " + c.name + " = " +
                   detail::sci3(c.value) + "\n";
        }
    }
    if (failed == 0) {
        out += "  " + std::to_string(r.scenario_checks.size()) + " checks pass\n";
    }
    out += r.all_pass ? "result: PASS\n" : "result: FAIL\n";
    return out;
}

/// Canonical byte rendering of any report JSON: two-space indent, sorted keys
/// (object keys are stored sorted), trailing newline.
inline std::string render_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace closure::report
