#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "closure/closure_analysis.hpp"
#include "closure/estimation.hpp"
#include "closure/io.hpp"
#include "closure/report.hpp"
#include "closure/scenarios.hpp"

namespace {

constexpr int kExitClosed = 0;
constexpr int kExitError = 1;
constexpr int kExitOpen = 3;

std::string default_format() {
    const char* env = std::getenv("CLOSURE_FORMAT");
    if (env != nullptr) {
        std::string value = env;
        if (value == "json" || value == "text") return value;
    }
    return "text";
}

void write_output(const std::string& payload, const std::string& output_path) {
    if (output_path.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream out(output_path, std::ios::binary);
    if (!out) throw closure::SchemaError(output_path + ": cannot open for writing");
    out << payload;
}

closure::MarkovScenario resolve_scenario(const std::string& source) {
    if (auto builtin = closure::builtin_scenario(source)) return std::move(*builtin);
    return closure::io::load_scenario(source);
}

std::vector<std::string> split_names(const std::string& csv) {
    std::vector<std::string> names;
    std::string field;
    std::istringstream in(csv);
    while (std::getline(in, field, ',')) {
        if (!field.empty()) names.push_back(field);
    }
    return names;
}

std::pair<std::size_t, std::size_t> parse_step_range(const std::string& text) {
    auto sep = text.find("..");
    if (sep == std::string::npos) {
        throw closure::ArgumentError("step range must be of the form A..B, got '" + text + "'");
    }
    std::size_t first = closure::io::detail::parse_u64(text.substr(0, sep), "step range");
    std::size_t last = closure::io::detail::parse_u64(text.substr(sep + 2), "step range");
    if (last < first) throw closure::ArgumentError("step range '" + text + "' is empty");
    return {first, last};
}

struct CommonOptions {
    std::string format = default_format();
    std::string output;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--format", opts.format, "report format: text or json")
        ->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--output", opts.output, "write the report to a file instead of stdout");
}

int emit_closure_report(const closure::report::ClosureReport& report, const CommonOptions& opts) {
    if (opts.format == "json") {
        write_output(closure::report::render_json(closure::report::closure_report_to_json(report)), opts.output);
    } else {
        write_output(closure::report::closure_report_to_text(report), opts.output);
    }
    for (const auto& step : report.steps) {
        if (!step.verdict.informationally_closed) return kExitOpen;
    }
    return kExitClosed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"closure analysis of coupled finite-state stochastic systems"};
    app.require_subcommand(1);

    // analyze ---------------------------------------------------------------
    auto* analyze = app.add_subcommand("analyze", "closure measures and checks at one step");
    std::string analyze_scenario;
    std::string analyze_trajectories;
    std::size_t analyze_step_n = 0;
    double analyze_tolerance = 0.0;
    double analyze_delta = -1.0;
    std::string analyze_estimator = "plug_in";
    CommonOptions analyze_opts;
    auto* analyze_scn = analyze->add_option("--scenario", analyze_scenario,
                                            "scenario file, or builtin: copy, decoupled, driven");
    auto* analyze_trj = analyze->add_option("--trajectories", analyze_trajectories, "trajectory CSV (empirical pipeline)");
    analyze_scn->excludes(analyze_trj);
    analyze->add_option("--step", analyze_step_n, "state index n")->required();
    auto* analyze_tol = analyze->add_option("--tolerance", analyze_tolerance, "closure tolerance in bits");
    analyze->add_option("--delta", analyze_delta, "coupling budget in bits");
    analyze->add_option("--estimator", analyze_estimator, "empirical estimator")
        ->check(CLI::IsMember({"plug_in", "miller_madow"}));
    add_common(analyze, analyze_opts);

    // sweep -----------------------------------------------------------------
    auto* sweep = app.add_subcommand("sweep", "closure measures over a step range");
    std::string sweep_scenario;
    std::string sweep_steps;
    double sweep_tolerance = 0.0;
    double sweep_delta = -1.0;
    CommonOptions sweep_opts;
    sweep->add_option("--scenario", sweep_scenario, "scenario file or builtin name")->required();
    sweep->add_option("--steps", sweep_steps, "inclusive step range A..B")->required();
    auto* sweep_tol = sweep->add_option("--tolerance", sweep_tolerance, "closure tolerance in bits");
    sweep->add_option("--delta", sweep_delta, "coupling budget in bits");
    add_common(sweep, sweep_opts);

    // sample ----------------------------------------------------------------
    auto* sample_cmd = app.add_subcommand("sample", "draw seeded trajectories to CSV");
    std::string sample_scenario;
    std::size_t sample_count = 0;
    std::size_t sample_horizon = 0;
    std::uint64_t sample_seed = 0;
    CommonOptions sample_opts;
    sample_cmd->add_option("--scenario", sample_scenario, "scenario file or builtin name")->required();
    sample_cmd->add_option("--count", sample_count, "number of trajectories")->required();
    sample_cmd->add_option("--horizon", sample_horizon, "steps per trajectory")->required();
    sample_cmd->add_option("--seed", sample_seed, "RNG seed")->required();
    sample_cmd->add_option("--output", sample_opts.output, "write the CSV to a file instead of stdout");

    // fd --------------------------------------------------------------------
    auto* fd = app.add_subcommand("fd", "functional dependency and minimal determinant sets");
    std::string fd_table;
    std::string fd_env;
    CommonOptions fd_opts;
    fd->add_option("--table", fd_table, "function table CSV")->required();
    auto* fd_env_opt = fd->add_option("--env-inputs", fd_env, "comma-separated environment input names");
    add_common(fd, fd_opts);

    // verify ----------------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "run the seeded identity and derivation suites");
    std::uint64_t verify_seed = 20240815;
    std::size_t verify_cases = 500;
    double verify_tolerance = closure::kDefaultExactTolerance;
    std::string verify_fixture;
    CommonOptions verify_opts;
    verify->add_option("--seed", verify_seed, "suite seed");
    verify->add_option("--count", verify_cases, "number of random distributions");
    verify->add_option("--tolerance", verify_tolerance, "residual tolerance in bits");
    verify->add_option("--distribution", verify_fixture, "distribution JSON to fold into the battery");
    add_common(verify, verify_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitError;
    }

    try {
        if (*analyze) {
            std::optional<double> delta;
            if (analyze->count("--delta") > 0) delta = analyze_delta;
            if (*analyze_trj) {
                double tolerance = analyze_tol->count() > 0 ? analyze_tolerance : closure::kDefaultEmpiricalTolerance;
                closure::TrajectorySet traj = closure::io::load_trajectories(analyze_trajectories);
                closure::Estimator estimator = analyze_estimator == "miller_madow"
                                                   ? closure::Estimator::miller_madow
                                                   : closure::Estimator::plug_in;
                closure::EmpiricalJoint emp = closure::empirical_closure_joint(traj, analyze_step_n, estimator);
                closure::StepAnalysis analysis = closure::analyze_empirical(emp, analyze_step_n, tolerance, delta);
                closure::report::EstimationInfo info{estimator, emp.sample_size, traj.rng_algorithm};
                auto report = closure::report::build_closure_report(
                    "analyze", analyze_trajectories, traj.scenario_fingerprint, "empirical", tolerance, delta,
                    {analysis}, info);
                return emit_closure_report(report, analyze_opts);
            }
            if (!*analyze_scn) throw closure::ArgumentError("analyze needs --scenario or --trajectories");
            double tolerance = analyze_tol->count() > 0 ? analyze_tolerance : closure::kDefaultExactTolerance;
            closure::MarkovScenario scenario = resolve_scenario(analyze_scenario);
            closure::StepAnalysis analysis = closure::analyze_step(scenario, analyze_step_n, tolerance, delta);
            auto report = closure::report::build_closure_report("analyze", analyze_scenario,
                                                                closure::io::fingerprint(scenario), "exact",
                                                                tolerance, delta, {analysis});
            return emit_closure_report(report, analyze_opts);
        }

        if (*sweep) {
            std::optional<double> delta;
            if (sweep->count("--delta") > 0) delta = sweep_delta;
            double tolerance = sweep_tol->count() > 0 ? sweep_tolerance : closure::kDefaultExactTolerance;
            auto [first, last] = parse_step_range(sweep_steps);
            closure::MarkovScenario scenario = resolve_scenario(sweep_scenario);
            std::vector<closure::StepAnalysis> steps;
            for (std::size_t n = first; n <= last; ++n) {
                steps.push_back(closure::analyze_step(scenario, n, tolerance, delta));
            }
            auto report = closure::report::build_closure_report("sweep", sweep_scenario,
                                                                closure::io::fingerprint(scenario), "exact",
                                                                tolerance, delta, std::move(steps));
            return emit_closure_report(report, sweep_opts);
        }

        if (*sample_cmd) {
            closure::MarkovScenario scenario = resolve_scenario(sample_scenario);
            closure::TrajectorySet traj = closure::sample(scenario, sample_count, sample_horizon, sample_seed);
            traj.scenario_fingerprint = closure::io::fingerprint(scenario);
            std::ostringstream csv;
            closure::io::write_trajectories_csv(csv, traj);
            write_output(csv.str(), sample_opts.output);
            return kExitClosed;
        }

        if (*fd) {
            closure::FunctionTable table = closure::io::load_function_table(fd_table);
            std::optional<std::vector<std::string>> env;
            if (*fd_env_opt) env = split_names(fd_env);
            closure::report::FdReport report = closure::report::build_fd_report(fd_table, table, env);
            if (fd_opts.format == "json") {
                write_output(closure::report::render_json(closure::report::fd_report_to_json(report)), fd_opts.output);
            } else {
                write_output(closure::report::fd_report_to_text(report), fd_opts.output);
            }
            if (report.closure && !report.closure->closed) return kExitOpen;
            return kExitClosed;
        }

        if (*verify) {
            std::optional<closure::JointDistribution> fixture;
            if (!verify_fixture.empty()) fixture = closure::io::load_distribution(verify_fixture);
            closure::report::VerifyReport report =
                closure::report::run_verify_suite(verify_seed, verify_cases, verify_tolerance, fixture, verify_fixture);
            if (verify_opts.format == "json") {
                write_output(closure::report::render_json(closure::report::verify_report_to_json(report)),
                             verify_opts.output);
            } else {
                write_output(closure::report::verify_report_to_text(report), verify_opts.output);
            }
            return report.all_pass ? kExitClosed : kExitOpen;
        }
    } catch (const closure::Error& e) {
        std::cerr << "closure: error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "closure: unexpected error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
