#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "closure/estimation.hpp"
#include "closure/functional_closure.hpp"
#include "closure/probability.hpp"
#include "closure/system_model.hpp"

namespace closure::io {

using nlohmann::json;

/// Normalization slack accepted from files before exact renormalization.
inline constexpr double kFileMassTolerance = 1e-9;

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(path + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline json parse_json(const std::string& text, const std::string& context) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw SchemaError(context + ": not valid JSON");
    return j;
}

inline const json& require(const json& j, const char* key, const std::string& context) {
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(context + ": missing key '" + key + "'");
    return *it;
}

inline std::vector<std::string> string_list(const json& j, const std::string& context) {
    if (!j.is_array()) throw SchemaError(context + ": expected an array");
    std::vector<std::string> out;
    for (const auto& item : j) {
        if (!item.is_string()) throw SchemaError(context + ": expected strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

inline std::uint64_t parse_u64(const std::string& text, const std::string& context) {
    try {
        std::size_t consumed = 0;
        std::uint64_t value = std::stoull(text, &consumed);
        if (consumed != text.size()) throw SchemaError(context + ": '" + text + "' is not an integer");
        return value;
    } catch (const std::logic_error&) {
        throw SchemaError(context + ": '" + text + "' is not an integer");
    }
}

inline void check_label(const std::string& label, const std::string& context) {
    if (label.empty()) throw SchemaError(context + ": empty symbol");
    if (label.find(',') != std::string::npos || label.find('\n') != std::string::npos) {
        throw SchemaError(context + ": symbol '" + label + "' contains a separator character");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// variables and distributions

inline json variable_to_json(const Variable& v) { return json{{"name", v.name}, {"alphabet", v.alphabet}}; }

inline Variable variable_from_json(const json& j, const std::string& context) {
    Variable v;
    v.name = detail::require(j, "name", context).get<std::string>();
    v.alphabet = detail::string_list(detail::require(j, "alphabet", context), context + ".alphabet");
    v.validate();
    return v;
}

inline json distribution_to_json(const JointDistribution& dist) {
    json vars = json::array();
    for (const auto& v : dist.variables()) vars.push_back(variable_to_json(v));
    json mass = json::array();
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist.masses()[i] == 0.0) continue;
        mass.push_back(json{{"outcome", dist.outcome_labels(i)}, {"p", dist.masses()[i]}});
    }
    return json{{"variables", vars}, {"mass", mass}};
}

/// Reads a sparse mass table over given variables; unlisted outcomes are zero,
/// duplicate outcomes are rejected, and the total may deviate from one by at
/// most kFileMassTolerance before exact renormalization.
inline std::vector<double> mass_table_from_json(const json& j, const std::vector<Variable>& variables,
                                                const std::string& context) {
    std::size_t n = 1;
    for (const auto& v : variables) n *= v.cardinality();
    std::vector<double> mass(n, 0.0);
    std::vector<bool> seen(n, false);
    if (!j.is_array()) throw SchemaError(context + ": expected an array of {outcome, p}");

    JointDistribution indexer = JointDistribution::uniform(variables);
    for (const auto& entry : j) {
        auto labels = detail::string_list(detail::require(entry, "outcome", context), context + ".outcome");
        const json& p = detail::require(entry, "p", context);
        if (!p.is_number()) throw SchemaError(context + ": probability must be a number");
        std::size_t index = 0;
        try {
            index = indexer.index_of(labels);
        } catch (const Error& e) {
            throw SchemaError(context + ": " + e.what());
        }
        if (seen[index]) throw SchemaError(context + ": duplicate outcome entry");
        seen[index] = true;
        double value = p.get<double>();
        if (value < 0.0) throw SchemaError(context + ": negative probability");
        mass[index] = value;
    }
    double total = 0.0;
    for (double v : mass) total += v;
    if (std::abs(total - 1.0) > kFileMassTolerance) {
        throw SchemaError(context + ": probabilities sum to " + std::to_string(total));
    }
    for (double& v : mass) v /= total;
    return mass;
}

inline JointDistribution distribution_from_json(const json& j, const std::string& context) {
    const json& vars_json = detail::require(j, "variables", context);
    if (!vars_json.is_array() || vars_json.empty()) throw SchemaError(context + ": 'variables' must be a non-empty array");
    std::vector<Variable> variables;
    for (const auto& vj : vars_json) variables.push_back(variable_from_json(vj, context + ".variables"));
    std::vector<double> mass = mass_table_from_json(detail::require(j, "mass", context), variables, context + ".mass");
    return JointDistribution(std::move(variables), std::move(mass));
}

inline JointDistribution load_distribution(const std::string& path) {
    return distribution_from_json(detail::parse_json(detail::read_file(path), path), path);
}

// ---------------------------------------------------------------------------
// scenarios

namespace detail {

inline json kernel_to_json(const TransitionKernel& kernel, const JointDistribution& given_indexer,
                           const JointDistribution& next_indexer) {
    json rows = json::array();
    for (std::size_t r = 0; r < kernel.rows(); ++r) {
        json next = json::array();
        for (std::size_t c = 0; c < kernel.cols(); ++c) {
            if (kernel.at(r, c) == 0.0) continue;
            next.push_back(json{{"outcome", next_indexer.outcome_labels(c)}, {"p", kernel.at(r, c)}});
        }
        rows.push_back(json{{"given", given_indexer.outcome_labels(r)}, {"next", next}});
    }
    return rows;
}

inline TransitionKernel kernel_from_json(const json& j, const JointDistribution& given_indexer,
                                         const JointDistribution& next_indexer, const std::string& context) {
    if (!j.is_array()) throw SchemaError(context + ": expected an array of rows");
    std::size_t rows = given_indexer.size();
    std::size_t cols = next_indexer.size();
    std::vector<double> table(rows * cols, 0.0);
    std::vector<bool> seen(rows, false);
    try {
        for (const auto& row : j) {
            auto given = string_list(require(row, "given", context), context + ".given");
            std::size_t r = given_indexer.index_of(given);
            if (seen[r]) throw SchemaError(context + ": duplicate row for one conditioning outcome");
            seen[r] = true;
            const json& next = require(row, "next", context);
            if (!next.is_array()) throw SchemaError(context + ": 'next' must be an array");
            for (const auto& entry : next) {
                auto outcome = string_list(require(entry, "outcome", context), context + ".outcome");
                const json& p = require(entry, "p", context);
                if (!p.is_number()) throw SchemaError(context + ": probability must be a number");
                table[r * cols + next_indexer.index_of(outcome)] = p.get<double>();
            }
        }
    } catch (const SchemaError&) {
        throw;
    } catch (const Error& e) {
        throw SchemaError(context + ": " + e.what());
    }
    for (std::size_t r = 0; r < rows; ++r) {
        if (!seen[r]) throw SchemaError(context + ": missing row for conditioning outcome '" +
                                        [&] {
                                            std::string s;
                                            for (const auto& l : given_indexer.outcome_labels(r)) {
                                                if (!s.empty()) s += " ";
                                                s += l;
                                            }
                                            return s;
                                        }() + "'");
    }
    try {
        return TransitionKernel(rows, cols, std::move(table));
    } catch (const ArgumentError& e) {
        throw SchemaError(context + ": " + e.what());
    }
}

}  // namespace detail

inline json scenario_to_json(const MarkovScenario& scenario) {
    const SystemPartition& p = scenario.partition();
    json soi = json::array();
    for (const auto& v : p.soi()) soi.push_back(variable_to_json(v));
    json inner = json::array();
    for (const auto& v : p.inner_env()) inner.push_back(variable_to_json(v));
    json outer = json::array();
    for (const auto& v : p.outer_env()) outer.push_back(variable_to_json(v));

    JointDistribution universe_indexer = JointDistribution::uniform(p.universe());
    JointDistribution context_indexer = JointDistribution::uniform(p.context());
    json out{{"partition", json{{"soi", soi}, {"inner_env", inner}, {"outer_env", outer}}},
             {"initial", distribution_to_json(scenario.initial())["mass"]},
             {"context_kernel", detail::kernel_to_json(scenario.context_kernel(), universe_indexer, context_indexer)}};
    if (!p.outer_env().empty()) {
        JointDistribution env_indexer = JointDistribution::uniform(p.outer_env());
        out["env_kernel"] = detail::kernel_to_json(scenario.env_kernel(), universe_indexer, env_indexer);
    }
    if (scenario.has_factored_context()) {
        if (p.soi().empty()) throw SchemaError("factored scenario without system-of-interest variables");
        JointDistribution soi_indexer = JointDistribution::uniform(p.soi());
        JointDistribution inner_indexer = JointDistribution::uniform(p.inner_env());
        out["factored_context"] =
            json{{"soi_kernel",
                  detail::kernel_to_json(scenario.factored_context().soi_next, universe_indexer, soi_indexer)},
                 {"inner_env_kernel", detail::kernel_to_json(scenario.factored_context().inner_env_next,
                                                             universe_indexer, inner_indexer)}};
    }
    return out;
}

inline MarkovScenario scenario_from_json(const json& j, const std::string& context, ScenarioLimits limits = {}) {
    static const std::vector<std::string> known_keys = {"partition", "initial", "context_kernel", "env_kernel",
                                                        "factored_context"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known_keys.begin(), known_keys.end(), key) == known_keys.end()) {
            throw SchemaError(context + ": unknown key '" + key + "'");
        }
    }
    const json& pj = detail::require(j, "partition", context);
    auto block = [&](const char* key) {
        std::vector<Variable> vars;
        auto it = pj.find(key);
        if (it == pj.end()) return vars;
        if (!it->is_array()) throw SchemaError(context + ": partition." + key + " must be an array");
        for (const auto& vj : *it) vars.push_back(variable_from_json(vj, context + ".partition." + key));
        return vars;
    };
    SystemPartition partition(block("soi"), block("inner_env"), block("outer_env"));

    JointDistribution initial(partition.universe(),
                              mass_table_from_json(detail::require(j, "initial", context), partition.universe(),
                                                   context + ".initial"));

    JointDistribution universe_indexer = JointDistribution::uniform(partition.universe());
    JointDistribution context_indexer = JointDistribution::uniform(partition.context());

    std::optional<TransitionKernel> env_kernel;
    if (partition.outer_env().empty()) {
        env_kernel = TransitionKernel(universe_indexer.size(), 1,
                                      std::vector<double>(universe_indexer.size(), 1.0));
    } else {
        JointDistribution env_indexer = JointDistribution::uniform(partition.outer_env());
        env_kernel = detail::kernel_from_json(detail::require(j, "env_kernel", context), universe_indexer,
                                              env_indexer, context + ".env_kernel");
    }

    std::optional<FactoredContextKernel> factored;
    if (auto it = j.find("factored_context"); it != j.end()) {
        if (partition.soi().empty()) {
            throw SchemaError(context + ": factored_context requires system-of-interest variables");
        }
        JointDistribution soi_indexer = JointDistribution::uniform(partition.soi());
        JointDistribution inner_indexer = JointDistribution::uniform(partition.inner_env());
        factored = FactoredContextKernel{
            detail::kernel_from_json(detail::require(*it, "soi_kernel", context), universe_indexer, soi_indexer,
                                     context + ".factored_context.soi_kernel"),
            detail::kernel_from_json(detail::require(*it, "inner_env_kernel", context), universe_indexer,
                                     inner_indexer, context + ".factored_context.inner_env_kernel")};
    }

    std::optional<TransitionKernel> context_kernel;
    if (auto it = j.find("context_kernel"); it != j.end()) {
        context_kernel = detail::kernel_from_json(*it, universe_indexer, context_indexer, context + ".context_kernel");
    } else if (factored) {
        context_kernel = MarkovScenario::compose_context(partition, *factored);
    } else {
        throw SchemaError(context + ": needs 'context_kernel' or 'factored_context'");
    }

    try {
        return MarkovScenario(std::move(partition), std::move(initial), std::move(*context_kernel),
                              std::move(*env_kernel), std::move(factored), limits);
    } catch (const Error& e) {
        throw SchemaError(context + ": " + e.what());
    }
}

inline MarkovScenario load_scenario(const std::string& path, ScenarioLimits limits = {}) {
    return scenario_from_json(detail::parse_json(detail::read_file(path), path), path, limits);
}

// ---------------------------------------------------------------------------
// fingerprints

namespace detail {

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

inline std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (std::size_t i = 16; i-- > 0;) {
        out[i] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

}  // namespace detail

/// Content hash of the canonicalized scenario JSON (sorted keys, nonzero
/// entries in index order).
inline std::string fingerprint(const MarkovScenario& scenario) {
    return detail::hex64(detail::fnv1a64(scenario_to_json(scenario).dump()));
}

// ---------------------------------------------------------------------------
// function tables (CSV)

/// Header row: input names then the output name; one data row per input
/// tuple. Alphabets are the sorted distinct symbols of each column; totality
/// is strict (every tuple exactly once).
inline FunctionTable function_table_from_csv(std::istream& in, const std::string& context) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(context + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = detail::split(line, ',');
    if (header.size() < 2) throw SchemaError(context + ": header needs at least one input and the output");

    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = detail::split(line, ',');
        if (fields.size() != header.size()) {
            throw SchemaError(context + ": row " + std::to_string(rows.size() + 2) + " has " +
                              std::to_string(fields.size()) + " fields, header has " +
                              std::to_string(header.size()));
        }
        rows.push_back(std::move(fields));
    }
    if (rows.empty()) throw SchemaError(context + ": no data rows");

    std::size_t arity = header.size() - 1;
    auto column_alphabet = [&](std::size_t col) {
        std::vector<std::string> symbols;
        for (const auto& r : rows) {
            detail::check_label(r[col], context);
            if (std::find(symbols.begin(), symbols.end(), r[col]) == symbols.end()) symbols.push_back(r[col]);
        }
        std::sort(symbols.begin(), symbols.end());
        return symbols;
    };

    std::vector<Variable> inputs;
    std::size_t expected_rows = 1;
    for (std::size_t i = 0; i < arity; ++i) {
        inputs.push_back({header[i], column_alphabet(i)});
        expected_rows *= inputs.back().cardinality();
    }
    Variable output{header[arity], column_alphabet(arity)};

    if (rows.size() != expected_rows) {
        throw SchemaError(context + ": table is not total: " + std::to_string(rows.size()) + " rows, input space has " +
                          std::to_string(expected_rows));
    }

    JointDistribution indexer = JointDistribution::uniform(inputs);
    std::vector<std::size_t> values(expected_rows, 0);
    std::vector<bool> seen(expected_rows, false);
    for (const auto& r : rows) {
        std::vector<std::string> labels(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(arity));
        std::size_t index = indexer.index_of(labels);
        if (seen[index]) throw SchemaError(context + ": duplicate input tuple");
        seen[index] = true;
        values[index] = output.symbol_index(r[arity]);
    }
    try {
        return FunctionTable(std::move(inputs), std::move(output), std::move(values));
    } catch (const Error& e) {
        throw SchemaError(context + ": " + e.what());
    }
}

inline FunctionTable load_function_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(path + ": cannot open file");
    return function_table_from_csv(in, path);
}

// ---------------------------------------------------------------------------
// trajectories (CSV)

/// Columns: trajectory_id, step, context variables prefixed "sc:", then
/// environment variables prefixed "eo:". A leading comment line carries the
/// sampling metadata.
inline void write_trajectories_csv(std::ostream& out, const TrajectorySet& traj) {
    out << "# closure-trajectories v1";
    if (!traj.rng_algorithm.empty()) out << " rng=" << traj.rng_algorithm << " seed=" << traj.seed;
    if (!traj.scenario_fingerprint.empty()) out << " fingerprint=" << traj.scenario_fingerprint;
    out << "\n";
    out << "trajectory_id,step";
    for (const auto& v : traj.context_vars) {
        detail::check_label(v.name, "trajectory header");
        out << ",sc:" << v.name;
    }
    for (const auto& v : traj.env_vars) {
        detail::check_label(v.name, "trajectory header");
        out << ",eo:" << v.name;
    }
    out << "\n";

    JointDistribution ctx_indexer = JointDistribution::uniform(traj.context_vars);
    std::optional<JointDistribution> env_indexer;
    if (!traj.env_vars.empty()) env_indexer = JointDistribution::uniform(traj.env_vars);
    for (std::size_t t = 0; t < traj.count; ++t) {
        for (std::size_t k = 0; k <= traj.horizon; ++k) {
            out << t << "," << k;
            for (const auto& label : ctx_indexer.outcome_labels(traj.context_state(t, k))) out << "," << label;
            if (env_indexer) {
                for (const auto& label : env_indexer->outcome_labels(traj.env_state(t, k))) out << "," << label;
            }
            out << "\n";
        }
    }
}

inline TrajectorySet trajectories_from_csv(std::istream& in, const std::string& context) {
    TrajectorySet traj;
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(context + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '#') {
        std::istringstream meta(line.substr(1));
        std::string token;
        while (meta >> token) {
            if (token.rfind("seed=", 0) == 0) traj.seed = detail::parse_u64(token.substr(5), context);
            if (token.rfind("rng=", 0) == 0) traj.rng_algorithm = token.substr(4);
            if (token.rfind("fingerprint=", 0) == 0) traj.scenario_fingerprint = token.substr(12);
        }
        if (!std::getline(in, line)) throw SchemaError(context + ": missing header row");
        if (!line.empty() && line.back() == '\r') line.pop_back();
    }

    std::vector<std::string> header = detail::split(line, ',');
    if (header.size() < 3 || header[0] != "trajectory_id" || header[1] != "step") {
        throw SchemaError(context + ": header must start with trajectory_id,step");
    }
    std::vector<std::string> ctx_names;
    std::vector<std::string> env_names;
    for (std::size_t i = 2; i < header.size(); ++i) {
        if (header[i].rfind("sc:", 0) == 0) {
            if (!env_names.empty()) throw SchemaError(context + ": context columns must precede environment columns");
            ctx_names.push_back(header[i].substr(3));
        } else if (header[i].rfind("eo:", 0) == 0) {
            env_names.push_back(header[i].substr(3));
        } else {
            throw SchemaError(context + ": column '" + header[i] + "' must be prefixed sc: or eo:");
        }
    }
    if (ctx_names.empty()) throw SchemaError(context + ": needs at least one sc: column");

    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = detail::split(line, ',');
        if (fields.size() != header.size()) throw SchemaError(context + ": ragged row");
        rows.push_back(std::move(fields));
    }
    if (rows.empty()) throw SchemaError(context + ": no data rows");

    // alphabets: sorted distinct symbols per column
    auto alphabet_of = [&](std::size_t col) {
        std::vector<std::string> symbols;
        for (const auto& r : rows) {
            if (std::find(symbols.begin(), symbols.end(), r[col]) == symbols.end()) symbols.push_back(r[col]);
        }
        std::sort(symbols.begin(), symbols.end());
        return symbols;
    };
    for (std::size_t i = 0; i < ctx_names.size(); ++i) traj.context_vars.push_back({ctx_names[i], alphabet_of(2 + i)});
    for (std::size_t i = 0; i < env_names.size(); ++i) {
        traj.env_vars.push_back({env_names[i], alphabet_of(2 + ctx_names.size() + i)});
    }

    // contiguous steps 0..horizon per trajectory, in file order
    std::size_t per_path = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i][0] != rows[0][0]) {
            per_path = i;
            break;
        }
    }
    if (per_path == 0) per_path = rows.size();
    if (per_path < 2 || rows.size() % per_path != 0) {
        throw SchemaError(context + ": trajectories must have two or more steps and identical horizons");
    }
    traj.count = rows.size() / per_path;
    traj.horizon = per_path - 1;

    JointDistribution ctx_indexer = JointDistribution::uniform(traj.context_vars);
    std::optional<JointDistribution> env_indexer;
    if (!traj.env_vars.empty()) env_indexer = JointDistribution::uniform(traj.env_vars);
    traj.context_states.resize(rows.size());
    traj.env_states.assign(rows.size(), 0);
    for (std::size_t t = 0; t < traj.count; ++t) {
        for (std::size_t k = 0; k < per_path; ++k) {
            const auto& r = rows[t * per_path + k];
            if (r[0] != rows[t * per_path][0]) throw SchemaError(context + ": trajectories must have identical horizons");
            if (detail::parse_u64(r[1], context) != k) {
                throw SchemaError(context + ": trajectory " + r[0] + " steps must be contiguous from 0");
            }
            std::vector<std::string> ctx_labels(r.begin() + 2, r.begin() + 2 + static_cast<std::ptrdiff_t>(ctx_names.size()));
            traj.context_states[t * per_path + k] = static_cast<std::uint32_t>(ctx_indexer.index_of(ctx_labels));
            if (env_indexer) {
                std::vector<std::string> env_labels(r.begin() + 2 + static_cast<std::ptrdiff_t>(ctx_names.size()),
                                                    r.end());
                traj.env_states[t * per_path + k] = static_cast<std::uint32_t>(env_indexer->index_of(env_labels));
            }
        }
    }
    return traj;
}

inline TrajectorySet load_trajectories(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(path + ": cannot open file");
    return trajectories_from_csv(in, path);
}

}  // namespace closure::io
