#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "closure/estimation.hpp"
#include "closure/functional_closure.hpp"
#include "closure/probability.hpp"
#include "closure/system_model.hpp"

namespace closure::fixtures {

/// Deterministic fixture generators backing the verification suites. Every
/// generator is a pure function of its seed: same seed, same fixture,
/// regardless of platform.

namespace detail {

inline std::mt19937_64 engine(std::uint64_t seed) { return std::mt19937_64(closure::detail::splitmix64(seed)); }

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> mass(n);
    double total = 0.0;
    for (double& v : mass) {
        v = -std::log(1.0 - closure::detail::uniform01(rng));
        total += v;
    }
    for (double& v : mass) v /= total;
    return mass;
}

inline std::vector<std::string> symbols(std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back("a" + std::to_string(i));
    return out;
}

}  // namespace detail

struct DistributionSpec {
    std::size_t min_variables = 2;
    std::size_t max_variables = 4;
    std::size_t min_cardinality = 2;
    std::size_t max_cardinality = 5;
};

/// A fully supported random joint distribution with Dirichlet(1,...,1) mass.
inline JointDistribution random_distribution(std::uint64_t seed, DistributionSpec spec = {}) {
    auto rng = detail::engine(seed);
    std::size_t nvars = detail::pick(rng, spec.min_variables, spec.max_variables);
    std::vector<Variable> vars;
    std::size_t outcomes = 1;
    for (std::size_t i = 0; i < nvars; ++i) {
        std::size_t card = detail::pick(rng, spec.min_cardinality, spec.max_cardinality);
        vars.push_back({"v" + std::to_string(i), detail::symbols(card)});
        outcomes *= card;
    }
    return JointDistribution(std::move(vars), detail::random_simplex(rng, outcomes));
}

enum class ClosedScenarioKind {
    decoupled_context,      // context kernel constant in the environment
    deterministic_context,  // next context state a function of the current one
    mirrored_environment,   // decoupled context, environment copies the context
};

/// A randomly parameterized scenario that is informationally closed at every
/// step by construction.
inline MarkovScenario random_closed_scenario(std::uint64_t seed, ClosedScenarioKind kind) {
    auto rng = detail::engine(seed);
    std::size_t soi_card = detail::pick(rng, 2, 4);
    std::size_t inner_card = detail::pick(rng, 1, 2);
    std::size_t env_card = detail::pick(rng, 2, 4);
    SystemPartition partition({{"s", detail::symbols(soi_card)}},
                              {{"m", detail::symbols(inner_card)}},
                              {{"e", detail::symbols(env_card)}});
    std::size_t ctx_n = partition.context_outcomes();
    std::size_t env_n = partition.env_outcomes();
    std::size_t rows = ctx_n * env_n;

    std::vector<double> context(rows * ctx_n, 0.0);
    if (kind == ClosedScenarioKind::deterministic_context) {
        std::vector<std::size_t> map(ctx_n);
        for (auto& v : map) v = detail::pick(rng, 0, ctx_n - 1);
        for (std::size_t r = 0; r < rows; ++r) {
            context[r * ctx_n + map[r / env_n]] = 1.0;
        }
    } else {
        std::vector<std::vector<double>> per_state(ctx_n);
        for (auto& row : per_state) row = detail::random_simplex(rng, ctx_n);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < ctx_n; ++c) context[r * ctx_n + c] = per_state[r / env_n][c];
        }
    }

    std::vector<double> env(rows * env_n, 0.0);
    if (kind == ClosedScenarioKind::mirrored_environment) {
        for (std::size_t r = 0; r < rows; ++r) {
            env[r * env_n + (r / env_n) % env_n] = 1.0;
        }
    } else {
        for (std::size_t r = 0; r < rows; ++r) {
            std::vector<double> row = detail::random_simplex(rng, env_n);
            for (std::size_t c = 0; c < env_n; ++c) env[r * env_n + c] = row[c];
        }
    }

    JointDistribution initial(partition.universe(), detail::random_simplex(rng, rows));
    return MarkovScenario(std::move(partition), std::move(initial), TransitionKernel(rows, ctx_n, std::move(context)),
                          TransitionKernel(rows, env_n, std::move(env)));
}

struct FunctionTableSpec {
    std::size_t min_inputs = 2;
    std::size_t max_inputs = 12;
    std::size_t max_rows = 4096;
};

/// A random total function table. Half the draws plant a small determinant
/// subset (so minimal sets are interesting), the rest map rows independently.
inline FunctionTable random_function_table(std::uint64_t seed, FunctionTableSpec spec = {}) {
    auto rng = detail::engine(seed);
    std::size_t arity = detail::pick(rng, spec.min_inputs, spec.max_inputs);
    std::vector<Variable> inputs;
    std::size_t rows = 1;
    for (std::size_t i = 0; i < arity; ++i) {
        std::size_t card = detail::pick(rng, 2, 3);
        if (rows * card * 2 > spec.max_rows) card = 2;
        if (rows * card > spec.max_rows) card = 1;
        if (card == 1) {
            inputs.push_back({"x" + std::to_string(i), {"a0"}});
        } else {
            inputs.push_back({"x" + std::to_string(i), detail::symbols(card)});
        }
        rows *= card;
    }
    std::size_t out_card = detail::pick(rng, 2, 3);
    Variable output{"y", detail::symbols(out_card)};

    std::vector<std::size_t> table(rows);
    if (rng() % 2 == 0) {
        // plant a determinant subset of up to three inputs
        std::size_t subset_size = detail::pick(rng, 1, std::min<std::size_t>(3, arity));
        std::vector<std::size_t> positions;
        while (positions.size() < subset_size) {
            std::size_t p = detail::pick(rng, 0, arity - 1);
            if (std::find(positions.begin(), positions.end(), p) == positions.end()) positions.push_back(p);
        }
        std::size_t key_range = 1;
        for (std::size_t p : positions) key_range *= inputs[p].cardinality();
        std::vector<std::size_t> g(key_range);
        for (auto& v : g) v = detail::pick(rng, 0, out_card - 1);

        std::vector<std::size_t> strides(arity, 1);
        for (std::size_t i = arity; i-- > 1;) strides[i - 1] = strides[i] * inputs[i].cardinality();
        for (std::size_t r = 0; r < rows; ++r) {
            std::size_t key = 0;
            for (std::size_t p : positions) {
                key = key * inputs[p].cardinality() + (r / strides[p]) % inputs[p].cardinality();
            }
            table[r] = g[key];
        }
    } else {
        for (auto& v : table) v = detail::pick(rng, 0, out_card - 1);
    }
    return FunctionTable(std::move(inputs), std::move(output), std::move(table));
}

/// A product initial distribution (context independent of environment) for a
/// partition, with random marginals on both blocks.
inline JointDistribution random_product_initial(std::uint64_t seed, const SystemPartition& partition) {
    auto rng = detail::engine(seed);
    std::size_t ctx_n = partition.context_outcomes();
    std::size_t env_n = partition.env_outcomes();
    std::vector<double> ctx = detail::random_simplex(rng, ctx_n);
    std::vector<double> env = detail::random_simplex(rng, env_n);
    std::vector<double> mass(ctx_n * env_n);
    for (std::size_t s = 0; s < ctx_n; ++s) {
        for (std::size_t e = 0; e < env_n; ++e) mass[s * env_n + e] = ctx[s] * env[e];
    }
    return JointDistribution(partition.universe(), std::move(mass));
}

}  // namespace closure::fixtures
