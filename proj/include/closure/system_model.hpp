#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "closure/info_measures.hpp"
#include "closure/probability.hpp"

namespace closure {

/// Partition of the modeled universe: the system of interest, the inner
/// environment bundled with it into the context system, and the outer
/// environment everything else belongs to. The context system is
/// soi + inner_env; the universe is all three blocks together.
class SystemPartition {
public:
    SystemPartition(std::vector<Variable> soi, std::vector<Variable> inner_env, std::vector<Variable> outer_env)
        : soi_(std::move(soi)), inner_env_(std::move(inner_env)), outer_env_(std::move(outer_env)) {
        validate();
    }

    const std::vector<Variable>& soi() const { return soi_; }
    const std::vector<Variable>& inner_env() const { return inner_env_; }
    const std::vector<Variable>& outer_env() const { return outer_env_; }

    std::vector<Variable> context() const {
        std::vector<Variable> vars = soi_;
        vars.insert(vars.end(), inner_env_.begin(), inner_env_.end());
        return vars;
    }

    std::vector<Variable> universe() const {
        std::vector<Variable> vars = context();
        vars.insert(vars.end(), outer_env_.begin(), outer_env_.end());
        return vars;
    }

    VariableGroup soi_names() const { return names_of(soi_); }
    VariableGroup inner_env_names() const { return names_of(inner_env_); }
    VariableGroup outer_env_names() const { return names_of(outer_env_); }
    VariableGroup context_names() const { return names_of(context()); }

    std::size_t soi_outcomes() const { return outcomes_of(soi_); }
    std::size_t inner_env_outcomes() const { return outcomes_of(inner_env_); }
    std::size_t context_outcomes() const { return outcomes_of(context()); }
    std::size_t env_outcomes() const { return outcomes_of(outer_env_); }

private:
    static VariableGroup names_of(const std::vector<Variable>& vars) {
        VariableGroup names;
        names.reserve(vars.size());
        for (const auto& v : vars) names.push_back(v.name);
        return names;
    }

    static std::size_t outcomes_of(const std::vector<Variable>& vars) {
        std::size_t n = 1;
        for (const auto& v : vars) n *= v.cardinality();
        return n;
    }

    void validate() const {
        if (inner_env_.empty()) throw ArgumentError("inner environment must contain at least one variable");
        std::vector<Variable> all = universe();
        for (std::size_t i = 0; i < all.size(); ++i) {
            all[i].validate();
            for (std::size_t j = i + 1; j < all.size(); ++j) {
                if (all[i].name == all[j].name) {
                    throw NameCollisionError("partition blocks share variable '" + all[i].name + "'");
                }
            }
        }
    }

    std::vector<Variable> soi_;
    std::vector<Variable> inner_env_;
    std::vector<Variable> outer_env_;
};

/// A conditional probability table P(next | given): one stochastic row per
/// conditioning outcome.
class TransitionKernel {
public:
    TransitionKernel(std::size_t rows, std::size_t cols, std::vector<double> p)
        : rows_(rows), cols_(cols), p_(std::move(p)) {
        if (p_.size() != rows_ * cols_) {
            throw ArgumentError("kernel table has " + std::to_string(p_.size()) + " entries, expected " +
                                std::to_string(rows_ * cols_));
        }
        for (std::size_t r = 0; r < rows_; ++r) {
            double sum = 0.0;
            for (std::size_t c = 0; c < cols_; ++c) {
                double v = p_[r * cols_ + c];
                if (v < 0.0) throw ArgumentError("negative kernel probability");
                sum += v;
            }
            if (std::abs(sum - 1.0) > kMassTolerance) {
                throw ArgumentError("kernel row " + std::to_string(r) + " sums to " + std::to_string(sum));
            }
        }
    }

    /// Builds a deterministic kernel from a next-state map.
    template <typename Fn>
    static TransitionKernel deterministic(std::size_t rows, std::size_t cols, Fn&& next_of) {
        std::vector<double> p(rows * cols, 0.0);
        for (std::size_t r = 0; r < rows; ++r) p[r * cols + next_of(r)] = 1.0;
        return TransitionKernel(rows, cols, std::move(p));
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double at(std::size_t row, std::size_t col) const { return p_[row * cols_ + col]; }
    const std::vector<double>& table() const { return p_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> p_;
};

/// Optional factored authoring of the context transition: separate kernels for
/// the system-of-interest block and the inner-environment block, both
/// conditioned on the full (soi, inner_env, outer_env) state.
struct FactoredContextKernel {
    TransitionKernel soi_next;
    TransitionKernel inner_env_next;
};

struct ScenarioLimits {
    std::size_t max_horizon = 10000;
    std::size_t max_outcomes = 1000000;  // cap on the (context, env, next-context) table
};

/// Suffix appended to context variable names for their step-n+1 copies.
inline constexpr const char* kNextSuffix = "_next";

/// A time-homogeneous coupled Markov model: an initial joint distribution over
/// (context, outer environment) and one-step kernels
/// P(context' | context, env) and P(env' | context, env). The joint one-step
/// kernel is their product, i.e. next states are conditionally independent
/// given the current pair.
class MarkovScenario {
public:
    MarkovScenario(SystemPartition partition, JointDistribution initial, TransitionKernel context_kernel,
                   TransitionKernel env_kernel, std::optional<FactoredContextKernel> factored = std::nullopt,
                   ScenarioLimits limits = {})
        : partition_(std::move(partition)),
          initial_(std::move(initial)),
          context_kernel_(std::move(context_kernel)),
          env_kernel_(std::move(env_kernel)),
          factored_(std::move(factored)),
          limits_(limits) {
        validate();
    }

    /// Factored authoring: the context kernel is composed from the two block
    /// kernels.
    static MarkovScenario from_factored(SystemPartition partition, JointDistribution initial,
                                        FactoredContextKernel factored, TransitionKernel env_kernel,
                                        ScenarioLimits limits = {}) {
        TransitionKernel composed = compose_context(partition, factored);
        return MarkovScenario(std::move(partition), std::move(initial), std::move(composed), std::move(env_kernel),
                              std::move(factored), limits);
    }

    const SystemPartition& partition() const { return partition_; }
    const JointDistribution& initial() const { return initial_; }
    const TransitionKernel& context_kernel() const { return context_kernel_; }
    const TransitionKernel& env_kernel() const { return env_kernel_; }
    const ScenarioLimits& limits() const { return limits_; }

    bool has_factored_context() const { return factored_.has_value(); }

    /// The factored view P(soi', inner') as authored; throws for flat scenarios.
    const FactoredContextKernel& factored_context() const {
        if (!factored_) {
            throw UnsupportedViewError("scenario was authored with a flat context kernel; no factored view exists");
        }
        return *factored_;
    }

    /// Variables of the step-n+1 context copy, renamed with kNextSuffix.
    std::vector<Variable> next_context_variables() const {
        std::vector<Variable> vars = partition_.context();
        for (auto& v : vars) v.name += kNextSuffix;
        return vars;
    }

    static TransitionKernel compose_context(const SystemPartition& partition, const FactoredContextKernel& factored) {
        std::size_t rows = partition.context_outcomes() * partition.env_outcomes();
        std::size_t soi_n = partition.soi_outcomes();
        std::size_t inner_n = partition.inner_env_outcomes();
        std::size_t cols = soi_n * inner_n;
        if (factored.soi_next.rows() != rows || factored.inner_env_next.rows() != rows ||
            factored.soi_next.cols() != soi_n || factored.inner_env_next.cols() != inner_n) {
            throw SchemaError("factored context kernels do not match the partition's alphabets");
        }
        std::vector<double> p(rows * cols);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t s = 0; s < soi_n; ++s) {
                for (std::size_t m = 0; m < inner_n; ++m) {
                    p[r * cols + s * inner_n + m] = factored.soi_next.at(r, s) * factored.inner_env_next.at(r, m);
                }
            }
        }
        return TransitionKernel(rows, cols, std::move(p));
    }

private:
    void validate() const {
        std::size_t ctx_n = partition_.context_outcomes();
        std::size_t env_n = partition_.env_outcomes();
        if (ctx_n * env_n * ctx_n > limits_.max_outcomes) {
            throw LimitError("closure joint would have " + std::to_string(ctx_n * env_n * ctx_n) +
                             " outcomes, limit is " + std::to_string(limits_.max_outcomes));
        }

        std::vector<Variable> expected = partition_.universe();
        if (initial_.variables() != expected) {
            throw SchemaError("initial distribution must be over the partition variables in declared order");
        }
        if (context_kernel_.rows() != ctx_n * env_n || context_kernel_.cols() != ctx_n) {
            throw SchemaError("context kernel shape does not match the partition's alphabets");
        }
        if (env_kernel_.rows() != ctx_n * env_n || env_kernel_.cols() != env_n) {
            throw SchemaError("environment kernel shape does not match the partition's alphabets");
        }
        if (factored_) {
            TransitionKernel composed = compose_context(partition_, *factored_);
            for (std::size_t i = 0; i < composed.table().size(); ++i) {
                if (std::abs(composed.table()[i] - context_kernel_.table()[i]) > kMassTolerance) {
                    throw SchemaError("factored context kernels do not compose to the context kernel");
                }
            }
        }
        for (const auto& v : partition_.context()) {
            std::string next_name = v.name + kNextSuffix;
            for (const auto& u : partition_.universe()) {
                if (u.name == next_name) {
                    throw NameCollisionError("variable '" + u.name + "' collides with the step-n+1 name of '" +
                                             v.name + "'");
                }
            }
        }
    }

    SystemPartition partition_;
    JointDistribution initial_;
    TransitionKernel context_kernel_;
    TransitionKernel env_kernel_;
    std::optional<FactoredContextKernel> factored_;
    ScenarioLimits limits_;
};

namespace detail {

/// One application of the joint one-step kernel to a (context, env) vector.
inline std::vector<double> advance(const MarkovScenario& scenario, const std::vector<double>& pi) {
    std::size_t ctx_n = scenario.partition().context_outcomes();
    std::size_t env_n = scenario.partition().env_outcomes();
    std::vector<double> next(pi.size(), 0.0);
    for (std::size_t s = 0; s < ctx_n; ++s) {
        for (std::size_t e = 0; e < env_n; ++e) {
            double p = pi[s * env_n + e];
            if (p <= 0.0) continue;
            std::size_t row = s * env_n + e;
            for (std::size_t s2 = 0; s2 < ctx_n; ++s2) {
                double pc = scenario.context_kernel().at(row, s2);
                if (pc <= 0.0) continue;
                for (std::size_t e2 = 0; e2 < env_n; ++e2) {
                    next[s2 * env_n + e2] += p * pc * scenario.env_kernel().at(row, e2);
                }
            }
        }
    }
    // keep long propagations normalized despite sub-ulp kernel row deficits
    double total = 0.0;
    for (double v : next) total += v;
    for (double& v : next) v /= total;
    return next;
}

}  // namespace detail

/// Exact state distribution over (context, env) after `step` kernel
/// applications to the initial distribution.
inline JointDistribution propagate(const MarkovScenario& scenario, std::size_t step) {
    if (step > scenario.limits().max_horizon) {
        throw LimitError("step " + std::to_string(step) + " exceeds horizon limit " +
                         std::to_string(scenario.limits().max_horizon));
    }
    std::vector<double> pi = scenario.initial().masses();
    for (std::size_t k = 0; k < step; ++k) pi = detail::advance(scenario, pi);
    return JointDistribution(scenario.partition().universe(), std::move(pi));
}

/// Exact joint distribution over (context_n, env_n, context_{n+1}); the
/// environment's next state is integrated out.
inline JointDistribution closure_joint(const MarkovScenario& scenario, std::size_t step) {
    JointDistribution pi = propagate(scenario, step);
    std::size_t ctx_n = scenario.partition().context_outcomes();
    std::size_t env_n = scenario.partition().env_outcomes();

    std::vector<Variable> vars = scenario.partition().universe();
    std::vector<Variable> next = scenario.next_context_variables();
    vars.insert(vars.end(), next.begin(), next.end());

    std::vector<double> mass(ctx_n * env_n * ctx_n);
    for (std::size_t s = 0; s < ctx_n; ++s) {
        for (std::size_t e = 0; e < env_n; ++e) {
            double p = pi.masses()[s * env_n + e];
            for (std::size_t s2 = 0; s2 < ctx_n; ++s2) {
                mass[(s * env_n + e) * ctx_n + s2] = p * scenario.context_kernel().at(s * env_n + e, s2);
            }
        }
    }
    return JointDistribution(std::move(vars), std::move(mass));
}

/// The factored context view, validated to compose back to the flat kernel.
inline const FactoredContextKernel& factor_context(const MarkovScenario& scenario) {
    return scenario.factored_context();
}

}  // namespace closure
