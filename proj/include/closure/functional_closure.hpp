#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "closure/errors.hpp"
#include "closure/probability.hpp"
#include "closure/system_model.hpp"

namespace closure {

/// A total explicit mapping from every input tuple to one output symbol.
/// Rows are indexed in the same mixed radix as JointDistribution outcomes
/// (first input most significant); entry r holds the output symbol index.
class FunctionTable {
public:
    FunctionTable(std::vector<Variable> inputs, Variable output, std::vector<std::size_t> rows)
        : inputs_(std::move(inputs)), output_(std::move(output)), rows_(std::move(rows)) {
        output_.validate();
        std::size_t n = 1;
        for (std::size_t i = 0; i < inputs_.size(); ++i) {
            inputs_[i].validate();
            if (inputs_[i].name == output_.name) {
                throw NameCollisionError("output '" + output_.name + "' repeats an input name");
            }
            for (std::size_t j = i + 1; j < inputs_.size(); ++j) {
                if (inputs_[i].name == inputs_[j].name) {
                    throw NameCollisionError("duplicate input name '" + inputs_[i].name + "'");
                }
            }
            n *= inputs_[i].cardinality();
        }
        if (rows_.size() != n) {
            throw SchemaError("table has " + std::to_string(rows_.size()) + " rows, input space has " +
                              std::to_string(n));
        }
        for (std::size_t v : rows_) {
            if (v >= output_.cardinality()) throw SchemaError("row output index out of range");
        }
        strides_.assign(inputs_.size(), 1);
        for (std::size_t i = inputs_.size(); i-- > 1;) {
            strides_[i - 1] = strides_[i] * inputs_[i].cardinality();
        }
    }

    const std::vector<Variable>& inputs() const { return inputs_; }
    const Variable& output() const { return output_; }
    const std::vector<std::size_t>& rows() const { return rows_; }
    std::size_t arity() const { return inputs_.size(); }
    std::size_t row_count() const { return rows_.size(); }
    std::size_t stride(std::size_t position) const { return strides_[position]; }

    std::size_t input_position(const std::string& name) const {
        for (std::size_t i = 0; i < inputs_.size(); ++i) {
            if (inputs_[i].name == name) return i;
        }
        throw NameError("no input named '" + name + "'");
    }

    std::size_t output_at(const std::vector<std::string>& labels) const {
        if (labels.size() != inputs_.size()) throw ArgumentError("input tuple arity mismatch");
        std::size_t r = 0;
        for (std::size_t i = 0; i < inputs_.size(); ++i) {
            r += strides_[i] * inputs_[i].symbol_index(labels[i]);
        }
        return rows_[r];
    }

private:
    std::vector<Variable> inputs_;
    Variable output_;
    std::vector<std::size_t> rows_;
    std::vector<std::size_t> strides_;
};

namespace detail {

/// Scans every row once, keyed by the candidate's projected sub-index, and
/// reports whether the output is constant within each projection class. The
/// projected key is maintained incrementally while the row odometer advances.
inline bool dependent_on_mask(const FunctionTable& table, std::uint32_t mask) {
    std::size_t arity = table.arity();
    std::vector<std::size_t> cards(arity);
    for (std::size_t i = 0; i < arity; ++i) cards[i] = table.inputs()[i].cardinality();

    std::vector<std::size_t> substride(arity, 0);
    std::size_t proj_range = 1;
    for (std::size_t i = arity; i-- > 0;) {
        if (mask >> i & 1u) {
            substride[i] = proj_range;
            proj_range *= cards[i];
        }
    }

    std::vector<std::ptrdiff_t> seen(proj_range, -1);
    std::vector<std::size_t> digits(arity, 0);
    std::size_t key = 0;
    const auto& rows = table.rows();
    for (std::size_t r = 0;; ++r) {
        std::ptrdiff_t& slot = seen[key];
        if (slot < 0) {
            slot = static_cast<std::ptrdiff_t>(rows[r]);
        } else if (slot != static_cast<std::ptrdiff_t>(rows[r])) {
            return false;
        }
        if (r + 1 == rows.size()) break;
        for (std::size_t i = arity; i-- > 0;) {
            if (++digits[i] < cards[i]) {
                key += substride[i];
                break;
            }
            digits[i] = 0;
            key -= substride[i] * (cards[i] - 1);
        }
    }
    return true;
}

inline std::uint32_t mask_of(const FunctionTable& table, const std::vector<std::string>& names) {
    std::uint32_t mask = 0;
    for (const auto& name : names) {
        std::uint32_t bit = 1u << table.input_position(name);
        if (mask & bit) throw ArgumentError("candidate repeats input '" + name + "'");
        mask |= bit;
    }
    return mask;
}

inline std::vector<std::string> names_of_mask(const FunctionTable& table, std::uint32_t mask) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < table.arity(); ++i) {
        if (mask >> i & 1u) names.push_back(table.inputs()[i].name);
    }
    std::sort(names.begin(), names.end());
    return names;
}

}  // namespace detail

/// True iff the output is a well-defined function of `candidate` alone: for
/// every fixing of the candidate inputs, all rows agree on the output. An
/// empty candidate asks whether the output is globally constant.
inline bool is_functionally_dependent(const FunctionTable& table, const std::vector<std::string>& candidate) {
    return detail::dependent_on_mask(table, detail::mask_of(table, candidate));
}

/// An inclusion-minimal determinant set, with the variables it proves
/// irrelevant. Verification is exhaustive: every row of the table was checked.
struct MinimalInputSet {
    std::vector<std::string> members;   // sorted lexicographically
    std::vector<std::string> excluded;  // complement, sorted
    std::string verification = "exhaustive";

    bool operator==(const MinimalInputSet&) const = default;
};

struct MinimalSetOptions {
    std::size_t max_arity = 20;
};

/// All inclusion-minimal input sets the output is functionally dependent on,
/// in lexicographic order of their sorted member lists.
///
/// Breadth-first over the subset lattice by cardinality; supersets of an
/// already-found minimal set are skipped, which is sound because dependency is
/// monotone under adding inputs.
inline std::vector<MinimalInputSet> minimal_input_sets(const FunctionTable& table, MinimalSetOptions options = {}) {
    if (table.arity() > options.max_arity) {
        throw LimitError("table arity " + std::to_string(table.arity()) + " exceeds limit " +
                         std::to_string(options.max_arity));
    }
    std::size_t n = table.arity();
    std::vector<std::uint32_t> found;

    for (std::size_t k = 0; k <= n; ++k) {
        // k-subsets in lexicographic position order
        std::vector<std::size_t> idx(k);
        for (std::size_t i = 0; i < k; ++i) idx[i] = i;
        while (true) {
            std::uint32_t mask = 0;
            for (std::size_t i : idx) mask |= 1u << i;
            bool subsumed = std::any_of(found.begin(), found.end(),
                                        [&](std::uint32_t m) { return (mask & m) == m; });
            if (!subsumed && detail::dependent_on_mask(table, mask)) found.push_back(mask);

            if (k == 0) break;
            std::size_t i = k;
            while (i-- > 0) {
                if (idx[i] + (k - i) < n) {
                    ++idx[i];
                    for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
                    break;
                }
                if (i == 0) {
                    i = k;  // exhausted
                    break;
                }
            }
            if (i == k) break;
        }
    }

    std::vector<MinimalInputSet> sets;
    sets.reserve(found.size());
    std::uint32_t all = (n == 32) ? ~0u : ((1u << n) - 1u);
    for (std::uint32_t mask : found) {
        MinimalInputSet s;
        s.members = detail::names_of_mask(table, mask);
        s.excluded = detail::names_of_mask(table, all & ~mask);
        sets.push_back(std::move(s));
    }
    std::sort(sets.begin(), sets.end(),
              [](const MinimalInputSet& a, const MinimalInputSet& b) { return a.members < b.members; });
    return sets;
}

struct FunctionalClosureResult {
    bool closed = false;
    std::optional<MinimalInputSet> evidence;
};

inline FunctionalClosureResult is_functionally_closed(const FunctionTable& table,
                                                      const std::vector<std::string>& environment_inputs,
                                                      const std::vector<MinimalInputSet>& sets) {
    std::uint32_t env_mask = detail::mask_of(table, environment_inputs);
    FunctionalClosureResult result;
    for (const auto& s : sets) {
        std::uint32_t mask = 0;
        for (const auto& name : s.members) mask |= 1u << table.input_position(name);
        if ((mask & env_mask) == 0) {
            result.closed = true;
            result.evidence = s;
            break;
        }
    }
    return result;
}

/// True iff some minimal determinant set avoids every environment input, i.e.
/// the table's function is expressible without reading the environment.
inline FunctionalClosureResult is_functionally_closed(const FunctionTable& table,
                                                      const std::vector<std::string>& environment_inputs,
                                                      MinimalSetOptions options = {}) {
    return is_functionally_closed(table, environment_inputs, minimal_input_sets(table, options));
}

/// Embeds the table as a one-step scenario: non-environment inputs and the
/// output form the context block (inputs held, output recomputed each step),
/// environment inputs form the outer environment (held). The initial
/// distribution must be over (non-env inputs..., output, env inputs...) in
/// table order.
inline MarkovScenario embed_as_scenario(const FunctionTable& table,
                                        const std::vector<std::string>& environment_inputs,
                                        const JointDistribution& initial) {
    std::uint32_t env_mask = detail::mask_of(table, environment_inputs);
    std::vector<Variable> soi_vars;
    std::vector<Variable> env_vars;
    std::vector<std::size_t> soi_positions;
    std::vector<std::size_t> env_positions;
    for (std::size_t i = 0; i < table.arity(); ++i) {
        if (env_mask >> i & 1u) {
            env_vars.push_back(table.inputs()[i]);
            env_positions.push_back(i);
        } else {
            soi_vars.push_back(table.inputs()[i]);
            soi_positions.push_back(i);
        }
    }
    SystemPartition partition(soi_vars, {table.output()}, env_vars);

    std::size_t ctx_n = partition.context_outcomes();
    std::size_t env_n = partition.env_outcomes();
    std::size_t out_n = table.output().cardinality();

    auto table_row = [&](std::size_t held, std::size_t env) {
        std::size_t r = 0;
        std::size_t h = held;
        for (std::size_t i = soi_positions.size(); i-- > 0;) {
            std::size_t card = table.inputs()[soi_positions[i]].cardinality();
            r += (h % card) * table.stride(soi_positions[i]);
            h /= card;
        }
        std::size_t e = env;
        for (std::size_t i = env_positions.size(); i-- > 0;) {
            std::size_t card = table.inputs()[env_positions[i]].cardinality();
            r += (e % card) * table.stride(env_positions[i]);
            e /= card;
        }
        return r;
    };

    TransitionKernel context_kernel = TransitionKernel::deterministic(
        ctx_n * env_n, ctx_n, [&](std::size_t row) {
            std::size_t env = row % env_n;
            std::size_t held = (row / env_n) / out_n;
            return held * out_n + table.rows()[table_row(held, env)];
        });
    TransitionKernel env_kernel =
        TransitionKernel::deterministic(ctx_n * env_n, env_n, [&](std::size_t row) { return row % env_n; });

    return MarkovScenario(std::move(partition), initial, std::move(context_kernel), std::move(env_kernel));
}

}  // namespace closure
