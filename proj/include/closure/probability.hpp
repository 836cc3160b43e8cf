#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "closure/errors.hpp"

namespace closure {

/// Normalization tolerance enforced on every in-memory probability table.
inline constexpr double kMassTolerance = 1e-12;

/// A named finite random variable with a fixed, ordered alphabet.
struct Variable {
    std::string name;
    std::vector<std::string> alphabet;

    std::size_t cardinality() const { return alphabet.size(); }

    std::size_t symbol_index(const std::string& label) const {
        for (std::size_t i = 0; i < alphabet.size(); ++i) {
            if (alphabet[i] == label) return i;
        }
        throw NameError("variable '" + name + "' has no symbol '" + label + "'");
    }

    void validate() const {
        if (name.empty()) throw ArgumentError("variable name must be non-empty");
        if (alphabet.empty()) throw ArgumentError("variable '" + name + "' has an empty alphabet");
        for (std::size_t i = 0; i < alphabet.size(); ++i) {
            for (std::size_t j = i + 1; j < alphabet.size(); ++j) {
                if (alphabet[i] == alphabet[j]) {
                    throw ArgumentError("variable '" + name + "' repeats symbol '" + alphabet[i] + "'");
                }
            }
        }
    }

    bool operator==(const Variable&) const = default;
};

/// An exact joint probability table over an ordered tuple of finite variables.
///
/// Outcomes are indexed in mixed radix with the first declared variable most
/// significant, so the table enumerates the Cartesian product of alphabets in
/// lexicographic order of (index, not label) tuples. Zero-mass outcomes are
/// kept in the table. Instances are immutable after construction.
class JointDistribution {
public:
    JointDistribution(std::vector<Variable> variables, std::vector<double> mass)
        : vars_(std::move(variables)), mass_(std::move(mass)) {
        init_strides();
        validate();
    }

    /// Builds the table from sparse (outcome labels, probability) entries;
    /// unlisted outcomes are zero.
    static JointDistribution from_outcomes(
        std::vector<Variable> variables,
        const std::vector<std::pair<std::vector<std::string>, double>>& entries) {
        std::size_t n = 1;
        for (const auto& v : variables) {
            v.validate();
            n *= v.cardinality();
        }
        std::vector<double> mass(n, 0.0);
        JointDistribution skeleton = make_unchecked(std::move(variables), std::move(mass));
        for (const auto& [labels, p] : entries) {
            skeleton.mass_[skeleton.index_of(labels)] += p;
        }
        skeleton.validate();
        return skeleton;
    }

    static JointDistribution uniform(std::vector<Variable> variables) {
        std::size_t n = 1;
        for (const auto& v : variables) {
            v.validate();
            n *= v.cardinality();
        }
        return JointDistribution(std::move(variables), std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    const std::vector<Variable>& variables() const { return vars_; }
    std::size_t variable_count() const { return vars_.size(); }
    std::size_t size() const { return mass_.size(); }
    const std::vector<double>& masses() const { return mass_; }
    double mass(std::size_t index) const { return mass_.at(index); }

    /// Position of a variable in the declared order.
    std::size_t position(const std::string& name) const {
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i].name == name) return i;
        }
        throw NameError("no variable named '" + name + "'");
    }

    bool has_variable(const std::string& name) const {
        return std::any_of(vars_.begin(), vars_.end(),
                           [&](const Variable& v) { return v.name == name; });
    }

    std::size_t stride(std::size_t position) const { return strides_.at(position); }

    /// Symbol index of variable `position` within outcome `index`.
    std::size_t digit(std::size_t index, std::size_t position) const {
        return (index / strides_[position]) % vars_[position].cardinality();
    }

    std::vector<std::string> outcome_labels(std::size_t index) const {
        std::vector<std::string> labels;
        labels.reserve(vars_.size());
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            labels.push_back(vars_[i].alphabet[digit(index, i)]);
        }
        return labels;
    }

    std::size_t index_of(const std::vector<std::string>& labels) const {
        if (labels.size() != vars_.size()) {
            throw ArgumentError("outcome arity " + std::to_string(labels.size()) + " does not match " +
                                std::to_string(vars_.size()) + " variables");
        }
        std::size_t index = 0;
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            index += strides_[i] * vars_[i].symbol_index(labels[i]);
        }
        return index;
    }

    double probability_of(const std::vector<std::string>& labels) const { return mass_[index_of(labels)]; }

private:
    JointDistribution() = default;

    static JointDistribution make_unchecked(std::vector<Variable> variables, std::vector<double> mass) {
        JointDistribution d;
        d.vars_ = std::move(variables);
        d.mass_ = std::move(mass);
        d.init_strides();
        return d;
    }

    void init_strides() {
        strides_.assign(vars_.size(), 1);
        for (std::size_t i = vars_.size(); i-- > 1;) {
            strides_[i - 1] = strides_[i] * vars_[i].cardinality();
        }
    }

    void validate() const {
        std::size_t n = 1;
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            vars_[i].validate();
            for (std::size_t j = i + 1; j < vars_.size(); ++j) {
                if (vars_[i].name == vars_[j].name) {
                    throw NameCollisionError("duplicate variable name '" + vars_[i].name + "'");
                }
            }
            n *= vars_[i].cardinality();
        }
        if (mass_.size() != n) {
            throw ArgumentError("mass table has " + std::to_string(mass_.size()) + " entries, outcome space has " +
                                std::to_string(n));
        }
        double sum = 0.0;
        for (double p : mass_) {
            if (p < 0.0) throw ArgumentError("negative probability " + std::to_string(p));
            sum += p;
        }
        if (std::abs(sum - 1.0) > kMassTolerance) {
            throw ArgumentError("probabilities sum to " + std::to_string(sum) + ", expected 1");
        }
    }

    friend JointDistribution marginalize(const JointDistribution&, const std::vector<std::string>&);
    friend JointDistribution condition(const JointDistribution&, const std::map<std::string, std::string>&);
    friend JointDistribution product(const JointDistribution&, const JointDistribution&);

    std::vector<Variable> vars_;
    std::vector<double> mass_;
    std::vector<std::size_t> strides_;
};

namespace detail {

/// Maps full outcome indices of `dist` onto sub-indices over the variables at
/// `keep_positions` (in the given order).
class Projection {
public:
    Projection(const JointDistribution& dist, const std::vector<std::size_t>& keep_positions) {
        terms_.reserve(keep_positions.size());
        range_ = 1;
        std::size_t out_stride = 1;
        for (std::size_t k = keep_positions.size(); k-- > 0;) {
            std::size_t pos = keep_positions[k];
            std::size_t card = dist.variables()[pos].cardinality();
            terms_.push_back({dist.stride(pos), card, out_stride});
            out_stride *= card;
        }
        range_ = out_stride;
    }

    std::size_t operator()(std::size_t index) const {
        std::size_t out = 0;
        for (const Term& t : terms_) {
            out += ((index / t.in_stride) % t.cardinality) * t.out_stride;
        }
        return out;
    }

    std::size_t range() const { return range_; }

private:
    struct Term {
        std::size_t in_stride;
        std::size_t cardinality;
        std::size_t out_stride;
    };
    std::vector<Term> terms_;
    std::size_t range_;
};

inline std::vector<std::size_t> resolve_positions(const JointDistribution& dist,
                                                  const std::vector<std::string>& names) {
    std::vector<std::size_t> positions;
    positions.reserve(names.size());
    for (const auto& name : names) positions.push_back(dist.position(name));
    return positions;
}

}  // namespace detail

/// Sums the table over every variable not in `keep`. The result keeps the
/// host distribution's declared variable order.
inline JointDistribution marginalize(const JointDistribution& dist, const std::vector<std::string>& keep) {
    if (keep.empty()) throw ArgumentError("marginalize requires a non-empty set of variables to keep");
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < dist.variable_count(); ++i) {
        const std::string& name = dist.variables()[i].name;
        if (std::find(keep.begin(), keep.end(), name) != keep.end()) positions.push_back(i);
    }
    // every requested name must resolve
    for (const auto& name : keep) dist.position(name);
    if (positions.size() != keep.size()) throw ArgumentError("duplicate variable names in keep set");

    std::vector<Variable> kept_vars;
    kept_vars.reserve(positions.size());
    for (std::size_t pos : positions) kept_vars.push_back(dist.variables()[pos]);

    detail::Projection proj(dist, positions);
    std::vector<double> mass(proj.range(), 0.0);
    for (std::size_t i = 0; i < dist.size(); ++i) {
        mass[proj(i)] += dist.masses()[i];
    }
    return JointDistribution::make_unchecked(std::move(kept_vars), std::move(mass));
}

/// Restricts the table to the evidence event and renormalizes; the result is
/// over the unassigned variables in host order.
inline JointDistribution condition(const JointDistribution& dist,
                                   const std::map<std::string, std::string>& evidence) {
    if (evidence.empty()) throw ArgumentError("condition requires at least one evidence assignment");
    if (evidence.size() >= dist.variable_count()) {
        throw ArgumentError("evidence must leave at least one variable unassigned");
    }

    std::vector<std::size_t> fixed_positions;
    std::vector<std::size_t> fixed_digits;
    for (const auto& [name, label] : evidence) {
        std::size_t pos = dist.position(name);
        fixed_positions.push_back(pos);
        fixed_digits.push_back(dist.variables()[pos].symbol_index(label));
    }

    std::vector<std::size_t> free_positions;
    std::vector<Variable> free_vars;
    for (std::size_t i = 0; i < dist.variable_count(); ++i) {
        if (std::find(fixed_positions.begin(), fixed_positions.end(), i) == fixed_positions.end()) {
            free_positions.push_back(i);
            free_vars.push_back(dist.variables()[i]);
        }
    }

    detail::Projection proj(dist, free_positions);
    std::vector<double> mass(proj.range(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        bool matches = true;
        for (std::size_t k = 0; k < fixed_positions.size(); ++k) {
            if (dist.digit(i, fixed_positions[k]) != fixed_digits[k]) {
                matches = false;
                break;
            }
        }
        if (!matches) continue;
        mass[proj(i)] += dist.masses()[i];
        total += dist.masses()[i];
    }
    if (total <= 0.0) throw NullEventError("conditioning event has probability zero");
    for (double& p : mass) p /= total;
    return JointDistribution::make_unchecked(std::move(free_vars), std::move(mass));
}

/// Independent combination of two distributions over disjoint variable sets.
inline JointDistribution product(const JointDistribution& a, const JointDistribution& b) {
    for (const auto& v : b.variables()) {
        if (a.has_variable(v.name)) {
            throw NameCollisionError("variable '" + v.name + "' appears on both sides of product");
        }
    }
    std::vector<Variable> vars = a.variables();
    vars.insert(vars.end(), b.variables().begin(), b.variables().end());
    std::vector<double> mass(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            mass[i * b.size() + j] = a.masses()[i] * b.masses()[j];
        }
    }
    return JointDistribution::make_unchecked(std::move(vars), std::move(mass));
}

}  // namespace closure
