#pragma once

// Independent reference implementations the test suites check the library
// against. These deliberately take a different route: outcomes are grouped by
// label tuples in ordered maps and information quantities are assembled from
// entropy combinations, whereas the library works on dense mixed-radix tables
// and definitional sums.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "closure/functional_closure.hpp"
#include "closure/probability.hpp"

namespace oracle {

using Labels = std::vector<std::string>;

inline std::vector<std::pair<Labels, double>> enumerate(const closure::JointDistribution& dist) {
    std::vector<std::pair<Labels, double>> out;
    out.reserve(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) {
        out.emplace_back(dist.outcome_labels(i), dist.masses()[i]);
    }
    return out;
}

inline Labels project(const closure::JointDistribution& dist, const Labels& outcome,
                      const std::vector<std::string>& names) {
    Labels key;
    for (const auto& name : names) {
        for (std::size_t i = 0; i < dist.variable_count(); ++i) {
            if (dist.variables()[i].name == name) {
                key.push_back(outcome[i]);
                break;
            }
        }
    }
    return key;
}

inline double entropy(const closure::JointDistribution& dist, const std::vector<std::string>& names) {
    std::map<Labels, double> grouped;
    for (const auto& [outcome, p] : enumerate(dist)) {
        grouped[project(dist, outcome, names)] += p;
    }
    double h = 0.0;
    for (const auto& [key, p] : grouped) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

inline std::vector<std::string> join(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

inline double mutual_information(const closure::JointDistribution& dist, const std::vector<std::string>& x,
                                 const std::vector<std::string>& y) {
    return oracle::entropy(dist, x) + oracle::entropy(dist, y) - oracle::entropy(dist, join(x, y));
}

inline double conditional_mutual_information(const closure::JointDistribution& dist,
                                             const std::vector<std::string>& x, const std::vector<std::string>& y,
                                             const std::vector<std::string>& z) {
    return oracle::entropy(dist, join(x, z)) + oracle::entropy(dist, join(y, z)) - oracle::entropy(dist, join(join(x, y), z)) -
           oracle::entropy(dist, z);
}

inline double conditional_entropy(const closure::JointDistribution& dist, const std::vector<std::string>& y,
                                  const std::vector<std::string>& x) {
    return oracle::entropy(dist, join(y, x)) - oracle::entropy(dist, x);
}

// ---------------------------------------------------------------------------
// function-table oracle: exhaustive all-subsets search, no pruning

inline bool dependent(const closure::FunctionTable& table, std::uint32_t mask) {
    std::size_t arity = table.arity();
    std::size_t key_range = 1;
    for (std::size_t i = 0; i < arity; ++i) {
        if (mask >> i & 1u) key_range *= table.inputs()[i].cardinality();
    }
    std::vector<std::ptrdiff_t> seen(key_range, -1);
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        std::size_t key = 0;
        for (std::size_t i = 0; i < arity; ++i) {
            if (mask >> i & 1u) {
                key = key * table.inputs()[i].cardinality() + (r / table.stride(i)) % table.inputs()[i].cardinality();
            }
        }
        if (seen[key] < 0) {
            seen[key] = static_cast<std::ptrdiff_t>(table.rows()[r]);
        } else if (seen[key] != static_cast<std::ptrdiff_t>(table.rows()[r])) {
            return false;
        }
    }
    return true;
}

/// Every passing subset, then keep those with no proper passing subset.
inline std::vector<std::uint32_t> minimal_masks(const closure::FunctionTable& table) {
    std::size_t arity = table.arity();
    std::vector<std::uint32_t> passing;
    for (std::uint32_t mask = 0; mask < (1u << arity); ++mask) {
        if (dependent(table, mask)) passing.push_back(mask);
    }
    std::vector<std::uint32_t> minimal;
    for (std::uint32_t candidate : passing) {
        bool has_smaller = false;
        for (std::uint32_t other : passing) {
            if (other != candidate && (other & candidate) == other) {
                has_smaller = true;
                break;
            }
        }
        if (!has_smaller) minimal.push_back(candidate);
    }
    return minimal;
}

}  // namespace oracle
