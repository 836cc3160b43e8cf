#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "closure/probability.hpp"

namespace closure {

/// All information quantities are in bits (log base 2).
using Bits = double;

/// Default tolerance for identity residuals on exact pipelines, in bits.
inline constexpr double kDefaultExactTolerance = 1e-9;

/// An ordered set of variable names treated as one composite variable.
using VariableGroup = std::vector<std::string>;

/// Values in [-floor, 0) are reporting noise from exact cancellation; render
/// them as zero. Raw values stay untouched everywhere else.
inline double clamp_reported(double bits, double floor = 1e-9) {
    return (bits < 0.0 && bits >= -floor) ? 0.0 : bits;
}

namespace detail {

inline void check_group(const JointDistribution& dist, const VariableGroup& group, const char* role) {
    if (group.empty()) throw ArgumentError(std::string(role) + " group must be non-empty");
    for (std::size_t i = 0; i < group.size(); ++i) {
        dist.position(group[i]);
        for (std::size_t j = i + 1; j < group.size(); ++j) {
            if (group[i] == group[j]) {
                throw ArgumentError(std::string(role) + " group repeats variable '" + group[i] + "'");
            }
        }
    }
}

inline void check_disjoint(const VariableGroup& a, const VariableGroup& b) {
    for (const auto& name : a) {
        if (std::find(b.begin(), b.end(), name) != b.end()) {
            throw ArgumentError("variable groups overlap on '" + name + "'");
        }
    }
}

inline VariableGroup group_union(const VariableGroup& a, const VariableGroup& b) {
    VariableGroup out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

/// Positions of `group`'s variables inside `host`'s declared order, given that
/// `host` was produced by marginalizing onto a superset of `group`.
inline std::vector<std::size_t> positions_in(const JointDistribution& host, const VariableGroup& group) {
    std::vector<std::size_t> positions;
    positions.reserve(group.size());
    for (std::size_t i = 0; i < host.variable_count(); ++i) {
        const std::string& name = host.variables()[i].name;
        if (std::find(group.begin(), group.end(), name) != group.end()) positions.push_back(i);
    }
    return positions;
}

inline double entropy_of_masses(const std::vector<double>& mass) {
    double h = 0.0;
    for (double p : mass) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

}  // namespace detail

/// H(X) = -sum p(x) log2 p(x), with 0 log 0 = 0.
inline Bits entropy(const JointDistribution& dist, const VariableGroup& x) {
    detail::check_group(dist, x, "entropy");
    if (x.size() == dist.variable_count()) return detail::entropy_of_masses(dist.masses());
    return detail::entropy_of_masses(marginalize(dist, x).masses());
}

/// H(X,Y) over the marginal on the union of two disjoint groups.
inline Bits joint_entropy(const JointDistribution& dist, const VariableGroup& x, const VariableGroup& y) {
    detail::check_group(dist, x, "joint entropy x");
    detail::check_group(dist, y, "joint entropy y");
    detail::check_disjoint(x, y);
    return entropy(dist, detail::group_union(x, y));
}

/// H(Y|X) = -sum p(x,y) log2 p(y|x), computed from the definitional sum.
inline Bits conditional_entropy(const JointDistribution& dist, const VariableGroup& y, const VariableGroup& given_x) {
    detail::check_group(dist, y, "conditional entropy y");
    detail::check_group(dist, given_x, "conditional entropy x");
    detail::check_disjoint(y, given_x);

    JointDistribution joint = marginalize(dist, detail::group_union(y, given_x));
    detail::Projection onto_x(joint, detail::positions_in(joint, given_x));
    std::vector<double> px(onto_x.range(), 0.0);
    for (std::size_t i = 0; i < joint.size(); ++i) px[onto_x(i)] += joint.masses()[i];

    double h = 0.0;
    for (std::size_t i = 0; i < joint.size(); ++i) {
        double pxy = joint.masses()[i];
        if (pxy <= 0.0) continue;
        h -= pxy * std::log2(pxy / px[onto_x(i)]);
    }
    return h;
}

/// I(X;Y) = sum p(x,y) log2 [p(x,y) / (p(x) p(y))].
inline Bits mutual_information(const JointDistribution& dist, const VariableGroup& x, const VariableGroup& y) {
    detail::check_group(dist, x, "mutual information x");
    detail::check_group(dist, y, "mutual information y");
    detail::check_disjoint(x, y);

    JointDistribution joint = marginalize(dist, detail::group_union(x, y));
    detail::Projection onto_x(joint, detail::positions_in(joint, x));
    detail::Projection onto_y(joint, detail::positions_in(joint, y));
    std::vector<double> px(onto_x.range(), 0.0);
    std::vector<double> py(onto_y.range(), 0.0);
    for (std::size_t i = 0; i < joint.size(); ++i) {
        px[onto_x(i)] += joint.masses()[i];
        py[onto_y(i)] += joint.masses()[i];
    }

    double mi = 0.0;
    for (std::size_t i = 0; i < joint.size(); ++i) {
        double pxy = joint.masses()[i];
        if (pxy <= 0.0) continue;
        mi += pxy * std::log2(pxy / (px[onto_x(i)] * py[onto_y(i)]));
    }
    return mi;
}

/// I(X;Y|Z) = sum p(x,y,z) log2 [p(x,y,z) p(z) / (p(x,z) p(y,z))].
inline Bits conditional_mutual_information(const JointDistribution& dist, const VariableGroup& x,
                                           const VariableGroup& y, const VariableGroup& z) {
    detail::check_group(dist, x, "conditional mutual information x");
    detail::check_group(dist, y, "conditional mutual information y");
    detail::check_group(dist, z, "conditional mutual information z");
    detail::check_disjoint(x, y);
    detail::check_disjoint(x, z);
    detail::check_disjoint(y, z);

    JointDistribution joint = marginalize(dist, detail::group_union(detail::group_union(x, y), z));
    detail::Projection onto_xz(joint, detail::positions_in(joint, detail::group_union(x, z)));
    detail::Projection onto_yz(joint, detail::positions_in(joint, detail::group_union(y, z)));
    detail::Projection onto_z(joint, detail::positions_in(joint, z));
    std::vector<double> pxz(onto_xz.range(), 0.0);
    std::vector<double> pyz(onto_yz.range(), 0.0);
    std::vector<double> pz(onto_z.range(), 0.0);
    for (std::size_t i = 0; i < joint.size(); ++i) {
        double p = joint.masses()[i];
        pxz[onto_xz(i)] += p;
        pyz[onto_yz(i)] += p;
        pz[onto_z(i)] += p;
    }

    double cmi = 0.0;
    for (std::size_t i = 0; i < joint.size(); ++i) {
        double p = joint.masses()[i];
        if (p <= 0.0) continue;
        cmi += p * std::log2(p * pz[onto_z(i)] / (pxz[onto_xz(i)] * pyz[onto_yz(i)]));
    }
    return cmi;
}

struct IdentityResidual {
    std::string name;
    double residual;
    bool pass;
};

struct IdentityReport {
    double tolerance = kDefaultExactTolerance;
    std::vector<IdentityResidual> entries;
    double max_residual = 0.0;
    bool all_pass = true;

    void add(std::string name, double residual) {
        bool pass = std::abs(residual) <= tolerance;
        max_residual = std::max(max_residual, std::abs(residual));
        all_pass = all_pass && pass;
        entries.push_back({std::move(name), residual, pass});
    }
};

/// Cross-checks the definitional sums against their entropy-combination forms
/// on one distribution. `z` may be empty, which skips the three-group checks.
inline IdentityReport verify_identities(const JointDistribution& dist, const VariableGroup& x,
                                        const VariableGroup& y, const VariableGroup& z,
                                        double tolerance = kDefaultExactTolerance) {
    IdentityReport report;
    report.tolerance = tolerance;

    double hx = entropy(dist, x);
    double hy = entropy(dist, y);
    double hxy = joint_entropy(dist, x, y);
    double hyx = joint_entropy(dist, y, x);
    double hy_given_x = conditional_entropy(dist, y, x);
    double hx_given_y = conditional_entropy(dist, x, y);

    report.add("conditional_entropy_yx_from_joint", hy_given_x - (hyx - hx));
    report.add("conditional_entropy_xy_from_joint", hx_given_y - (hyx - hy));
    report.add("conditional_entropy_swap", hy_given_x - (hx_given_y + hy - hx));
    report.add("joint_entropy_symmetry", hxy - hyx);
    report.add("mutual_information_entropy_form", mutual_information(dist, x, y) - (hx + hy - hxy));

    if (!z.empty()) {
        double hz = entropy(dist, z);
        double hxz = joint_entropy(dist, x, z);
        double hyz = joint_entropy(dist, y, z);
        double hxyz = entropy(dist, detail::group_union(detail::group_union(x, y), z));
        report.add("conditional_mutual_information_entropy_form",
                   conditional_mutual_information(dist, x, y, z) - (hxz + hyz - hxyz - hz));
        report.add("chain_rule",
                   mutual_information(dist, x, detail::group_union(y, z)) -
                       (mutual_information(dist, x, z) + conditional_mutual_information(dist, x, y, z)));
    }
    return report;
}

}  // namespace closure
