#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "closure/system_model.hpp"

namespace closure {

/// Reference scenarios used by the verification suite and as CLI shorthands.
///
/// decoupled  both kernels ignore the other block and the initial state is a
///            product, so the context stays informationally and functionally
///            closed with zero coupling at every step.
/// copy       the environment copies the context state while the context
///            XORs the environment in; verdicts cycle with period three
///            (closed, closed with unit coupling, open).
/// driven     the context absorbs fresh environment noise each step and is
///            informationally open everywhere.

inline MarkovScenario decoupled_scenario() {
    Variable s{"s", {"0", "1"}};
    Variable m{"m", {"0", "1"}};
    Variable e{"e", {"0", "1"}};
    SystemPartition partition({s}, {m}, {e});

    // conditioning rows are (s, m, e) in mixed radix
    auto s_of = [](std::size_t row) { return (row >> 2) & 1u; };
    auto m_of = [](std::size_t row) { return (row >> 1) & 1u; };
    auto e_of = [](std::size_t row) { return row & 1u; };

    std::vector<double> soi_next(8 * 2, 0.0);
    std::vector<double> inner_next(8 * 2, 0.0);
    std::vector<double> env_next(8 * 2, 0.0);
    for (std::size_t row = 0; row < 8; ++row) {
        std::size_t s2 = s_of(row) ^ m_of(row);
        soi_next[row * 2 + s2] = 1.0;
        std::size_t m2 = m_of(row) ^ s_of(row);
        inner_next[row * 2 + m2] = 0.75;
        inner_next[row * 2 + (1 - m2)] = 0.25;
        env_next[row * 2 + e_of(row)] = 0.7;
        env_next[row * 2 + (1 - e_of(row))] = 0.3;
    }
    FactoredContextKernel factored{TransitionKernel(8, 2, std::move(soi_next)),
                                   TransitionKernel(8, 2, std::move(inner_next))};
    return MarkovScenario::from_factored(partition, JointDistribution::uniform(partition.universe()),
                                         std::move(factored), TransitionKernel(8, 2, std::move(env_next)));
}

inline MarkovScenario copy_scenario() {
    Variable s{"s", {"0", "1"}};
    Variable m{"m", {"u"}};
    Variable e{"e", {"0", "1"}};
    SystemPartition partition({s}, {m}, {e});

    // context outcomes collapse to s (the inner block is a single symbol);
    // conditioning rows are (s, e)
    TransitionKernel context = TransitionKernel::deterministic(4, 2, [](std::size_t row) {
        std::size_t s = row >> 1;
        std::size_t e = row & 1u;
        return s ^ e;
    });
    TransitionKernel env = TransitionKernel::deterministic(4, 2, [](std::size_t row) { return row >> 1; });

    JointDistribution initial = JointDistribution::from_outcomes(
        partition.universe(), {{{"0", "u", "0"}, 0.5}, {{"1", "u", "0"}, 0.5}});
    return MarkovScenario(partition, std::move(initial), std::move(context), std::move(env));
}

inline MarkovScenario driven_scenario() {
    Variable s{"s", {"0", "1"}};
    Variable m{"m", {"0", "1"}};
    Variable e{"e", {"0", "1"}};
    SystemPartition partition({s}, {m}, {e});

    // rows are (s, m, e); the next context state reads fresh environment noise
    TransitionKernel context = TransitionKernel::deterministic(8, 4, [](std::size_t row) {
        std::size_t s = (row >> 2) & 1u;
        std::size_t m = (row >> 1) & 1u;
        std::size_t e = row & 1u;
        return (s ^ e) * 2 + m;
    });
    std::vector<double> env_next(8 * 2, 0.5);
    return MarkovScenario(partition, JointDistribution::uniform(partition.universe()), std::move(context),
                          TransitionKernel(8, 2, std::move(env_next)));
}

inline std::vector<std::string> builtin_scenario_names() { return {"copy", "decoupled", "driven"}; }

inline std::optional<MarkovScenario> builtin_scenario(std::string_view name) {
    if (name == "decoupled") return decoupled_scenario();
    if (name == "copy") return copy_scenario();
    if (name == "driven") return driven_scenario();
    return std::nullopt;
}

}  // namespace closure
