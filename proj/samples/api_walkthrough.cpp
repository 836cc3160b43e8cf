// Walks the library surface end to end: build a scenario by hand, propagate
// it, measure closure, and check the coupling bound.

#include <iostream>

#include "closure/closure_analysis.hpp"
#include "closure/scenarios.hpp"

int main() {
    using namespace closure;

    MarkovScenario scenario = copy_scenario();
    std::cout << "copy scenario, steps 0..5\n";
    std::cout << "step  info_closure  func_closure  env_coupling  verdict\n";
    for (std::size_t n = 0; n <= 5; ++n) {
        ClosureMeasures m = measure(scenario, n);
        ClosureVerdict v = classify(m, 1e-9);
        std::cout << n << "     " << clamp_reported(m.info_closure) << "             " << clamp_reported(m.func_closure)
                  << "             " << clamp_reported(m.env_coupling) << "             "
                  << (v.informationally_closed ? "closed" : "open") << "\n";
    }

    CouplingBoundCheck bound = check_coupling_bound(scenario, 1);
    std::cout << "\ncoupling bound at step 1: lhs=" << bound.lhs << " rhs=" << bound.rhs << " slack=" << bound.slack
              << (bound.satisfied ? " (satisfied)" : " (violated)") << "\n";
    return 0;
}
