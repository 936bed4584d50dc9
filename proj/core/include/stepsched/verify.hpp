#pragma once

#include <string>
#include <vector>

namespace stepsched {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SuiteResult {
    std::string suite;
    std::vector<CheckResult> checks;

    bool all_pass() const {
        for (const CheckResult& c : checks) {
            if (!c.pass) return false;
        }
        return true;
    }
};

/// Numeric certification of Lemmas 2-6 over the pinned grids, plus gamma
/// reference values.
SuiteResult verify_lemmas_suite();

/// PL certificate of the polar objective: ratio >= 1/24 - 1e-9 on the
/// 100 x 100 grid with r in (0.01, 1], theta in [0, 2pi).
SuiteResult verify_pl_suite();

/// Noise-model laws: conditional unbiasedness and the second-moment identity
/// E||g - grad f||^2 = a ||grad f||^2 + b, each within 1% over 1e6 draws at
/// 10 fixed points per oracle kind.
SuiteResult verify_noise_suite();

/// Noiseless per-step descent f(x_{t+1}) <= f(x_t) - eta_t/2 ||grad f(x_t)||^2
/// (+1e-12) for both built-in objectives under exact gradients and
/// eta_t <= 1/L.
SuiteResult verify_descent_suite();

}  // namespace stepsched
