#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "stepsched/problems.hpp"
#include "stepsched/rng.hpp"
#include "stepsched/schedules.hpp"

namespace stepsched {

enum class RecordIterates { None, Thinned, All };

struct IterateRecording {
    RecordIterates mode = RecordIterates::None;
    std::int64_t every = 1;  // stride for Thinned
};

/// Everything one SGD run needs besides the objective and the oracle.
struct RunConfig {
    std::vector<double> x1;
    std::int64_t T = 0;
    ScheduleSpec schedule;
    double momentum = 0.0;  // Nesterov coefficient, no dampening; 0 = plain SGD
    std::uint64_t seed = 0;
    IterateRecording record;
};

/// Per-iteration record of a run. Index i corresponds to iteration t = i+1:
/// eta[i] is the step applied at t, value_gap[i] = f(x_t) - f*, and
/// grad_sq[i] = ||grad f(x_t)||^2, all evaluated before the update.
struct RunTrace {
    std::vector<double> eta;
    std::vector<double> value_gap;
    std::vector<double> grad_sq;
    std::vector<double> final_point;  // x_{T+1}
    double final_gap = 0.0;           // f(x_{T+1}) - f*
    std::vector<std::int64_t> iterate_steps;
    std::vector<std::vector<double>> iterates;

    std::int64_t iterations() const { return static_cast<std::int64_t>(eta.size()); }
};

/// Runs x_{t+1} = x_t - eta_t g_t for t = 1..T (with the Nesterov variant
/// v_t = m v_{t-1} + g_t, x_{t+1} = x_t - eta_t (g_t + m v_t) when m > 0).
///
/// Main schedules are evaluated at t = 1..T; a CosineRestart schedule is
/// evaluated at t-1 so each stage starts at its local index 0, following the
/// restart algorithm. The (seed, config) pair determines the trace bitwise.
/// Throws DivergenceError when |f| or ||grad f|| exceeds 1e300 or goes
/// non-finite.
RunTrace sgd_run(const Objective& obj, const NoiseOracle& oracle, const RunConfig& cfg);

/// Cosine schedule with warm restarts: l+1 stages of lengths round(T0 r^i);
/// within stage i the step at local index t is eta0/2 (1 + cos(t pi / T_i)).
/// The final point of each stage seeds the next (momentum state, when used,
/// carries across stage boundaries); the trace spans sum(T_i) iterations.
RunTrace sgd_restart_run(const Objective& obj, const NoiseOracle& oracle,
                         std::vector<double> x1, double eta0, std::int64_t T0, double r,
                         std::int64_t l, std::uint64_t seed, double momentum = 0.0,
                         IterateRecording record = {});

/// Draws t in {1..T} with probability eta_t / sum_i eta_i and returns (t, x_t).
/// Requires the trace to hold all iterates (RecordIterates::All).
std::pair<std::int64_t, std::vector<double>> sample_weighted_iterate(const RunTrace& trace,
                                                                     Xoshiro256pp& rng);

/// sum_t eta_t ||grad f(x_t)||^2 / sum_t eta_t — the expectation the
/// random-iterate output rule estimates.
double weighted_grad_sq(const RunTrace& trace);

}  // namespace stepsched
