#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stepsched {

enum class ScheduleKind {
    Exponential,
    Cosine,
    CosineRestart,
    InverseSqrt,
    InverseLinear,
    Stagewise,
    Constant,
    PolyPL,
};

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

/// Decay factor alpha = (beta/T)^(1/T) of the exponential schedule.
/// Requires 1 <= beta <= T; the result is <= 1 and increasing in beta.
double exponential_alpha(double beta, std::int64_t T);

/// An immutable step-size rule: kind, parameters and horizon.
///
/// Construction goes through the named factories, which validate all
/// parameter-domain constraints. Instances are safe to share across threads.
class ScheduleSpec {
public:
    /// eta_t = eta0 * alpha^t with alpha derived as (beta/T)^(1/T), beta in [1, T].
    static ScheduleSpec exponential_beta(double eta0, std::int64_t T, double beta);
    /// eta_t = eta0 * alpha^t with alpha in (0, 1] given directly.
    static ScheduleSpec exponential_alpha(double eta0, std::int64_t T, double alpha);
    /// Both parameters given; they must agree to 1e-12 relative.
    static ScheduleSpec exponential(double eta0, std::int64_t T, double alpha, double beta);
    /// eta_t = eta0/2 * (1 + cos(t*pi/T)), defined on t in [0, T].
    static ScheduleSpec cosine(double eta0, std::int64_t T);
    /// Restarted cosine: l+1 stages of lengths round(T0 * r^i), each a fresh
    /// cosine schedule evaluated at local index 0..T_i-1.
    static ScheduleSpec cosine_restart(double eta0, std::int64_t T0, double r, std::int64_t l);
    /// eta_t = eta0 / (1 + alpha * sqrt(t)).
    static ScheduleSpec inverse_sqrt(double eta0, std::int64_t T, double alpha);
    /// eta_t = eta0 / (1 + alpha * t).
    static ScheduleSpec inverse_linear(double eta0, std::int64_t T, double alpha);
    /// Piecewise constant; the step is cut by `factor` at each milestone.
    static ScheduleSpec stagewise(double eta0, std::int64_t T,
                                  std::vector<std::int64_t> milestones, double factor);
    static ScheduleSpec constant(double eta0, std::int64_t T);
    /// eta_t = min(eta0, (2t+1) / (mu (t+1)^2)) with eta0 standing in for
    /// 1/(L(1+a)); mu is the PL constant of the target objective.
    static ScheduleSpec poly_pl(double eta0, std::int64_t T, double mu);

    ScheduleKind kind() const { return kind_; }
    double eta0() const { return eta0_; }
    /// Total number of steps: T, or the summed stage lengths for CosineRestart.
    std::int64_t horizon() const { return horizon_; }

    double alpha() const { return alpha_; }
    std::optional<double> beta() const { return beta_; }
    double decay_factor() const { return factor_; }
    double mu() const { return mu_; }
    const std::vector<std::int64_t>& milestones() const { return milestones_; }

    std::int64_t restart_T0() const { return restart_T0_; }
    double restart_r() const { return restart_r_; }
    std::int64_t restart_l() const { return restart_l_; }
    /// Stage lengths T_i = round(T0 * r^i), i = 0..l (CosineRestart only).
    const std::vector<std::int64_t>& stage_lengths() const { return stages_; }

private:
    explicit ScheduleSpec(ScheduleKind kind) : kind_(kind) {}

    ScheduleKind kind_;
    double eta0_ = 0.0;
    std::int64_t horizon_ = 0;
    double alpha_ = 1.0;
    std::optional<double> beta_;
    double factor_ = 1.0;
    double mu_ = 0.0;
    std::vector<std::int64_t> milestones_;
    std::int64_t restart_T0_ = 0;
    double restart_r_ = 1.0;
    std::int64_t restart_l_ = 0;
    std::vector<std::int64_t> stages_;
};

/// eta_t for the given rule.
///
/// Indexing: the optimizer's main loop evaluates t = 1..T; t = 0 is accepted
/// and returns eta0 for every kind except CosineRestart, whose global index
/// runs over 0..horizon-1 (stage-local t starts at 0, as in the restart
/// algorithm). Cosine is horizon-bound: t outside [0, T] is an IndexError.
double step_size(const ScheduleSpec& spec, std::int64_t t);

/// Sum of eta_t over t_from..t_to (inclusive). Closed form for Exponential
/// (geometric series) and for Cosine over the full range 1..T; direct
/// summation otherwise. An empty range (t_from > t_to) sums to zero.
double schedule_sum(const ScheduleSpec& spec, std::int64_t t_from, std::int64_t t_to);

}  // namespace stepsched
