#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stepsched/bounds.hpp"
#include "stepsched/optimizer.hpp"
#include "stepsched/problems.hpp"
#include "stepsched/schedules.hpp"

namespace stepsched {

/// The fixed start point studies use so confidence intervals reflect gradient
/// noise only: the all-ones direction scaled to gap 1 for quadratics,
/// (r, theta) = (0.9, pi/4) for the polar objective.
std::vector<double> default_start(const Objective& obj);

struct EnsembleSpec {
    std::int64_t T = 0;
    int n_seeds = 1;
    std::uint64_t base_seed = 0;
    std::vector<double> x1;     // empty = default_start(obj)
    bool random_start = false;  // per-seed start drawn from a seed-derived stream
    double momentum = 0.0;
    std::int64_t curve_every = 0;  // 0 = no mean-gap curve
    int jobs = 1;
};

/// Aggregate of an ensemble of runs over seeds base_seed..base_seed+n-1.
/// Reduction happens in seed order, so results do not depend on `jobs`.
struct EnsembleResult {
    int n_seeds = 0;
    double mean_gap = 0.0;
    double std_gap = 0.0;
    double ci95_halfwidth = 0.0;  // 1.96 * std / sqrt(n)
    std::vector<double> final_gaps;  // per seed, in seed order
    // Mean-gap curve at steps 1, 1+k, ... (value gap before the update) with a
    // final entry at step T+1 holding the mean final gap. Empty when no curve
    // was requested.
    std::vector<std::int64_t> curve_steps;
    std::vector<double> mean_gap_curve;
};

/// Start point the ensemble member with this seed uses: spec.x1 (or the
/// default start) unless random_start is set, in which case a draw from a
/// seed-derived side stream.
std::vector<double> ensemble_start(const Objective& obj, const EnsembleSpec& spec,
                                   std::uint64_t seed);

/// Runs one sgd_run per seed and aggregates final gaps. Throws
/// DivergenceError naming every failing seed if any run blows up.
EnsembleResult run_ensemble(const Objective& obj, const NoiseOracle& oracle,
                            const ScheduleSpec& schedule, const EnsembleSpec& spec);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares of ln(mean_gap) against ln(T). Needs >= 3 points,
/// all gaps positive.
RateFit fit_rate(std::span<const std::int64_t> Ts, std::span<const double> mean_gaps);

/// One line of a study report; `bound`/`within_bound` are set only by the
/// bound-validation study.
struct StudyRow {
    double level = 0.0;  // noise sigma
    std::string schedule;
    std::int64_t T = 0;
    double mean_gap = 0.0;
    double ci95 = 0.0;
    std::optional<double> bound;
    std::optional<bool> within_bound;
};

/// Builds the theory-prescribed schedule for a study cell: eta0 as given
/// (callers pass 1/(L(1+a))), exponential from beta, PolyPL from mu.
ScheduleSpec make_study_schedule(ScheduleKind kind, double eta0, std::int64_t T, double beta,
                                 std::optional<double> mu, double inverse_alpha = 1.0);

struct NoiseAdaptationReport {
    std::vector<StudyRow> rows;
    // Parallel to rows; populated when curve_every > 0.
    std::vector<std::vector<std::int64_t>> curve_steps;
    std::vector<std::vector<double>> curves;

    /// Shape check at the largest noise level: the constant step plateaus
    /// (last-quarter decrease of the mean-gap curve < 20%) while exponential
    /// and cosine end at least 2x lower.
    struct Assessment {
        bool evaluated = false;
        double level = 0.0;
        double plateau_decrease = 0.0;
        bool constant_plateaus = false;
        std::vector<std::pair<std::string, double>> final_ratio;  // constant/schedule
        bool pass = true;
    } assessment;
};

/// The three-noise-level study: every (sigma, schedule) cell reuses the same
/// hyperparameters, which is the entire point — schedules are built once by
/// the caller and shared across levels. sigma = 0 uses the exact oracle.
NoiseAdaptationReport noise_adaptation_study(const Objective& obj,
                                             std::span<const double> sigma_levels,
                                             std::span<const ScheduleSpec> schedules,
                                             std::int64_t T, int n_seeds,
                                             std::uint64_t base_seed, int jobs = 1,
                                             std::vector<double> x1 = {},
                                             std::int64_t curve_every = 1);

struct BoundValidationReport {
    std::vector<StudyRow> rows;
    bool all_within = true;
};

/// Empirical mean gap (with CI) against the matching convergence bound for
/// every (oracle, schedule kind, T) cell. eta0 = 1/(L(1+a)) as the bounds
/// require; kinds may be Exponential (exp-pl bound), Cosine (cos-pl) or
/// PolyPL (poly-pl). Requires a PL objective and n_seeds >= 30 (normal CI).
BoundValidationReport bound_validation(const Objective& obj,
                                       std::span<const NoiseOracle> oracles,
                                       std::span<const ScheduleKind> kinds,
                                       std::span<const std::int64_t> Ts, int n_seeds,
                                       std::uint64_t base_seed, int jobs = 1,
                                       double beta = 1.0, std::vector<double> x1 = {});

struct RatesReport {
    std::vector<StudyRow> rows;
    std::vector<std::pair<std::string, RateFit>> fits;  // per schedule kind
};

/// Mean final gap over a T grid per schedule kind, plus the log-log rate fit.
RatesReport rate_study(const Objective& obj, const NoiseOracle& oracle,
                       std::span<const ScheduleKind> kinds, std::span<const std::int64_t> Ts,
                       int n_seeds, std::uint64_t base_seed, int jobs = 1, double beta = 1.0,
                       std::vector<double> x1 = {});

}  // namespace stepsched
