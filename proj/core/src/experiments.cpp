#include "stepsched/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "stepsched/errors.hpp"

namespace stepsched {

namespace {

constexpr std::uint64_t kStartSalt = 0x5354415254ULL;  // start-point sub-stream

std::vector<double> random_start(const Objective& obj, std::uint64_t seed) {
    Xoshiro256pp rng(seed ^ kStartSalt);
    if (obj.name() == "polar_pl") {
        const double theta = 2.0 * std::numbers::pi * rng.uniform01();
        const double r = 0.9 * std::sqrt(rng.uniform01());
        return {r * std::cos(theta), r * std::sin(theta)};
    }
    // Direction uniform in the cube, scaled to gap 1 (exact for the
    // homogeneous quadratics).
    std::vector<double> x(static_cast<std::size_t>(obj.dim()));
    for (double& xi : x) xi = 2.0 * rng.uniform01() - 1.0;
    const double f0 = obj.value(x) - obj.f_star();
    if (!(f0 > 0.0)) return default_start(obj);
    const double scale = std::sqrt(1.0 / f0);
    for (double& xi : x) xi *= scale;
    return x;
}

struct SeedOutcome {
    double final_gap = 0.0;
    std::vector<double> curve;
    bool diverged = false;
    std::int64_t diverged_at = 0;
};

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Worker exceptions other
// than divergence are rethrown after the join.
template <typename Fn>
void parallel_seeds(int n, int jobs, Fn&& fn) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

std::vector<double> default_start(const Objective& obj) {
    if (obj.name() == "polar_pl") {
        const double theta = std::numbers::pi / 4.0;
        return {0.9 * std::cos(theta), 0.9 * std::sin(theta)};
    }
    std::vector<double> ones(static_cast<std::size_t>(obj.dim()), 1.0);
    const double f1 = obj.value(ones) - obj.f_star();
    if (!(f1 > 0.0)) return ones;
    const double scale = std::sqrt(1.0 / f1);
    for (double& xi : ones) xi = scale;
    return ones;
}

std::vector<double> ensemble_start(const Objective& obj, const EnsembleSpec& spec,
                                   std::uint64_t seed) {
    if (spec.random_start) return random_start(obj, seed);
    return spec.x1.empty() ? default_start(obj) : spec.x1;
}

EnsembleResult run_ensemble(const Objective& obj, const NoiseOracle& oracle,
                            const ScheduleSpec& schedule, const EnsembleSpec& spec) {
    if (spec.n_seeds < 1) throw ParamError("run_ensemble: n_seeds must be >= 1");
    if (spec.jobs < 1) throw ParamError("run_ensemble: jobs must be >= 1");
    if (spec.curve_every < 0) throw ParamError("run_ensemble: curve_every must be >= 0");

    const std::vector<double> x1 = spec.x1.empty() ? default_start(obj) : spec.x1;

    std::vector<std::int64_t> curve_steps;
    if (spec.curve_every > 0) {
        for (std::int64_t t = 1; t <= spec.T; t += spec.curve_every) curve_steps.push_back(t);
        curve_steps.push_back(spec.T + 1);  // final gap
    }

    std::vector<SeedOutcome> outcomes(static_cast<std::size_t>(spec.n_seeds));
    parallel_seeds(spec.n_seeds, spec.jobs, [&](int i) {
        const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(i);
        RunConfig cfg{.x1 = spec.random_start ? ensemble_start(obj, spec, seed) : x1,
                      .T = spec.T,
                      .schedule = schedule,
                      .momentum = spec.momentum,
                      .seed = seed,
                      .record = {}};
        SeedOutcome& slot = outcomes[static_cast<std::size_t>(i)];
        try {
            const RunTrace trace = sgd_run(obj, oracle, cfg);
            slot.final_gap = trace.final_gap;
            if (!curve_steps.empty()) {
                slot.curve.reserve(curve_steps.size());
                for (std::size_t p = 0; p + 1 < curve_steps.size(); ++p) {
                    slot.curve.push_back(trace.value_gap[static_cast<std::size_t>(curve_steps[p] - 1)]);
                }
                slot.curve.push_back(trace.final_gap);
            }
        } catch (const DivergenceError& err) {
            slot.diverged = true;
            slot.diverged_at = err.iteration();
        }
    });

    std::vector<std::uint64_t> failed;
    std::int64_t first_failed_iter = 0;
    for (int i = 0; i < spec.n_seeds; ++i) {
        if (outcomes[static_cast<std::size_t>(i)].diverged) {
            if (failed.empty()) first_failed_iter = outcomes[static_cast<std::size_t>(i)].diverged_at;
            failed.push_back(spec.base_seed + static_cast<std::uint64_t>(i));
        }
    }
    if (!failed.empty()) {
        std::ostringstream msg;
        msg << "run_ensemble: " << failed.size() << " run(s) diverged; seeds:";
        for (const std::uint64_t s : failed) msg << ' ' << s;
        throw DivergenceError(msg.str(), first_failed_iter);
    }

    EnsembleResult result;
    result.n_seeds = spec.n_seeds;
    result.final_gaps.reserve(static_cast<std::size_t>(spec.n_seeds));
    for (const SeedOutcome& o : outcomes) result.final_gaps.push_back(o.final_gap);

    double sum = 0.0;
    for (const double g : result.final_gaps) sum += g;
    result.mean_gap = sum / static_cast<double>(spec.n_seeds);
    if (spec.n_seeds > 1) {
        double ss = 0.0;
        for (const double g : result.final_gaps) {
            const double d = g - result.mean_gap;
            ss += d * d;
        }
        result.std_gap = std::sqrt(ss / static_cast<double>(spec.n_seeds - 1));
    }
    result.ci95_halfwidth = 1.96 * result.std_gap / std::sqrt(static_cast<double>(spec.n_seeds));

    if (!curve_steps.empty()) {
        result.curve_steps = curve_steps;
        result.mean_gap_curve.assign(curve_steps.size(), 0.0);
        for (const SeedOutcome& o : outcomes) {
            for (std::size_t p = 0; p < curve_steps.size(); ++p) {
                result.mean_gap_curve[p] += o.curve[p];
            }
        }
        for (double& v : result.mean_gap_curve) v /= static_cast<double>(spec.n_seeds);
    }
    return result;
}

RateFit fit_rate(std::span<const std::int64_t> Ts, std::span<const double> mean_gaps) {
    if (Ts.size() != mean_gaps.size()) throw ParamError("fit_rate: length mismatch");
    if (Ts.size() < 3) throw ParamError("fit_rate: need at least 3 points");
    const std::size_t n = Ts.size();
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (Ts[i] < 1) throw ParamError("fit_rate: T values must be positive");
        if (!(mean_gaps[i] > 0.0)) throw ParamError("fit_rate: gaps must be positive");
        xs[i] = std::log(static_cast<double>(Ts[i]));
        ys[i] = std::log(mean_gaps[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw ParamError("fit_rate: T values must not all coincide");

    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy < 1e-30) {
        fit.r_squared = 1.0;  // constant data, perfectly fit
    } else {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
            ss_res += r * r;
        }
        fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

ScheduleSpec make_study_schedule(ScheduleKind kind, double eta0, std::int64_t T, double beta,
                                 std::optional<double> mu, double inverse_alpha) {
    switch (kind) {
        case ScheduleKind::Exponential:
            return ScheduleSpec::exponential_beta(eta0, T, beta);
        case ScheduleKind::Cosine:
            return ScheduleSpec::cosine(eta0, T);
        case ScheduleKind::Constant:
            return ScheduleSpec::constant(eta0, T);
        case ScheduleKind::InverseSqrt:
            return ScheduleSpec::inverse_sqrt(eta0, T, inverse_alpha);
        case ScheduleKind::InverseLinear:
            return ScheduleSpec::inverse_linear(eta0, T, inverse_alpha);
        case ScheduleKind::PolyPL:
            if (!mu) throw CapabilityError("PolyPL schedule needs a PL constant");
            return ScheduleSpec::poly_pl(eta0, T, *mu);
        case ScheduleKind::Stagewise:
        case ScheduleKind::CosineRestart:
            break;
    }
    throw ParamError("make_study_schedule: unsupported schedule kind for studies");
}

NoiseAdaptationReport noise_adaptation_study(const Objective& obj,
                                             std::span<const double> sigma_levels,
                                             std::span<const ScheduleSpec> schedules,
                                             std::int64_t T, int n_seeds,
                                             std::uint64_t base_seed, int jobs,
                                             std::vector<double> x1, std::int64_t curve_every) {
    if (sigma_levels.empty()) throw ParamError("noise_adaptation_study: no noise levels");
    if (schedules.empty()) throw ParamError("noise_adaptation_study: no schedules");
    if (n_seeds < 30) {
        throw ParamError(
            "noise_adaptation_study: n_seeds must be >= 30 for the normal-approximation CI");
    }
    for (const double sigma : sigma_levels) {
        if (sigma < 0.0) throw ParamError("noise_adaptation_study: sigma must be >= 0");
    }
    if (x1.empty()) x1 = default_start(obj);

    NoiseAdaptationReport report;
    for (const double sigma : sigma_levels) {
        const NoiseOracle oracle =
            sigma == 0.0 ? NoiseOracle::exact() : NoiseOracle::additive_gaussian(sigma);
        for (const ScheduleSpec& schedule : schedules) {
            EnsembleSpec spec{.T = T,
                              .n_seeds = n_seeds,
                              .base_seed = base_seed,
                              .x1 = x1,
                              .curve_every = curve_every,
                              .jobs = jobs};
            const EnsembleResult res = run_ensemble(obj, oracle, schedule, spec);
            report.rows.push_back(StudyRow{.level = sigma,
                                           .schedule = to_string(schedule.kind()),
                                           .T = T,
                                           .mean_gap = res.mean_gap,
                                           .ci95 = res.ci95_halfwidth});
            report.curve_steps.push_back(res.curve_steps);
            report.curves.push_back(res.mean_gap_curve);
        }
    }

    // Shape assessment at the largest positive noise level.
    const double top = *std::max_element(sigma_levels.begin(), sigma_levels.end());
    if (top > 0.0 && curve_every > 0) {
        std::size_t constant_idx = report.rows.size();
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            if (report.rows[i].level == top && report.rows[i].schedule == "constant") {
                constant_idx = i;
            }
        }
        if (constant_idx < report.rows.size()) {
            auto& assessment = report.assessment;
            assessment.evaluated = true;
            assessment.level = top;

            const auto& steps = report.curve_steps[constant_idx];
            const auto& curve = report.curves[constant_idx];
            const std::int64_t checkpoint = (3 * T + 3) / 4;  // ceil(3T/4)
            const auto it = std::lower_bound(steps.begin(), steps.end(), checkpoint);
            const std::size_t p34 = static_cast<std::size_t>(it - steps.begin());
            const double gap34 = curve[p34];
            const double gap_end = curve.back();
            assessment.plateau_decrease = gap34 > 0.0 ? (gap34 - gap_end) / gap34 : 0.0;
            assessment.constant_plateaus = assessment.plateau_decrease < 0.2;
            assessment.pass = assessment.constant_plateaus;

            const double constant_final = report.rows[constant_idx].mean_gap;
            for (std::size_t i = 0; i < report.rows.size(); ++i) {
                const StudyRow& row = report.rows[i];
                if (row.level != top) continue;
                if (row.schedule != "exponential" && row.schedule != "cosine") continue;
                const double ratio = row.mean_gap > 0.0
                                         ? constant_final / row.mean_gap
                                         : std::numeric_limits<double>::infinity();
                assessment.final_ratio.emplace_back(row.schedule, ratio);
                if (ratio < 2.0) assessment.pass = false;
            }
        }
    }
    return report;
}

BoundValidationReport bound_validation(const Objective& obj,
                                       std::span<const NoiseOracle> oracles,
                                       std::span<const ScheduleKind> kinds,
                                       std::span<const std::int64_t> Ts, int n_seeds,
                                       std::uint64_t base_seed, int jobs, double beta,
                                       std::vector<double> x1) {
    if (!obj.pl_mu()) {
        throw CapabilityError("bound_validation: objective has no certified PL constant");
    }
    if (n_seeds < 30) {
        throw ParamError("bound_validation: n_seeds must be >= 30 for the normal-approximation CI");
    }
    if (oracles.empty() || kinds.empty() || Ts.empty()) {
        throw ParamError("bound_validation: oracles, kinds and Ts must be non-empty");
    }
    if (x1.empty()) x1 = default_start(obj);

    const double L = obj.lipschitz();
    const double mu = *obj.pl_mu();
    const double delta1 = obj.value(x1) - obj.f_star();

    BoundValidationReport report;
    for (const NoiseOracle& oracle : oracles) {
        const double a = oracle.a();
        const double b = oracle.b(obj.dim());
        const double eta0 = 1.0 / (L * (1.0 + a));
        for (const ScheduleKind kind : kinds) {
            for (const std::int64_t T : Ts) {
                const ScheduleSpec schedule = make_study_schedule(kind, eta0, T, beta, mu);
                EnsembleSpec spec{.T = T,
                                  .n_seeds = n_seeds,
                                  .base_seed = base_seed,
                                  .x1 = x1,
                                  .jobs = jobs};
                const EnsembleResult res = run_ensemble(obj, oracle, schedule, spec);

                BoundInputs inputs;
                inputs.L = L;
                inputs.mu = mu;
                inputs.a = a;
                inputs.b = b;
                inputs.beta = beta;
                inputs.delta1 = delta1;
                inputs.T = T;
                double bound = 0.0;
                switch (kind) {
                    case ScheduleKind::Exponential: bound = bound_exp_pl(inputs).total; break;
                    case ScheduleKind::Cosine: bound = bound_cos_pl(inputs).total; break;
                    case ScheduleKind::PolyPL: bound = bound_poly_pl(inputs).total; break;
                    default:
                        throw ParamError("bound_validation: no PL theorem for schedule kind " +
                                         to_string(kind));
                }
                const bool within = res.mean_gap + res.ci95_halfwidth <= bound;
                report.rows.push_back(StudyRow{.level = oracle.sigma(),
                                               .schedule = to_string(kind),
                                               .T = T,
                                               .mean_gap = res.mean_gap,
                                               .ci95 = res.ci95_halfwidth,
                                               .bound = bound,
                                               .within_bound = within});
                if (!within) report.all_within = false;
            }
        }
    }
    return report;
}

RatesReport rate_study(const Objective& obj, const NoiseOracle& oracle,
                       std::span<const ScheduleKind> kinds, std::span<const std::int64_t> Ts,
                       int n_seeds, std::uint64_t base_seed, int jobs, double beta,
                       std::vector<double> x1) {
    if (kinds.empty() || Ts.empty()) throw ParamError("rate_study: kinds and Ts must be non-empty");
    if (n_seeds < 30) {
        throw ParamError("rate_study: n_seeds must be >= 30 for the normal-approximation CI");
    }
    if (x1.empty()) x1 = default_start(obj);
    const double eta0 = 1.0 / (obj.lipschitz() * (1.0 + oracle.a()));

    RatesReport report;
    for (const ScheduleKind kind : kinds) {
        std::vector<double> gaps;
        gaps.reserve(Ts.size());
        for (const std::int64_t T : Ts) {
            const ScheduleSpec schedule = make_study_schedule(kind, eta0, T, beta, obj.pl_mu());
            EnsembleSpec spec{.T = T,
                              .n_seeds = n_seeds,
                              .base_seed = base_seed,
                              .x1 = x1,
                              .jobs = jobs};
            const EnsembleResult res = run_ensemble(obj, oracle, schedule, spec);
            gaps.push_back(res.mean_gap);
            report.rows.push_back(StudyRow{.level = oracle.sigma(),
                                           .schedule = to_string(kind),
                                           .T = T,
                                           .mean_gap = res.mean_gap,
                                           .ci95 = res.ci95_halfwidth});
        }
        report.fits.emplace_back(to_string(kind), fit_rate(Ts, gaps));
    }
    return report;
}

}  // namespace stepsched
