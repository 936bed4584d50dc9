#include "stepsched/optimizer.hpp"

#include <cmath>
#include <sstream>

#include "stepsched/errors.hpp"

namespace stepsched {

namespace {

constexpr double kDivergenceLimit = 1e300;

double dot_self(std::span<const double> v) {
    double acc = 0.0;
    for (const double x : v) acc += x * x;
    return acc;
}

void guard_finite(double fval, double grad_sq, std::int64_t t) {
    const bool f_bad = !std::isfinite(fval) || std::fabs(fval) > kDivergenceLimit;
    const bool g_bad = !std::isfinite(grad_sq) || std::sqrt(grad_sq) > kDivergenceLimit;
    if (f_bad || g_bad) {
        std::ostringstream msg;
        msg << "SGD diverged at iteration " << t << " (f = " << fval
            << ", ||grad||^2 = " << grad_sq << ")";
        throw DivergenceError(msg.str(), t);
    }
}

}  // namespace

RunTrace sgd_run(const Objective& obj, const NoiseOracle& oracle, const RunConfig& cfg) {
    if (cfg.T < 1) throw ParamError("sgd_run: T must be >= 1");
    if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
        throw ParamError("sgd_run: momentum must be in [0, 1)");
    }
    if (cfg.x1.size() != static_cast<std::size_t>(obj.dim())) {
        throw ParamError("sgd_run: x1 dimension does not match the objective");
    }
    const ScheduleKind kind = cfg.schedule.kind();
    const bool horizon_bound = kind == ScheduleKind::Cosine || kind == ScheduleKind::CosineRestart;
    if (horizon_bound && cfg.schedule.horizon() < cfg.T) {
        throw ParamError("sgd_run: schedule horizon is shorter than the requested T");
    }
    if (cfg.record.mode == RecordIterates::Thinned && cfg.record.every < 1) {
        throw ParamError("sgd_run: thinned recording needs a stride >= 1");
    }

    const std::size_t dim = cfg.x1.size();
    RunTrace trace;
    trace.eta.reserve(static_cast<std::size_t>(cfg.T));
    trace.value_gap.reserve(static_cast<std::size_t>(cfg.T));
    trace.grad_sq.reserve(static_cast<std::size_t>(cfg.T));

    Xoshiro256pp rng(cfg.seed);
    std::vector<double> x = cfg.x1;
    std::vector<double> grad(dim), noisy(dim), velocity;
    if (cfg.momentum > 0.0) velocity.assign(dim, 0.0);

    for (std::int64_t t = 1; t <= cfg.T; ++t) {
        // Restart stages index from 0 (algorithm convention); main schedules from 1.
        const std::int64_t sched_t = (kind == ScheduleKind::CosineRestart) ? t - 1 : t;
        const double eta = step_size(cfg.schedule, sched_t);

        const double fval = obj.value(x);
        obj.gradient(x, grad);
        const double grad_sq = dot_self(grad);
        guard_finite(fval, grad_sq, t);

        trace.eta.push_back(eta);
        trace.value_gap.push_back(fval - obj.f_star());
        trace.grad_sq.push_back(grad_sq);
        const bool keep = cfg.record.mode == RecordIterates::All ||
                          (cfg.record.mode == RecordIterates::Thinned &&
                           (t - 1) % cfg.record.every == 0);
        if (keep) {
            trace.iterate_steps.push_back(t);
            trace.iterates.push_back(x);
        }

        oracle.sample_gradient(obj, x, rng, noisy);
        if (cfg.momentum > 0.0) {
            const double m = cfg.momentum;
            for (std::size_t i = 0; i < dim; ++i) {
                velocity[i] = m * velocity[i] + noisy[i];
                x[i] -= eta * (noisy[i] + m * velocity[i]);
            }
        } else {
            for (std::size_t i = 0; i < dim; ++i) x[i] -= eta * noisy[i];
        }
    }

    const double ffinal = obj.value(x);
    obj.gradient(x, grad);
    guard_finite(ffinal, dot_self(grad), cfg.T + 1);
    trace.final_point = std::move(x);
    trace.final_gap = ffinal - obj.f_star();
    return trace;
}

RunTrace sgd_restart_run(const Objective& obj, const NoiseOracle& oracle,
                         std::vector<double> x1, double eta0, std::int64_t T0, double r,
                         std::int64_t l, std::uint64_t seed, double momentum,
                         IterateRecording record) {
    const ScheduleSpec spec = ScheduleSpec::cosine_restart(eta0, T0, r, l);
    RunConfig cfg{.x1 = std::move(x1),
                  .T = spec.horizon(),
                  .schedule = spec,
                  .momentum = momentum,
                  .seed = seed,
                  .record = record};
    return sgd_run(obj, oracle, cfg);
}

std::pair<std::int64_t, std::vector<double>> sample_weighted_iterate(const RunTrace& trace,
                                                                     Xoshiro256pp& rng) {
    const std::size_t T = trace.eta.size();
    if (trace.iterates.size() != T) {
        throw CapabilityError(
            "sample_weighted_iterate: trace must record all iterates (RecordIterates::All)");
    }
    double total = 0.0;
    for (const double eta : trace.eta) total += eta;
    if (!(total > 0.0)) {
        throw DegenerateError("sample_weighted_iterate: step sizes sum to zero");
    }
    const double u = rng.uniform01() * total;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
        cumulative += trace.eta[i];
        if (u < cumulative) {
            return {static_cast<std::int64_t>(i + 1), trace.iterates[i]};
        }
    }
    // Roundoff put u at the very top of the last positive-weight bucket.
    for (std::size_t i = T; i-- > 0;) {
        if (trace.eta[i] > 0.0) return {static_cast<std::int64_t>(i + 1), trace.iterates[i]};
    }
    throw DegenerateError("sample_weighted_iterate: no positive step size");
}

double weighted_grad_sq(const RunTrace& trace) {
    double total = 0.0, weighted = 0.0;
    for (std::size_t i = 0; i < trace.eta.size(); ++i) {
        total += trace.eta[i];
        weighted += trace.eta[i] * trace.grad_sq[i];
    }
    if (!(total > 0.0)) {
        throw DegenerateError("weighted_grad_sq: step sizes sum to zero");
    }
    return weighted / total;
}

}  // namespace stepsched
