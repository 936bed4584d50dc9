#include "stepsched/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stepsched/errors.hpp"

namespace stepsched {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ParamError(msg);
}

std::vector<std::int64_t> restart_stage_lengths(std::int64_t T0, double r, std::int64_t l) {
    std::vector<std::int64_t> stages;
    stages.reserve(static_cast<std::size_t>(l + 1));
    for (std::int64_t i = 0; i <= l; ++i) {
        const double len = static_cast<double>(T0) * std::pow(r, static_cast<double>(i));
        stages.push_back(std::llround(len));
    }
    return stages;
}

// eta_t for the exponential rule. When the schedule was built from beta, the
// power is evaluated as (beta/T)^(t/T) so that eta_T = eta0*beta/T exactly.
double exponential_step(const ScheduleSpec& spec, std::int64_t t) {
    if (spec.beta()) {
        const double base = *spec.beta() / static_cast<double>(spec.horizon());
        return spec.eta0() * std::pow(base, static_cast<double>(t) / static_cast<double>(spec.horizon()));
    }
    return spec.eta0() * std::pow(spec.alpha(), static_cast<double>(t));
}

double cosine_step(double eta0, std::int64_t t, std::int64_t T) {
    return 0.5 * eta0 * (1.0 + std::cos(static_cast<double>(t) * std::numbers::pi / static_cast<double>(T)));
}

// Kahan-compensated sum of step sizes over [t_from, t_to].
double direct_sum(const ScheduleSpec& spec, std::int64_t t_from, std::int64_t t_to) {
    double sum = 0.0, comp = 0.0;
    for (std::int64_t t = t_from; t <= t_to; ++t) {
        const double y = step_size(spec, t) - comp;
        const double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    return sum;
}

}  // namespace

std::string to_string(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::Exponential: return "exponential";
        case ScheduleKind::Cosine: return "cosine";
        case ScheduleKind::CosineRestart: return "cosine_restart";
        case ScheduleKind::InverseSqrt: return "inverse_sqrt";
        case ScheduleKind::InverseLinear: return "inverse_linear";
        case ScheduleKind::Stagewise: return "stagewise";
        case ScheduleKind::Constant: return "constant";
        case ScheduleKind::PolyPL: return "poly_pl";
    }
    throw ParamError("unknown schedule kind");
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
    std::string key = name;
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "exponential") return ScheduleKind::Exponential;
    if (key == "cosine") return ScheduleKind::Cosine;
    if (key == "cosine_restart") return ScheduleKind::CosineRestart;
    if (key == "inverse_sqrt") return ScheduleKind::InverseSqrt;
    if (key == "inverse_linear") return ScheduleKind::InverseLinear;
    if (key == "stagewise") return ScheduleKind::Stagewise;
    if (key == "constant") return ScheduleKind::Constant;
    if (key == "poly_pl") return ScheduleKind::PolyPL;
    throw ParamError("unknown schedule kind: " + name);
}

double exponential_alpha(double beta, std::int64_t T) {
    require(T >= 1, "exponential_alpha: T must be >= 1");
    require(beta >= 1.0, "exponential_alpha: beta must be >= 1");
    require(beta <= static_cast<double>(T),
            "exponential_alpha: beta must be <= T (the schedule would increase)");
    return std::pow(beta / static_cast<double>(T), 1.0 / static_cast<double>(T));
}

ScheduleSpec ScheduleSpec::exponential_beta(double eta0, std::int64_t T, double beta) {
    require(eta0 > 0.0, "schedule: eta0 must be positive");
    ScheduleSpec spec(ScheduleKind::Exponential);
    spec.eta0_ = eta0;
    spec.horizon_ = T;
    spec.alpha_ = stepsched::exponential_alpha(beta, T);  // validates beta, T
    spec.beta_ = beta;
    return spec;
}

ScheduleSpec ScheduleSpec::exponential_alpha(double eta0, std::int64_t T, double alpha) {
    require(eta0 > 0.0, "schedule: eta0 must be positive");
    require(T >= 1, "schedule: T must be >= 1");
    require(alpha > 0.0 && alpha <= 1.0, "exponential: alpha must be in (0, 1]");
    ScheduleSpec spec(ScheduleKind::Exponential);
    spec.eta0_ = eta0;
    spec.horizon_ = T;
    spec.alpha_ = alpha;
    return spec;
}

ScheduleSpec ScheduleSpec::exponential(double eta0, std::int64_t T, double alpha, double beta) {
    ScheduleSpec spec = exponential_beta(eta0, T, beta);
    const double derived = spec.alpha_;
    if (std::fabs(derived - alpha) > 1e-12 * std::max(std::fabs(derived), std::fabs(alpha))) {
        std::ostringstream msg;
        msg << "exponential: alpha " << alpha << " inconsistent with (beta/T)^(1/T) = " << derived;
        throw ParamError(msg.str());
    }
    return spec;
}

ScheduleSpec ScheduleSpec::cosine(double eta0, std::int64_t T) {
    require(eta0 > 0.0, "schedule: eta0 must be positive");
    require(T >= 1, "schedule: T must be >= 1");
    ScheduleSpec spec(ScheduleKind::Cosine);
    spec.eta0_ = eta0;
    spec.horizon_ = T;
    return spec;
}

ScheduleSpec ScheduleSpec::cosine_restart(double eta0, std::int64_t T0, double r, std::int64_t l) {
    require(eta0 > 0.0, "schedule: eta0 must be positive");
    require(T0 >= 1, "cosine_restart: T0 must be >= 1");
    require(r >= 1.0, "cosine_restart: r must be >= 1");
    require(l >= 0, "cosine_restart: l must be >= 0");
    ScheduleSpec spec(ScheduleKind::CosineRestart);
    spec.eta0_ = eta0;
    spec.restart_T0_ = T0;
    spec.restart_r_ = r;
    spec.restart_l_ = l;
    spec.stages_ = restart_stage_lengths(T0, r, l);
    spec.horizon_ = 0;
    for (const std::int64_t len : spec.stages_) spec.horizon_ += len;
    return spec;
}

ScheduleSpec ScheduleSpec::inverse_sqrt(double eta0, std::int64_t T, double alpha) {
    require(eta0 > 0.0, "schedule: eta0 must be positive");
    require(T >= 1, "schedule: T must be >= 1");
    require(alpha > 0.0, "inverse_sqrt: alpha must be positive");
    ScheduleSpec spec(ScheduleKind::InverseSqrt);
    spec.eta0_ = eta0;
    spec.horizon_ = T;
    spec.alpha_ = alpha;
    return spec;
}

ScheduleSpec ScheduleSpec::inverse_linear(double eta0, std::int64_t T, double alpha) {
    require(eta0 > 0.0, "schedule: eta0 must be positive");
    require(T >= 1, "schedule: T must be >= 1");
    require(alpha > 0.0, "inverse_linear: alpha must be positive");
    ScheduleSpec spec(ScheduleKind::InverseLinear);
    spec.eta0_ = eta0;
    spec.horizon_ = T;
    spec.alpha_ = alpha;
    return spec;
}

ScheduleSpec ScheduleSpec::stagewise(double eta0, std::int64_t T,
                                     std::vector<std::int64_t> milestones, double factor) {
    require(eta0 > 0.0, "schedule: eta0 must be positive");
    require(T >= 1, "schedule: T must be >= 1");
    require(factor > 0.0 && factor < 1.0, "stagewise: factor must be in (0, 1)");
    for (std::size_t i = 0; i < milestones.size(); ++i) {
        require(milestones[i] >= 0 && milestones[i] < T,
                "stagewise: milestones must lie in [0, T)");
        if (i > 0) {
            require(milestones[i] > milestones[i - 1],
                    "stagewise: milestones must be strictly increasing");
        }
    }
    ScheduleSpec spec(ScheduleKind::Stagewise);
    spec.eta0_ = eta0;
    spec.horizon_ = T;
    spec.milestones_ = std::move(milestones);
    spec.factor_ = factor;
    return spec;
}

ScheduleSpec ScheduleSpec::constant(double eta0, std::int64_t T) {
    require(eta0 > 0.0, "schedule: eta0 must be positive");
    require(T >= 1, "schedule: T must be >= 1");
    ScheduleSpec spec(ScheduleKind::Constant);
    spec.eta0_ = eta0;
    spec.horizon_ = T;
    return spec;
}

ScheduleSpec ScheduleSpec::poly_pl(double eta0, std::int64_t T, double mu) {
    require(eta0 > 0.0, "schedule: eta0 must be positive");
    require(T >= 1, "schedule: T must be >= 1");
    require(mu > 0.0, "poly_pl: mu must be positive");
    ScheduleSpec spec(ScheduleKind::PolyPL);
    spec.eta0_ = eta0;
    spec.horizon_ = T;
    spec.mu_ = mu;
    return spec;
}

double step_size(const ScheduleSpec& spec, std::int64_t t) {
    if (t < 0) throw IndexError("step_size: t must be >= 0");
    switch (spec.kind()) {
        case ScheduleKind::Exponential:
            return exponential_step(spec, t);
        case ScheduleKind::Cosine:
            if (t > spec.horizon()) {
                throw IndexError("step_size: cosine schedule is horizon-bound, t must be in [0, T]");
            }
            return cosine_step(spec.eta0(), t, spec.horizon());
        case ScheduleKind::CosineRestart: {
            std::int64_t local = t;
            for (const std::int64_t len : spec.stage_lengths()) {
                if (local < len) return cosine_step(spec.eta0(), local, len);
                local -= len;
            }
            throw IndexError("step_size: cosine_restart index past the last stage");
        }
        case ScheduleKind::InverseSqrt:
            return spec.eta0() / (1.0 + spec.alpha() * std::sqrt(static_cast<double>(t)));
        case ScheduleKind::InverseLinear:
            return spec.eta0() / (1.0 + spec.alpha() * static_cast<double>(t));
        case ScheduleKind::Stagewise: {
            const auto& ms = spec.milestones();
            const auto hits = std::upper_bound(ms.begin(), ms.end(), t) - ms.begin();
            return spec.eta0() * std::pow(spec.decay_factor(), static_cast<double>(hits));
        }
        case ScheduleKind::Constant:
            return spec.eta0();
        case ScheduleKind::PolyPL: {
            const double td = static_cast<double>(t);
            const double poly = (2.0 * td + 1.0) / (spec.mu() * (td + 1.0) * (td + 1.0));
            return std::min(spec.eta0(), poly);
        }
    }
    throw ParamError("step_size: unknown schedule kind");
}

double schedule_sum(const ScheduleSpec& spec, std::int64_t t_from, std::int64_t t_to) {
    if (t_from > t_to) return 0.0;
    if (t_from < 0) throw IndexError("schedule_sum: range must start at t >= 0");
    // Validate the upper end against the same bound step_size enforces.
    step_size(spec, t_to);

    switch (spec.kind()) {
        case ScheduleKind::Exponential: {
            const std::int64_t n = t_to - t_from + 1;
            if (spec.alpha() == 1.0) return spec.eta0() * static_cast<double>(n);
            // eta0 alpha^from (1 - alpha^n) / (1 - alpha), with the 1-alpha
            // cancellations routed through expm1 (alpha is often 1 - O(1/T)).
            const double log_alpha =
                spec.beta() ? std::log(*spec.beta() / static_cast<double>(spec.horizon())) /
                                  static_cast<double>(spec.horizon())
                            : std::log(spec.alpha());
            const double ratio = std::expm1(static_cast<double>(n) * log_alpha) /
                                 std::expm1(log_alpha);
            return spec.eta0() * std::exp(static_cast<double>(t_from) * log_alpha) * ratio;
        }
        case ScheduleKind::Cosine:
            if (t_from == 1 && t_to == spec.horizon()) {
                // Sum of cos(t*pi/T) over 1..T is exactly -1.
                return spec.eta0() * static_cast<double>(spec.horizon() - 1) / 2.0;
            }
            return direct_sum(spec, t_from, t_to);
        default:
            return direct_sum(spec, t_from, t_to);
    }
}

}  // namespace stepsched
