#include "stepsched/problems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <utility>

#include "stepsched/errors.hpp"

namespace stepsched {

namespace {

void check_dim(const char* where, std::size_t got, int want) {
    if (got != static_cast<std::size_t>(want)) {
        std::ostringstream msg;
        msg << where << ": point has dimension " << got << ", objective expects " << want;
        throw ParamError(msg.str());
    }
}

double dot(std::span<const double> u, std::span<const double> v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
    return acc;
}

}  // namespace

Objective::Objective(std::string name, int dim, double f_star, double lipschitz,
                     std::optional<double> pl_mu, ValueFn value, GradFn gradient)
    : name_(std::move(name)),
      dim_(dim),
      f_star_(f_star),
      lipschitz_(lipschitz),
      pl_mu_(pl_mu),
      value_(std::move(value)),
      gradient_(std::move(gradient)) {
    if (dim_ < 1) throw ParamError("Objective: dimension must be positive");
    if (!(lipschitz_ > 0.0)) throw ParamError("Objective: L must be positive");
    if (pl_mu_ && !(*pl_mu_ > 0.0)) throw ParamError("Objective: mu must be positive");
}

double Objective::value(std::span<const double> x) const {
    check_dim("Objective::value", x.size(), dim_);
    return value_(x);
}

void Objective::gradient(std::span<const double> x, std::span<double> out) const {
    check_dim("Objective::gradient", x.size(), dim_);
    check_dim("Objective::gradient", out.size(), dim_);
    gradient_(x, out);
}

std::vector<double> Objective::gradient(std::span<const double> x) const {
    std::vector<double> out(static_cast<std::size_t>(dim_));
    gradient(x, out);
    return out;
}

Objective quadratic_objective(std::vector<double> lambdas) {
    if (lambdas.empty()) throw ParamError("quadratic_objective: lambdas must be non-empty");
    for (const double lam : lambdas) {
        if (!(lam > 0.0)) throw ParamError("quadratic_objective: all lambdas must be positive");
    }
    const double lip = *std::max_element(lambdas.begin(), lambdas.end());
    const double mu = *std::min_element(lambdas.begin(), lambdas.end());
    const int dim = static_cast<int>(lambdas.size());
    auto lam = std::make_shared<const std::vector<double>>(std::move(lambdas));
    return Objective(
        "quadratic", dim, 0.0, lip, mu,
        [lam](std::span<const double> x) {
            double acc = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) acc += (*lam)[i] * x[i] * x[i];
            return 0.5 * acc;
        },
        [lam](std::span<const double> x, std::span<double> out) {
            for (std::size_t i = 0; i < x.size(); ++i) out[i] = (*lam)[i] * x[i];
        });
}

Objective polar_pl_objective(double lipschitz) {
    if (!(lipschitz > 0.0)) throw ParamError("polar_pl_objective: L must be positive");
    return Objective(
        "polar_pl", 2, 0.0, lipschitz, kPolarMu,
        [](std::span<const double> x) {
            const double r = std::hypot(x[0], x[1]);
            if (r < 1e-12) return 0.0;
            const double theta = std::atan2(x[1], x[0]);
            const double amp = 2.0 + 0.5 * std::cos(theta) + std::cos(4.0 * theta);
            return amp * r * r * (5.0 / 3.0 - r);
        },
        [](std::span<const double> x, std::span<double> out) {
            const double r = std::hypot(x[0], x[1]);
            if (r < 1e-12) {
                // f = O(r^2), so the gradient's 1/r singularity is removable.
                out[0] = 0.0;
                out[1] = 0.0;
                return;
            }
            const double theta = std::atan2(x[1], x[0]);
            const double cos_t = std::cos(theta), sin_t = std::sin(theta);
            const double amp = 2.0 + 0.5 * cos_t + std::cos(4.0 * theta);
            const double dg_dr = (10.0 * r / 3.0 - 3.0 * r * r) * amp;
            const double dg_dtheta =
                (-0.5 * sin_t - 4.0 * std::sin(4.0 * theta)) * r * r * (5.0 / 3.0 - r);
            out[0] = cos_t * dg_dr - sin_t / r * dg_dtheta;
            out[1] = sin_t * dg_dr + cos_t / r * dg_dtheta;
        });
}

double pl_ratio(const Objective& obj, std::span<const double> x) {
    const double gap = obj.value(x) - obj.f_star();
    if (gap < 1e-15) {
        throw DegenerateError("pl_ratio: f(x) - f* below 1e-15, ratio undefined at minimizers");
    }
    const std::vector<double> grad = obj.gradient(x);
    return dot(grad, grad) / (2.0 * gap);
}

std::string to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::Exact: return "exact";
        case NoiseKind::AdditiveGaussian: return "additive";
        case NoiseKind::Relative: return "relative";
        case NoiseKind::Mixed: return "mixed";
    }
    throw ParamError("unknown noise kind");
}

NoiseKind noise_kind_from_string(const std::string& name) {
    if (name == "exact") return NoiseKind::Exact;
    if (name == "additive" || name == "additive_gaussian") return NoiseKind::AdditiveGaussian;
    if (name == "relative") return NoiseKind::Relative;
    if (name == "mixed") return NoiseKind::Mixed;
    throw ParamError("unknown noise kind: " + name);
}

NoiseOracle NoiseOracle::exact() { return NoiseOracle(NoiseKind::Exact, 0.0, 0.0); }

NoiseOracle NoiseOracle::additive_gaussian(double sigma) {
    if (sigma < 0.0) throw ParamError("NoiseOracle: sigma must be non-negative");
    return NoiseOracle(NoiseKind::AdditiveGaussian, 0.0, sigma);
}

NoiseOracle NoiseOracle::relative(double a) {
    if (a < 0.0) throw ParamError("NoiseOracle: a must be non-negative");
    return NoiseOracle(NoiseKind::Relative, a, 0.0);
}

NoiseOracle NoiseOracle::mixed(double a, double sigma) {
    if (a < 0.0) throw ParamError("NoiseOracle: a must be non-negative");
    if (sigma < 0.0) throw ParamError("NoiseOracle: sigma must be non-negative");
    return NoiseOracle(NoiseKind::Mixed, a, sigma);
}

void NoiseOracle::sample_gradient(const Objective& obj, std::span<const double> x,
                                  Xoshiro256pp& rng, std::span<double> out) const {
    check_dim("NoiseOracle::sample_gradient", out.size(), obj.dim());
    obj.gradient(x, out);
    if (kind_ == NoiseKind::Exact) return;

    if (kind_ == NoiseKind::Relative || kind_ == NoiseKind::Mixed) {
        // Spread a*||grad||^2 isotropically over the coordinates.
        const double scale = std::sqrt(a_ * dot(out, out) / static_cast<double>(out.size()));
        for (double& g : out) g += scale * rng.normal();
    }
    if (kind_ == NoiseKind::AdditiveGaussian || kind_ == NoiseKind::Mixed) {
        for (double& g : out) g += sigma_ * rng.normal();
    }
}

std::vector<double> NoiseOracle::sample_gradient(const Objective& obj, std::span<const double> x,
                                                 Xoshiro256pp& rng) const {
    std::vector<double> out(static_cast<std::size_t>(obj.dim()));
    sample_gradient(obj, x, rng, out);
    return out;
}

}  // namespace stepsched
