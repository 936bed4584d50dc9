#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stepsched/rng.hpp"

namespace stepsched {

/// A differentiable test function with known infimum, smoothness constant and
/// (when it holds) PL constant. Immutable and freely shareable.
class Objective {
public:
    using ValueFn = std::function<double(std::span<const double>)>;
    using GradFn = std::function<void(std::span<const double>, std::span<double>)>;

    Objective(std::string name, int dim, double f_star, double lipschitz,
              std::optional<double> pl_mu, ValueFn value, GradFn gradient);

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    double f_star() const { return f_star_; }
    /// Smoothness constant L (gradient Lipschitz constant).
    double lipschitz() const { return lipschitz_; }
    /// PL constant mu on the objective's declared region, if certified.
    std::optional<double> pl_mu() const { return pl_mu_; }

    double value(std::span<const double> x) const;
    void gradient(std::span<const double> x, std::span<double> out) const;
    std::vector<double> gradient(std::span<const double> x) const;

private:
    std::string name_;
    int dim_;
    double f_star_;
    double lipschitz_;
    std::optional<double> pl_mu_;
    ValueFn value_;
    GradFn gradient_;
};

/// f(x) = 1/2 sum_i lambda_i x_i^2 with all lambda_i > 0.
/// f* = 0, L = max lambda, mu = min lambda.
Objective quadratic_objective(std::vector<double> lambdas);

/// Numerically estimated smoothness constant of the polar objective: maximum
/// finite-difference Hessian norm over the region r <= 1 is ~30.60, rounded up.
inline constexpr double kPolarDefaultL = 30.7;

/// PL constant of the polar objective on r <= 1.
inline constexpr double kPolarMu = 1.0 / 24.0;

/// The 2-D non-convex test function f(x, y) = (2 + cos(theta)/2 + cos(4 theta))
/// * r^2 * (5/3 - r) in polar coordinates. f* = f(0,0) = 0; PL with mu = 1/24
/// on the region r <= 1. The gradient's 1/r factor is removable at the origin
/// (f = O(r^2)); points with r < 1e-12 return the analytic limit (0, 0).
///
/// No closed form is known for L; `lipschitz` defaults to the frozen numeric
/// estimate and may be overridden.
Objective polar_pl_objective(double lipschitz = kPolarDefaultL);

/// ||grad f(x)||^2 / (2 (f(x) - f*)). Throws DegenerateError when
/// f(x) - f* < 1e-15 (the ratio is undefined at minimizers).
double pl_ratio(const Objective& obj, std::span<const double> x);

enum class NoiseKind { Exact, AdditiveGaussian, Relative, Mixed };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

/// Stochastic gradient generator with conditional second moment
/// E ||g - grad f(x)||^2 = a ||grad f(x)||^2 + b. Stateless; all randomness
/// flows through the caller's stream.
///
///  - Exact:            g = grad f(x)                       (a = 0, b = 0)
///  - AdditiveGaussian: g = grad f(x) + N(0, sigma^2 I)     (a = 0, b = d sigma^2)
///  - Relative:         per-coordinate variance a||grad f||^2 / d  (b = 0)
///  - Mixed:            relative noise plus additive noise, drawn in that order
class NoiseOracle {
public:
    static NoiseOracle exact();
    static NoiseOracle additive_gaussian(double sigma);
    static NoiseOracle relative(double a);
    static NoiseOracle mixed(double a, double sigma);

    NoiseKind kind() const { return kind_; }
    double a() const { return a_; }
    double sigma() const { return sigma_; }
    /// Additive-noise floor b = dim * sigma^2.
    double b(int dim) const { return static_cast<double>(dim) * sigma_ * sigma_; }

    /// Draw a stochastic gradient at x into `out` (size = objective dim).
    void sample_gradient(const Objective& obj, std::span<const double> x,
                         Xoshiro256pp& rng, std::span<double> out) const;
    std::vector<double> sample_gradient(const Objective& obj, std::span<const double> x,
                                        Xoshiro256pp& rng) const;

private:
    NoiseOracle(NoiseKind kind, double a, double sigma) : kind_(kind), a_(a), sigma_(sigma) {}

    NoiseKind kind_;
    double a_;
    double sigma_;
};

}  // namespace stepsched
