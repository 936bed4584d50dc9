#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace stepsched {

/// Parameters for the theorem-bound evaluators. Each evaluator reads only the
/// fields its theorem uses and ignores the rest.
struct BoundInputs {
    double L = 1.0;       // smoothness constant
    double mu = 1.0;      // PL constant
    double a = 0.0;       // relative-noise coefficient
    double b = 0.0;       // additive-noise floor
    double beta = 1.0;    // exponential shape parameter
    double c = 2.0;       // step-size slack of the non-convex theorems (c > 1)
    double delta1 = 0.0;  // f(x_1) - f*
    std::int64_t T = 1;   // horizon
    std::int64_t restart_T0 = 2;
    double restart_r = 1.0;
    std::int64_t restart_l = 0;
};

/// A bound split into named additive terms; total == sum of terms.
struct BoundValue {
    double total = 0.0;
    std::vector<std::pair<std::string, double>> terms;
};

/// The exponential-PL theorem prints (L + a) in its decay exponent while its
/// proof derives L(1+a); ProofForm (the default) follows the proof.
enum class ExpPlExponent { ProofForm, AsPrinted };

/// The cosine-PL theorem statement absorbs a 2 exp(-4/3) factor from the
/// proof's final display into its constant; Proof keeps the factor.
enum class CosineNoiseForm { Statement, Proof };

/// Exponential step size under PL:
///   5 L C(beta) / (e^2 mu^2) * ln^2(T/beta)/T * b
///   + C(beta) exp(-0.69 mu/(L(1+a)) * T/ln(T/beta)) * delta1,
/// C(beta) = exp(2 mu beta / (L(1+a) ln(T/beta))). Requires T >= max(3, beta).
BoundValue bound_exp_pl(const BoundInputs& in,
                        ExpPlExponent exponent = ExpPlExponent::ProofForm);

/// Cosine step size under PL:
///   exp(-mu(T-1)/(2L(1+a))) * delta1
///   + pi^4 b / (32(1+a)T^4) * ((8T^2/mu)^(4/3) + (6T^2/mu)^(5/3)).
/// Requires T >= 2.
BoundValue bound_cos_pl(const BoundInputs& in,
                        CosineNoiseForm form = CosineNoiseForm::Statement);

/// Exponential step size, no PL (bounds E||grad f(x~)||^2):
///   3 L c (a+1) ln(T/beta)/(T-beta) * delta1 + b T / (c(a+1)(T-beta)).
/// Requires c > 1 and T > beta.
BoundValue bound_exp_noncvx(const BoundInputs& in);

/// Cosine step size, no PL:
///   4 L c (a+1)/(T-1) * delta1 + 21 b T / (4 pi^4 c L (a+1)(T-1)).
/// Requires c > 1 and T >= 2.
BoundValue bound_cos_noncvx(const BoundInputs& in);

/// Polynomial schedule min(1/(L(1+a)), (2t+1)/(mu(t+1)^2)) under PL:
///   L^2(1+a) b / (2 mu^3 T^2) + 2 L b / (mu^2 T)
///   + delta1 * L^2(1+a)^2/(mu^2 T^2) * (1 - mu/(L(1+a)))^(L(1+a)/mu).
/// Requires mu <= L(1+a).
BoundValue bound_poly_pl(const BoundInputs& in);

/// Cosine with restarts under PL. For r = 1 the closed form with
/// C1 = 6^(5/3) pi^4 b / (32(1+a)) and C2 = 1/(2L(1+a)); for r > 1 the
/// per-stage recursion D_i <= C1 (mu^(-4/3) T_i^(-4/3) + mu^(-5/3) T_i^(-2/3))
/// + exp(-C2 mu (T_i - 1)) D_{i-1}. Requires T0 >= 2.
BoundValue bound_restart_pl(const BoundInputs& in);

/// |sum_{t=1}^T cos(t pi / T) + 1|; the sum is exactly -1 for every T >= 1.
double verify_lemma3(std::int64_t T);

struct Lemma4Result {
    double alpha = 0.0;
    bool alpha_ok = false;  // alpha >= 0.69
    double ratio = 0.0;     // alpha^(T+1) / (1 - alpha)
    double ratio_bound = 0.0;
    bool ratio_ok = false;  // ratio <= 2 beta / ln(T/beta)
};

/// Checks alpha >= 0.69 and alpha^(T+1)/(1-alpha) <= 2 beta/ln(T/beta) at
/// alpha = (beta/T)^(1/T). Requires T >= 3 and 1 <= beta < T.
Lemma4Result verify_lemma4(double beta, std::int64_t T);

/// 1 - x <= ln(1/x) for x > 0 (within 1e-12 slack).
bool verify_lemma5(double x);

struct Lemma6Result {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// sum_{t=0}^T exp(-b t) t^a <= 2 exp(-a)(a/b)^a + Gamma(a+1)/b^(a+1),
/// with the 0^0 = 1 convention at a = 0. Requires b > 0 and a >= 0.
Lemma6Result verify_lemma6(double a, double b, std::int64_t T);

/// Gamma(x) for x > 0 via the Lanczos approximation (g = 7, 9 coefficients),
/// using Gamma(x) = Gamma(x+1)/x below 0.5. Relative accuracy ~1e-13.
double gamma_fn(double x);

struct Lemma2Result {
    double direct = 0.0;
    double unrolled = 0.0;
};

/// Iterates X_{k+1} = A_k X_k + B_k directly and via the unrolled product
/// formula prod A_i X_1 + sum_i prod_{j>i} A_j B_i; the two agree to 1e-12
/// relative (the lemma is tight for the equality recursion). Entries must be
/// non-negative.
Lemma2Result verify_lemma2(std::span<const double> A, std::span<const double> B, double X1);

}  // namespace stepsched
