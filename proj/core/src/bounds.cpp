#include "stepsched/bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "stepsched/errors.hpp"
#include "stepsched/schedules.hpp"

namespace stepsched {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& msg) {
    if (!ok) throw ParamError(msg);
}

void check_common(const BoundInputs& in, bool needs_mu) {
    require(in.L > 0.0, "bound: L must be positive");
    require(in.a >= 0.0, "bound: a must be non-negative");
    require(in.b >= 0.0, "bound: b must be non-negative");
    require(in.delta1 >= 0.0, "bound: delta1 must be non-negative");
    require(in.T >= 1, "bound: T must be >= 1");
    if (needs_mu) require(in.mu > 0.0, "bound: mu must be positive");
}

BoundValue make_bound(std::vector<std::pair<std::string, double>> terms) {
    BoundValue out;
    out.terms = std::move(terms);
    for (const auto& [name, value] : out.terms) out.total += value;
    return out;
}

}  // namespace

BoundValue bound_exp_pl(const BoundInputs& in, ExpPlExponent exponent) {
    check_common(in, /*needs_mu=*/true);
    require(in.beta >= 1.0, "exp-pl bound requires beta >= 1");
    const double T = static_cast<double>(in.T);
    require(T >= std::max(3.0, in.beta), "exp-pl bound requires T >= max(3, beta)");

    const double la = in.L * (1.0 + in.a);
    const double decay_denom = (exponent == ExpPlExponent::AsPrinted) ? (in.L + in.a) : la;
    const double log_ratio = std::log(T / in.beta);

    double noise = 0.0;
    double transient = 0.0;
    if (log_ratio == 0.0) {
        // beta == T: C(beta) blows up; report the limit rather than NaN.
        noise = (in.b > 0.0) ? kInf : 0.0;
        if (in.delta1 > 0.0) {
            const double numer = 2.0 * in.mu * in.beta / la - 0.69 * in.mu * T / decay_denom;
            transient = numer > 0.0 ? kInf : (numer < 0.0 ? 0.0 : in.delta1);
        }
    } else {
        if (in.b > 0.0) {
            const double c_beta = std::exp(2.0 * in.mu * in.beta / (la * log_ratio));
            noise = 5.0 * in.L * c_beta / (std::exp(2.0) * in.mu * in.mu) * (log_ratio * log_ratio / T) *
                    in.b;
        }
        if (in.delta1 > 0.0) {
            // C(beta) and the decay share the 1/log factor; one exp avoids inf*0.
            const double combined =
                (2.0 * in.mu * in.beta / la - 0.69 * in.mu * T / decay_denom) / log_ratio;
            transient = std::exp(combined) * in.delta1;
        }
    }
    return make_bound({{"noise-floor", noise}, {"transient", transient}});
}

BoundValue bound_cos_pl(const BoundInputs& in, CosineNoiseForm form) {
    check_common(in, /*needs_mu=*/true);
    require(in.T >= 2, "cos-pl bound requires T >= 2");
    const double T = static_cast<double>(in.T);
    const double one_a = 1.0 + in.a;

    double transient = 0.0;
    if (in.delta1 > 0.0) {
        transient = std::exp(-in.mu * (T - 1.0) / (2.0 * in.L * one_a)) * in.delta1;
    }
    double noise = 0.0;
    if (in.b > 0.0) {
        const double first_factor =
            (form == CosineNoiseForm::Proof) ? 2.0 * std::exp(-4.0 / 3.0) : 1.0;
        const double inner = first_factor * std::pow(8.0 * T * T / in.mu, 4.0 / 3.0) +
                             std::pow(6.0 * T * T / in.mu, 5.0 / 3.0);
        noise = std::pow(kPi, 4) * in.b / (32.0 * one_a * T * T * T * T) * inner;
    }
    return make_bound({{"transient", transient}, {"noise-floor", noise}});
}

BoundValue bound_exp_noncvx(const BoundInputs& in) {
    check_common(in, /*needs_mu=*/false);
    require(in.beta >= 1.0, "exp-nc bound requires beta >= 1");
    require(in.c > 1.0, "exp-nc bound requires c > 1");
    const double T = static_cast<double>(in.T);
    require(T > in.beta, "exp-nc bound requires T > beta");

    const double transient =
        in.delta1 > 0.0
            ? 3.0 * in.L * in.c * (in.a + 1.0) * std::log(T / in.beta) / (T - in.beta) * in.delta1
            : 0.0;
    const double noise =
        in.b > 0.0 ? in.b * T / (in.c * (in.a + 1.0) * (T - in.beta)) : 0.0;
    return make_bound({{"transient", transient}, {"noise-floor", noise}});
}

BoundValue bound_cos_noncvx(const BoundInputs& in) {
    check_common(in, /*needs_mu=*/false);
    require(in.c > 1.0, "cos-nc bound requires c > 1");
    require(in.T >= 2, "cos-nc bound requires T >= 2");
    const double T = static_cast<double>(in.T);

    const double transient =
        in.delta1 > 0.0 ? 4.0 * in.L * in.c * (in.a + 1.0) / (T - 1.0) * in.delta1 : 0.0;
    const double noise =
        in.b > 0.0
            ? 21.0 * in.b * T / (4.0 * std::pow(kPi, 4) * in.c * in.L * (in.a + 1.0) * (T - 1.0))
            : 0.0;
    return make_bound({{"transient", transient}, {"noise-floor", noise}});
}

BoundValue bound_poly_pl(const BoundInputs& in) {
    check_common(in, /*needs_mu=*/true);
    const double la = in.L * (1.0 + in.a);
    require(in.mu <= la, "poly-pl bound requires mu <= L(1+a)");
    const double T = static_cast<double>(in.T);

    const double noise_quadratic =
        in.b > 0.0 ? in.L * in.L * (1.0 + in.a) * in.b / (2.0 * std::pow(in.mu, 3) * T * T) : 0.0;
    const double noise_linear = in.b > 0.0 ? 2.0 * in.L * in.b / (in.mu * in.mu * T) : 0.0;
    double transient = 0.0;
    if (in.delta1 > 0.0) {
        transient = in.delta1 * (la * la / (in.mu * in.mu * T * T)) *
                    std::pow(1.0 - in.mu / la, la / in.mu);
    }
    return make_bound({{"noise-quadratic", noise_quadratic},
                       {"noise-linear", noise_linear},
                       {"transient", transient}});
}

BoundValue bound_restart_pl(const BoundInputs& in) {
    check_common(in, /*needs_mu=*/true);
    require(in.restart_T0 >= 2, "restart bound requires T0 >= 2");
    require(in.restart_r >= 1.0, "restart bound requires r >= 1");
    require(in.restart_l >= 0, "restart bound requires l >= 0");

    const double one_a = 1.0 + in.a;
    const double c1 = std::pow(6.0, 5.0 / 3.0) * std::pow(kPi, 4) * in.b / (32.0 * one_a);
    const double c2 = 1.0 / (2.0 * in.L * one_a);
    const double T0 = static_cast<double>(in.restart_T0);
    const double l = static_cast<double>(in.restart_l);

    if (in.restart_r == 1.0) {
        const double T = (l + 1.0) * T0;
        const double effective = c2 * in.mu * (T - l - 1.0);
        double noise = 0.0;
        if (in.b > 0.0) {
            const double per_stage = std::pow(in.mu, -4.0 / 3.0) * std::pow(T0, -4.0 / 3.0) +
                                     std::pow(in.mu, -5.0 / 3.0) * std::pow(T0, -2.0 / 3.0);
            noise = c1 * per_stage * (1.0 - std::exp(-effective)) /
                    (1.0 - std::exp(-c2 * in.mu * (T0 - 1.0)));
        }
        const double transient = in.delta1 > 0.0 ? std::exp(-effective) * in.delta1 : 0.0;
        return make_bound({{"noise-floor", noise}, {"transient", transient}});
    }

    // r > 1: iterate the proof's per-stage recursion, tracking the noise
    // accumulation and the shrinking transient separately (the recursion is
    // linear, so the split is exact).
    double noise = 0.0;
    double transient_factor = 1.0;
    const ScheduleSpec spec =
        ScheduleSpec::cosine_restart(1.0, in.restart_T0, in.restart_r, in.restart_l);
    for (const std::int64_t stage_len : spec.stage_lengths()) {
        const double Ti = static_cast<double>(stage_len);
        const double shrink = std::exp(-c2 * in.mu * (Ti - 1.0));
        const double per_stage = c1 * (std::pow(in.mu, -4.0 / 3.0) * std::pow(Ti, -4.0 / 3.0) +
                                       std::pow(in.mu, -5.0 / 3.0) * std::pow(Ti, -2.0 / 3.0));
        noise = per_stage + shrink * noise;
        transient_factor *= shrink;
    }
    const double transient = in.delta1 > 0.0 ? transient_factor * in.delta1 : 0.0;
    return make_bound({{"noise-floor", noise}, {"transient", transient}});
}

double verify_lemma3(std::int64_t T) {
    require(T >= 1, "Lemma 3 requires T >= 1");
    // Evaluate in extended precision: the rounding of pi alone contributes a
    // systematic ~4e-17 * T error in double, which at T = 1e6 eats most of
    // the 1e-10 certification budget.
    constexpr long double kPiL = 3.14159265358979323846264338327950288L;
    long double sum = 0.0L;
    for (std::int64_t t = 1; t <= T; ++t) {
        sum += std::cos(kPiL * static_cast<long double>(t) / static_cast<long double>(T));
    }
    return static_cast<double>(std::fabs(sum + 1.0L));
}

Lemma4Result verify_lemma4(double beta, std::int64_t T) {
    require(T >= 3, "Lemma 4 requires T >= 3");
    require(beta >= 1.0, "Lemma 4 requires beta >= 1");
    require(beta < static_cast<double>(T),
            "Lemma 4 requires beta < T (alpha = 1 makes the ratio undefined)");
    Lemma4Result out;
    const double Td = static_cast<double>(T);
    out.alpha = std::pow(beta / Td, 1.0 / Td);
    out.alpha_ok = out.alpha >= 0.69;
    out.ratio = std::pow(out.alpha, Td + 1.0) / (1.0 - out.alpha);
    out.ratio_bound = 2.0 * beta / std::log(Td / beta);
    out.ratio_ok = out.ratio <= out.ratio_bound;
    return out;
}

bool verify_lemma5(double x) {
    require(x > 0.0, "Lemma 5 requires x > 0");
    return 1.0 - x <= -std::log(x) + 1e-12;
}

Lemma6Result verify_lemma6(double a, double b, std::int64_t T) {
    require(b > 0.0, "Lemma 6 requires b > 0");
    require(a >= 0.0, "Lemma 6 requires a >= 0");
    require(T >= 0, "Lemma 6 requires T >= 0");
    Lemma6Result out;
    double sum = 0.0, comp = 0.0;
    for (std::int64_t t = 0; t <= T; ++t) {
        const double td = static_cast<double>(t);
        const double term = std::exp(-b * td) * std::pow(td, a);  // pow(0, 0) == 1
        const double y = term - comp;
        const double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    out.lhs = sum;
    out.rhs = 2.0 * std::exp(-a) * std::pow(a / b, a) + gamma_fn(a + 1.0) / std::pow(b, a + 1.0);
    out.holds = out.lhs <= out.rhs + 1e-9 * out.rhs;
    return out;
}

double gamma_fn(double x) {
    require(x > 0.0, "gamma_fn requires x > 0");
    if (x < 0.5) return gamma_fn(x + 1.0) / x;

    // Lanczos approximation, g = 7, 9-term coefficient set.
    static constexpr double kCoeffs[9] = {
        0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
    };
    const double z = x - 1.0;
    double series = kCoeffs[0];
    for (int i = 1; i < 9; ++i) series += kCoeffs[i] / (z + static_cast<double>(i));
    const double t = z + 7.5;
    return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * series;
}

Lemma2Result verify_lemma2(std::span<const double> A, std::span<const double> B, double X1) {
    require(A.size() == B.size(), "Lemma 2: A and B must have equal length");
    require(X1 >= 0.0, "Lemma 2: X1 must be non-negative");
    for (std::size_t i = 0; i < A.size(); ++i) {
        require(A[i] >= 0.0 && B[i] >= 0.0, "Lemma 2: entries must be non-negative");
    }
    Lemma2Result out;

    double x = X1;
    for (std::size_t i = 0; i < A.size(); ++i) x = A[i] * x + B[i];
    out.direct = x;

    const std::size_t n = A.size();
    std::vector<double> suffix(n + 1, 1.0);  // suffix[i] = prod_{j >= i} A_j
    for (std::size_t i = n; i-- > 0;) suffix[i] = A[i] * suffix[i + 1];
    double acc = suffix[0] * X1;
    for (std::size_t i = 0; i < n; ++i) acc += suffix[i + 1] * B[i];
    out.unrolled = acc;
    return out;
}

}  // namespace stepsched
