#include "stepsched/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stepsched/bounds.hpp"
#include "stepsched/experiments.hpp"
#include "stepsched/optimizer.hpp"
#include "stepsched/problems.hpp"
#include "stepsched/rng.hpp"
#include "stepsched/schedules.hpp"

namespace stepsched {

namespace {

std::string detail_value(const char* label, double v) {
    std::ostringstream out;
    out << label << " = " << v;
    return out.str();
}

/// n log-spaced integers in [lo, hi], deduplicated and sorted.
std::vector<std::int64_t> log_spaced(std::int64_t lo, std::int64_t hi, int n) {
    std::vector<std::int64_t> out;
    const double llo = std::log(static_cast<double>(lo));
    const double lhi = std::log(static_cast<double>(hi));
    for (int i = 0; i < n; ++i) {
        const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        out.push_back(std::llround(std::exp(llo + f * (lhi - llo))));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct MomentCheck {
    double max_rel_dev = 0.0;     // second-moment law
    double max_se_units = 0.0;    // unbiasedness, in standard errors
};

MomentCheck noise_moments(const Objective& obj, const NoiseOracle& oracle,
                          std::span<const std::vector<double>> points, int draws,
                          std::uint64_t seed) {
    MomentCheck result;
    const int d = obj.dim();
    std::vector<double> grad(static_cast<std::size_t>(d));
    std::vector<double> sample(static_cast<std::size_t>(d));
    std::vector<double> coord_sum(static_cast<std::size_t>(d));

    Xoshiro256pp rng(seed);
    for (const std::vector<double>& x : points) {
        obj.gradient(x, grad);
        double grad_sq = 0.0;
        for (const double g : grad) grad_sq += g * g;
        const double target = oracle.a() * grad_sq + oracle.b(d);

        std::fill(coord_sum.begin(), coord_sum.end(), 0.0);
        double sq_sum = 0.0;
        for (int k = 0; k < draws; ++k) {
            oracle.sample_gradient(obj, x, rng, sample);
            double sq = 0.0;
            for (int i = 0; i < d; ++i) {
                const double diff = sample[static_cast<std::size_t>(i)] -
                                    grad[static_cast<std::size_t>(i)];
                sq += diff * diff;
                coord_sum[static_cast<std::size_t>(i)] += diff;
            }
            sq_sum += sq;
        }
        const double empirical = sq_sum / draws;

        if (target == 0.0) {
            result.max_rel_dev = std::max(result.max_rel_dev, std::fabs(empirical));
        } else {
            result.max_rel_dev =
                std::max(result.max_rel_dev, std::fabs(empirical - target) / target);
        }

        // Per-coordinate noise std under the isotropic constructions.
        const double coord_var = target / static_cast<double>(d);
        if (coord_var > 0.0) {
            const double se = std::sqrt(coord_var / draws);
            for (int i = 0; i < d; ++i) {
                const double mean_dev =
                    std::fabs(coord_sum[static_cast<std::size_t>(i)] / draws);
                result.max_se_units = std::max(result.max_se_units, mean_dev / se);
            }
        }
    }
    return result;
}

CheckResult descent_check(const std::string& name, const Objective& obj,
                          const ScheduleSpec& schedule, std::int64_t T) {
    RunConfig cfg{.x1 = default_start(obj), .T = T, .schedule = schedule, .seed = 1};
    const RunTrace trace = sgd_run(obj, NoiseOracle::exact(), cfg);
    double worst = -1e308;
    bool ok = true;
    for (std::int64_t t = 1; t <= T; ++t) {
        const double before = trace.value_gap[static_cast<std::size_t>(t - 1)];
        const double after =
            (t == T) ? trace.final_gap : trace.value_gap[static_cast<std::size_t>(t)];
        const double allowed = before -
                               0.5 * trace.eta[static_cast<std::size_t>(t - 1)] *
                                   trace.grad_sq[static_cast<std::size_t>(t - 1)] +
                               1e-12;
        worst = std::max(worst, after - allowed);
        if (after > allowed) ok = false;
    }
    return {name, ok, detail_value("max violation", worst)};
}

}  // namespace

SuiteResult verify_lemmas_suite() {
    SuiteResult suite{.suite = "lemmas", .checks = {}};

    {  // gamma reference values
        const double g1 = gamma_fn(1.0);
        const double g_half = gamma_fn(0.5);
        const double g_73 = gamma_fn(7.0 / 3.0);
        const double dev = std::max({std::fabs(g1 - 1.0),
                                     std::fabs(g_half - std::sqrt(std::numbers::pi)) /
                                         std::sqrt(std::numbers::pi),
                                     std::fabs(g_73 - 1.1906393487589989) / 1.1906393487589989});
        suite.checks.push_back({"gamma at 1, 1/2, 7/3 (rel err <= 1e-10)", dev <= 1e-10,
                                detail_value("max rel err", dev)});
    }

    {  // Lemma 2: unrolled recursion equals direct iteration
        Xoshiro256pp rng(12345);
        double worst = 0.0;
        bool ok = true;
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<double> A(50), B(50);
            for (double& v : A) v = 1.2 * rng.uniform01();
            for (double& v : B) v = 2.0 * rng.uniform01();
            const double X1 = 3.0 * rng.uniform01();
            const Lemma2Result res = verify_lemma2(A, B, X1);
            const double scale = std::max({std::fabs(res.direct), std::fabs(res.unrolled), 1e-300});
            const double rel = std::fabs(res.direct - res.unrolled) / scale;
            worst = std::max(worst, rel);
            if (rel > 1e-12) ok = false;
        }
        suite.checks.push_back({"lemma2: unrolled == direct on 50 random recursions", ok,
                                detail_value("max rel dev", worst)});
    }

    {  // Lemma 3: residual over 200 log-spaced T up to 1e6
        double worst = 0.0;
        for (const std::int64_t T : log_spaced(1, 1000000, 200)) {
            worst = std::max(worst, verify_lemma3(T));
        }
        suite.checks.push_back({"lemma3: |sum cos(t pi/T) + 1| <= 1e-10, T <= 1e6", worst <= 1e-10,
                                detail_value("max residual", worst)});
    }

    {  // Lemma 4: full integer grid
        bool ok = true;
        std::int64_t checked = 0;
        for (std::int64_t T = 3; T <= 1000 && ok; ++T) {
            for (std::int64_t beta = 1; beta < T; ++beta) {
                const Lemma4Result res = verify_lemma4(static_cast<double>(beta), T);
                ++checked;
                if (!res.alpha_ok || !res.ratio_ok) {
                    ok = false;
                    break;
                }
            }
        }
        std::ostringstream detail;
        detail << checked << " (beta, T) pairs";
        suite.checks.push_back(
            {"lemma4: alpha >= 0.69 and tail ratio bound, T in 3..1000", ok, detail.str()});
    }

    {  // Lemma 5 over a log grid
        bool ok = true;
        for (const std::int64_t num : log_spaced(1, 1000000000000, 200)) {
            const double x = static_cast<double>(num) * 1e-6;  // 1e-6 .. 1e6
            if (!verify_lemma5(x)) ok = false;
        }
        suite.checks.push_back({"lemma5: 1 - x <= ln(1/x) on x in 1e-6..1e6", ok, ""});
    }

    {  // Lemma 6 over the pinned grid
        const double as[] = {0.0, 0.5, 1.0, 4.0 / 3.0, 5.0 / 3.0, 2.0, 4.0};
        const double bs[] = {0.01, 0.1, 0.5, 1.0};
        const std::int64_t Ts[] = {10, 100, 10000};
        bool ok = true;
        double worst_margin = 1e308;
        for (const double a : as) {
            for (const double b : bs) {
                for (const std::int64_t T : Ts) {
                    const Lemma6Result res = verify_lemma6(a, b, T);
                    worst_margin = std::min(worst_margin, res.rhs - res.lhs);
                    if (!res.holds) ok = false;
                }
            }
        }
        suite.checks.push_back({"lemma6: exp-sum bound over the (a, b, T) grid", ok,
                                detail_value("min rhs-lhs margin", worst_margin)});
    }

    return suite;
}

SuiteResult verify_pl_suite() {
    SuiteResult suite{.suite = "pl", .checks = {}};
    const Objective polar = polar_pl_objective();

    double min_ratio = 1e308;
    for (int i = 0; i < 100; ++i) {
        const double r = 0.01 + 0.99 * static_cast<double>(i + 1) / 100.0;
        for (int j = 0; j < 100; ++j) {
            const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / 100.0;
            const std::vector<double> x{r * std::cos(theta), r * std::sin(theta)};
            min_ratio = std::min(min_ratio, pl_ratio(polar, x));
        }
    }
    const double floor = 1.0 / 24.0 - 1e-9;
    suite.checks.push_back({"polar PL ratio >= 1/24 - 1e-9 on 10^4 grid points",
                            min_ratio >= floor, detail_value("min ratio", min_ratio)});
    return suite;
}

SuiteResult verify_noise_suite() {
    SuiteResult suite{.suite = "noise", .checks = {}};
    constexpr int kDraws = 1000000;

    auto fixed_points = [](int dim) {
        std::vector<std::vector<double>> points;
        for (int k = 0; k < 10; ++k) {
            std::vector<double> x(static_cast<std::size_t>(dim));
            for (int i = 0; i < dim; ++i) {
                x[static_cast<std::size_t>(i)] =
                    0.25 * static_cast<double>(k + 1) * static_cast<double>(i + 1) /
                    static_cast<double>(dim);
            }
            points.push_back(std::move(x));
        }
        return points;
    };

    {  // exact oracle reproduces the gradient bit for bit
        const Objective quad = quadratic_objective({1.0, 4.0});
        Xoshiro256pp rng(9);
        bool ok = true;
        for (const std::vector<double>& x : fixed_points(2)) {
            const std::vector<double> g = NoiseOracle::exact().sample_gradient(quad, x, rng);
            const std::vector<double> want = quad.gradient(std::span<const double>(x));
            if (g != want) ok = false;
        }
        suite.checks.push_back({"exact: sampled gradient equals the true gradient", ok, ""});
    }

    struct Case {
        const char* name;
        Objective obj;
        NoiseOracle oracle;
        std::uint64_t seed;
    };
    const Case cases[] = {
        {"additive sigma=1 (d=4)", quadratic_objective({1.0, 2.0, 3.0, 4.0}),
         NoiseOracle::additive_gaussian(1.0), 101},
        {"relative a=1 (d=2)", quadratic_objective({1.0, 4.0}), NoiseOracle::relative(1.0), 202},
        {"mixed a=0.5 sigma=0.5 (d=2)", quadratic_objective({1.0, 4.0}),
         NoiseOracle::mixed(0.5, 0.5), 303},
    };
    for (const Case& c : cases) {
        const MomentCheck res =
            noise_moments(c.obj, c.oracle, fixed_points(c.obj.dim()), kDraws, c.seed);
        suite.checks.push_back(
            {std::string(c.name) + ": E||g-grad||^2 within 1% of a||grad||^2 + b",
             res.max_rel_dev <= 0.01, detail_value("max rel dev", res.max_rel_dev)});
        suite.checks.push_back({std::string(c.name) + ": per-coordinate bias within 4 SE",
                                res.max_se_units <= 4.0,
                                detail_value("max |bias|/SE", res.max_se_units)});
    }
    return suite;
}

SuiteResult verify_descent_suite() {
    SuiteResult suite{.suite = "descent", .checks = {}};
    const std::int64_t T = 500;

    const Objective quad = quadratic_objective({1.0, 4.0});
    const double eta_quad = 1.0 / quad.lipschitz();
    suite.checks.push_back(descent_check("quadratic + cosine eta0=1/L", quad,
                                         ScheduleSpec::cosine(eta_quad, T), T));
    suite.checks.push_back(descent_check("quadratic + exponential beta=1 eta0=1/L", quad,
                                         ScheduleSpec::exponential_beta(eta_quad, T, 1.0), T));

    const Objective polar = polar_pl_objective();
    const double eta_polar = 1.0 / polar.lipschitz();
    suite.checks.push_back(descent_check("polar + cosine eta0=1/L", polar,
                                         ScheduleSpec::cosine(eta_polar, T), T));
    suite.checks.push_back(descent_check("polar + exponential beta=1 eta0=1/L", polar,
                                         ScheduleSpec::exponential_beta(eta_polar, T, 1.0), T));
    return suite;
}

}  // namespace stepsched
