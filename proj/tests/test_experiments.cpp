#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "stepsched/errors.hpp"
#include "stepsched/experiments.hpp"

using namespace stepsched;

TEST_CASE("default starts") {
    const Objective quad = quadratic_objective({1.0, 4.0});
    const std::vector<double> x = default_start(quad);
    CHECK(quad.value(x) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x[0] == x[1]);

    const Objective polar = polar_pl_objective();
    const std::vector<double> p = default_start(polar);
    CHECK(p[0] == doctest::Approx(0.9 * std::cos(std::numbers::pi / 4.0)));
    CHECK(p[1] == doctest::Approx(0.9 * std::sin(std::numbers::pi / 4.0)));
}

TEST_CASE("exact-oracle ensembles have zero spread") {
    const Objective quad = quadratic_objective({1.0, 2.0});
    const auto sched = ScheduleSpec::cosine(0.5, 100);
    const EnsembleResult res = run_ensemble(
        quad, NoiseOracle::exact(), sched,
        EnsembleSpec{.T = 100, .n_seeds = 8, .base_seed = 5});
    CHECK(res.n_seeds == 8);
    CHECK(res.std_gap == 0.0);
    CHECK(res.ci95_halfwidth == 0.0);
    for (const double g : res.final_gaps) CHECK(g == res.final_gaps[0]);
}

TEST_CASE("n_seeds = 1 reduces to a single run") {
    const Objective quad = quadratic_objective({1.0, 2.0});
    const auto sched = ScheduleSpec::cosine(0.5, 50);
    const EnsembleResult res = run_ensemble(
        quad, NoiseOracle::additive_gaussian(0.1), sched,
        EnsembleSpec{.T = 50, .n_seeds = 1, .base_seed = 9});

    RunConfig cfg{.x1 = default_start(quad), .T = 50, .schedule = sched, .seed = 9};
    const RunTrace trace = sgd_run(quad, NoiseOracle::additive_gaussian(0.1), cfg);
    CHECK(res.mean_gap == trace.final_gap);
    CHECK(res.std_gap == 0.0);
}

TEST_CASE("ensemble results are independent of the job count") {
    const Objective quad = quadratic_objective({1.0, 4.0});
    const auto sched = ScheduleSpec::exponential_beta(0.25, 200, 1.0);
    const NoiseOracle oracle = NoiseOracle::additive_gaussian(0.2);

    EnsembleSpec one{.T = 200, .n_seeds = 16, .base_seed = 100, .curve_every = 7, .jobs = 1};
    EnsembleSpec many = one;
    many.jobs = 7;

    const EnsembleResult a = run_ensemble(quad, oracle, sched, one);
    const EnsembleResult b = run_ensemble(quad, oracle, sched, many);
    CHECK(a.final_gaps == b.final_gaps);
    CHECK(a.mean_gap == b.mean_gap);
    CHECK(a.std_gap == b.std_gap);
    CHECK(a.mean_gap_curve == b.mean_gap_curve);
    CHECK(a.curve_steps == b.curve_steps);
    CHECK(a.curve_steps.front() == 1);
    CHECK(a.curve_steps.back() == 201);  // final gap sentinel at T+1
}

TEST_CASE("diverging ensembles report the failing seeds") {
    const Objective quad = quadratic_objective({1.0});
    const auto sched = ScheduleSpec::constant(3.0, 100000);
    try {
        run_ensemble(quad, NoiseOracle::exact(), sched,
                     EnsembleSpec{.T = 100000, .n_seeds = 3, .base_seed = 40});
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("40") != std::string::npos);
        CHECK(msg.find("41") != std::string::npos);
        CHECK(msg.find("42") != std::string::npos);
    }
}

TEST_CASE("fit_rate recovers exact power laws") {
    const std::vector<std::int64_t> Ts{10, 100, 1000, 10000};
    std::vector<double> inv_t, inv_sqrt, flat;
    for (const std::int64_t T : Ts) {
        inv_t.push_back(3.0 / static_cast<double>(T));
        inv_sqrt.push_back(2.0 / std::sqrt(static_cast<double>(T)));
        flat.push_back(0.7);
    }
    const RateFit f1 = fit_rate(Ts, inv_t);
    CHECK(f1.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(f1.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit_rate(Ts, inv_sqrt).slope == doctest::Approx(-0.5).epsilon(1e-12));
    const RateFit f3 = fit_rate(Ts, flat);
    CHECK(f3.slope == doctest::Approx(0.0));
    CHECK(f3.r_squared == 1.0);

    CHECK_THROWS_AS(fit_rate(std::vector<std::int64_t>{1, 2}, std::vector<double>{1.0, 2.0}),
                    ParamError);
    CHECK_THROWS_AS(fit_rate(Ts, std::vector<double>{1.0, 0.0, 1.0, 1.0}), ParamError);
}

TEST_CASE("random starts are deterministic per seed and land on the right sets") {
    const Objective quad = quadratic_objective({1.0, 4.0});
    EnsembleSpec spec{.T = 1, .n_seeds = 1, .base_seed = 0, .random_start = true};
    const std::vector<double> a = ensemble_start(quad, spec, 123);
    const std::vector<double> b = ensemble_start(quad, spec, 123);
    const std::vector<double> c = ensemble_start(quad, spec, 124);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(quad.value(a) == doctest::Approx(1.0).epsilon(1e-12));

    const Objective polar = polar_pl_objective();
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::vector<double> p = ensemble_start(polar, spec, seed);
        CHECK(std::hypot(p[0], p[1]) <= 0.9 + 1e-12);
    }

    spec.random_start = false;
    CHECK(ensemble_start(quad, spec, 7) == default_start(quad));
}

TEST_CASE("noise adaptation study: shape of the report") {
    const Objective quad = quadratic_objective({1.0, 2.0});
    const double eta0 = 1.0 / quad.lipschitz();
    const std::int64_t T = 400;
    const std::vector<double> levels{0.0, 0.5};
    const std::vector<ScheduleSpec> schedules{
        ScheduleSpec::constant(eta0, T),
        ScheduleSpec::exponential_beta(eta0, T, 1.0),
        ScheduleSpec::cosine(eta0, T),
    };
    const NoiseAdaptationReport report =
        noise_adaptation_study(quad, levels, schedules, T, 32, 7, /*jobs=*/2);

    REQUIRE(report.rows.size() == 6);
    REQUIRE(report.curves.size() == 6);
    CHECK(report.curves[0].size() == static_cast<std::size_t>(T + 1));
    // sigma = 0 rows come first and have zero CI
    CHECK(report.rows[0].level == 0.0);
    CHECK(report.rows[0].ci95 == 0.0);
    CHECK(report.assessment.evaluated);
    CHECK(report.assessment.level == 0.5);

    // exact-oracle exponential/cosine runs already reach tiny gaps at T = 400
    for (const StudyRow& row : report.rows) {
        if (row.level == 0.0 && row.schedule != "constant") {
            CHECK(row.mean_gap < 1e-10);
        }
    }
}

TEST_CASE("bound validation: exact oracle cells sit below the theorem bounds") {
    const Objective quad = quadratic_objective({1.0, 4.0});
    const std::vector<NoiseOracle> oracles{NoiseOracle::exact()};
    const std::vector<ScheduleKind> kinds{ScheduleKind::Exponential, ScheduleKind::Cosine,
                                          ScheduleKind::PolyPL};
    const std::vector<std::int64_t> Ts{50, 100};
    const BoundValidationReport report =
        bound_validation(quad, oracles, kinds, Ts, /*n_seeds=*/30, /*base_seed=*/11, /*jobs=*/2);
    REQUIRE(report.rows.size() == 6);
    CHECK(report.all_within);
    for (const StudyRow& row : report.rows) {
        REQUIRE(row.bound.has_value());
        CHECK(row.mean_gap + row.ci95 <= *row.bound);
    }
}

TEST_CASE("10-D cosine ensemble lands within the cosine-PL bound") {
    const Objective quad = quadratic_objective(std::vector<double>(10, 1.0));
    const NoiseOracle oracle = NoiseOracle::additive_gaussian(0.1);
    const std::int64_t T = 10000;
    const ScheduleSpec sched = ScheduleSpec::cosine(1.0, T);  // eta0 = 1/L = 1
    const EnsembleResult res = run_ensemble(
        quad, oracle, sched,
        EnsembleSpec{.T = T, .n_seeds = 100, .base_seed = 1, .jobs = 2});

    const BoundValue bound = bound_cos_pl(BoundInputs{
        .L = 1, .mu = 1, .a = 0, .b = oracle.b(10), .delta1 = 1, .T = T});
    CHECK(res.mean_gap + res.ci95_halfwidth <= bound.total);
    CHECK(res.mean_gap > 0.0);
}

TEST_CASE("bound validation rejects unusable inputs") {
    const Objective quad = quadratic_objective({1.0, 4.0});
    const std::vector<NoiseOracle> oracles{NoiseOracle::exact()};
    const std::vector<ScheduleKind> kinds{ScheduleKind::Cosine};
    const std::vector<std::int64_t> Ts{50};
    CHECK_THROWS_AS(bound_validation(quad, oracles, kinds, Ts, 10, 0), ParamError);

    const Objective no_mu("plain", 1, 0.0, 1.0, std::nullopt,
                          [](std::span<const double> x) { return 0.5 * x[0] * x[0]; },
                          [](std::span<const double> x, std::span<double> g) { g[0] = x[0]; });
    CHECK_THROWS_AS(bound_validation(no_mu, oracles, kinds, Ts, 30, 0), CapabilityError);
}

TEST_CASE("studies enforce the n >= 30 CI rule") {
    const Objective quad = quadratic_objective({1.0, 2.0});
    const double eta0 = 1.0 / quad.lipschitz();
    const std::vector<double> levels{0.0};
    const std::vector<ScheduleSpec> schedules{ScheduleSpec::constant(eta0, 10)};
    CHECK_THROWS_AS(noise_adaptation_study(quad, levels, schedules, 10, 10, 0), ParamError);

    const std::vector<ScheduleKind> kinds{ScheduleKind::Cosine};
    const std::vector<std::int64_t> Ts{8, 16, 32};
    CHECK_THROWS_AS(rate_study(quad, NoiseOracle::exact(), kinds, Ts, 10, 0), ParamError);
}

TEST_CASE("noiseless runs contract geometrically over the 2^7..2^14 grid") {
    const Objective quad = quadratic_objective({1.0, 2.0});
    const double eta0 = 1.0 / quad.lipschitz();
    const std::vector<double> x1 = default_start(quad);

    for (const ScheduleKind kind : {ScheduleKind::Exponential, ScheduleKind::Cosine}) {
        std::vector<std::int64_t> fit_Ts;
        std::vector<double> fit_gaps;
        double prev = 2.0;
        double final_gap = 0.0;
        for (int p = 7; p <= 14; ++p) {
            const std::int64_t T = std::int64_t{1} << p;
            const ScheduleSpec spec = make_study_schedule(kind, eta0, T, 1.0, quad.pl_mu());
            RunConfig cfg{.x1 = x1, .T = T, .schedule = spec, .seed = 0};
            const double gap = sgd_run(quad, NoiseOracle::exact(), cfg).final_gap;
            CHECK(gap <= prev);
            prev = gap;
            final_gap = gap;
            // gaps underflow to exactly 0 past ~2^10; fit the positive prefix
            if (gap > 0.0) {
                fit_Ts.push_back(T);
                fit_gaps.push_back(gap);
            }
        }
        CHECK(final_gap <= 1e-6);
        REQUIRE(fit_Ts.size() >= 3);
        CHECK(fit_rate(fit_Ts, fit_gaps).slope < 0.0);
    }
}

TEST_CASE("rate study produces negative slopes under noise") {
    const Objective quad = quadratic_objective({1.0, 1.0});
    const NoiseOracle oracle = NoiseOracle::additive_gaussian(0.5);
    const std::vector<ScheduleKind> kinds{ScheduleKind::Cosine};
    const std::vector<std::int64_t> Ts{64, 256, 1024, 4096};
    const RatesReport report = rate_study(quad, oracle, kinds, Ts, 30, 3, /*jobs=*/2);
    REQUIRE(report.fits.size() == 1);
    CHECK(report.fits[0].first == "cosine");
    CHECK(report.fits[0].second.slope < -0.3);
    CHECK(report.rows.size() == 4);
}
