#include <cmath>
#include <vector>

#include "doctest.h"
#include "stepsched/errors.hpp"
#include "stepsched/rng.hpp"
#include "stepsched/schedules.hpp"

using namespace stepsched;

namespace {

// Independent summation oracle: plain Kahan loop over step_size.
double brute_sum(const ScheduleSpec& spec, std::int64_t from, std::int64_t to) {
    double sum = 0.0, comp = 0.0;
    for (std::int64_t t = from; t <= to; ++t) {
        const double y = step_size(spec, t) - comp;
        const double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    return sum;
}

}  // namespace

TEST_CASE("exponential_alpha closed form") {
    CHECK(exponential_alpha(10.0, 10) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(exponential_alpha(2.0, 8) == doctest::Approx(0.84089641525371454).epsilon(1e-13));
    CHECK(exponential_alpha(1.0, 100) == doctest::Approx(0.95499258602143595).epsilon(1e-13));

    CHECK_THROWS_AS(exponential_alpha(0.5, 10), ParamError);
    CHECK_THROWS_AS(exponential_alpha(11.0, 10), ParamError);

    // monotone increasing in beta at fixed T
    for (std::int64_t T : {5, 17, 100, 999}) {
        double prev = 0.0;
        for (double beta = 1.0; beta <= static_cast<double>(T); beta += 1.0) {
            const double alpha = exponential_alpha(beta, T);
            CHECK(alpha > prev);
            CHECK(alpha <= 1.0);
            prev = alpha;
        }
    }
}

TEST_CASE("step_size spot values") {
    const auto cosine = ScheduleSpec::cosine(1.0, 4);
    CHECK(step_size(cosine, 2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(step_size(cosine, 4) == doctest::Approx(0.0));
    CHECK(step_size(cosine, 0) == doctest::Approx(1.0));

    const auto expo = ScheduleSpec::exponential_alpha(0.1, 100, 0.5);
    CHECK(step_size(expo, 3) == doctest::Approx(0.0125).epsilon(1e-15));
    CHECK(step_size(expo, 0) == doctest::Approx(0.1));

    const auto poly = ScheduleSpec::poly_pl(1.0, 100, 1.0);  // eta0 = 1/(L(1+a)) with L=1, a=0
    CHECK(step_size(poly, 1) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(step_size(poly, 0) == doctest::Approx(1.0));

    const auto inv_sqrt = ScheduleSpec::inverse_sqrt(1.0, 100, 2.0);
    CHECK(step_size(inv_sqrt, 4) == doctest::Approx(0.2).epsilon(1e-15));
    const auto inv_lin = ScheduleSpec::inverse_linear(1.0, 100, 0.5);
    CHECK(step_size(inv_lin, 2) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("index range enforcement") {
    const auto cosine = ScheduleSpec::cosine(1.0, 4);
    CHECK_THROWS_AS(step_size(cosine, 5), IndexError);
    CHECK_THROWS_AS(step_size(cosine, -1), IndexError);

    const auto expo = ScheduleSpec::exponential_beta(1.0, 10, 1.0);
    CHECK_NOTHROW(step_size(expo, 50));  // not horizon-bound

    const auto restart = ScheduleSpec::cosine_restart(1.0, 2, 2.0, 1);
    CHECK_THROWS_AS(step_size(restart, restart.horizon()), IndexError);
}

TEST_CASE("exponential from beta hits eta0*beta/T exactly at t = T") {
    for (const auto& [beta, T] : std::vector<std::pair<double, std::int64_t>>{
             {1.0, 10}, {2.0, 37}, {7.5, 1000}, {99.0, 100}}) {
        const auto spec = ScheduleSpec::exponential_beta(0.25, T, beta);
        CHECK(step_size(spec, T) == 0.25 * beta / static_cast<double>(T));
    }
}

TEST_CASE("exponential with both alpha and beta must be consistent") {
    const double alpha = std::pow(2.0 / 8.0, 1.0 / 8.0);
    CHECK_NOTHROW(ScheduleSpec::exponential(1.0, 8, alpha, 2.0));
    CHECK_THROWS_AS(ScheduleSpec::exponential(1.0, 8, alpha * 1.001, 2.0), ParamError);
}

TEST_CASE("parameter-domain validation") {
    CHECK_THROWS_AS(ScheduleSpec::cosine(0.0, 10), ParamError);
    CHECK_THROWS_AS(ScheduleSpec::cosine(-1.0, 10), ParamError);
    CHECK_THROWS_AS(ScheduleSpec::exponential_beta(1.0, 10, 0.9), ParamError);   // beta < 1
    CHECK_THROWS_AS(ScheduleSpec::exponential_beta(1.0, 10, 10.5), ParamError);  // beta > T
    CHECK_THROWS_AS(ScheduleSpec::exponential_alpha(1.0, 10, 1.5), ParamError);
    CHECK_THROWS_AS(ScheduleSpec::cosine_restart(1.0, 0, 2.0, 1), ParamError);
    CHECK_THROWS_AS(ScheduleSpec::cosine_restart(1.0, 2, 0.5, 1), ParamError);
    CHECK_THROWS_AS(ScheduleSpec::stagewise(1.0, 10, {3, 3}, 0.5), ParamError);
    CHECK_THROWS_AS(ScheduleSpec::stagewise(1.0, 10, {12}, 0.5), ParamError);
    CHECK_THROWS_AS(ScheduleSpec::stagewise(1.0, 10, {3}, 1.5), ParamError);
    CHECK_THROWS_AS(ScheduleSpec::poly_pl(1.0, 10, 0.0), ParamError);
}

TEST_CASE("schedule_sum closed forms") {
    CHECK(schedule_sum(ScheduleSpec::cosine(1.0, 3), 1, 3) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(schedule_sum(ScheduleSpec::exponential_alpha(1.0, 10, 0.5), 1, 3) ==
          doctest::Approx(0.875).epsilon(1e-15));
    CHECK(schedule_sum(ScheduleSpec::constant(0.1, 10), 1, 10) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(schedule_sum(ScheduleSpec::constant(0.1, 10), 5, 3) == 0.0);  // empty range
    CHECK_THROWS_AS(schedule_sum(ScheduleSpec::cosine(1.0, 4), 1, 5), IndexError);
}

TEST_CASE("closed-form sums agree with direct summation to 1e-12") {
    Xoshiro256pp rng(99);
    for (int rep = 0; rep < 40; ++rep) {
        const std::int64_t T = 10 + static_cast<std::int64_t>(rng.uniform01() * 5000);
        const double beta = 1.0 + rng.uniform01() * (static_cast<double>(T) - 1.0);
        const auto spec = rep % 2 == 0
                              ? ScheduleSpec::exponential_beta(0.3, T, beta)
                              : ScheduleSpec::exponential_alpha(0.3, T, 0.5 + 0.5 * rng.uniform01());
        const std::int64_t from = static_cast<std::int64_t>(rng.uniform01() * T);
        const std::int64_t to = from + static_cast<std::int64_t>(rng.uniform01() * (T - from));
        const double closed = schedule_sum(spec, from, to);
        const double direct = brute_sum(spec, from, to);
        CHECK(closed == doctest::Approx(direct).epsilon(1e-12));
    }
    // cosine full range against its identity
    for (std::int64_t T : {2, 5, 100, 997}) {
        const auto spec = ScheduleSpec::cosine(2.0, T);
        CHECK(schedule_sum(spec, 1, T) == doctest::Approx(brute_sum(spec, 1, T)).epsilon(1e-12));
    }
}

TEST_CASE("cosine full sums match eta0 (T-1)/2 for T = 2..1000") {
    const double eta0 = 0.7;
    for (std::int64_t T = 2; T <= 1000; ++T) {
        const auto spec = ScheduleSpec::cosine(eta0, T);
        const double direct = brute_sum(spec, 1, T);
        const double identity = eta0 * static_cast<double>(T - 1) / 2.0;
        CHECK(std::fabs(direct - identity) <= 1e-12 * static_cast<double>(T));
    }
}

TEST_CASE("monotonicity and range of the step sizes") {
    const std::int64_t T = 500;
    const auto cosine = ScheduleSpec::cosine(0.3, T);
    const auto expo = ScheduleSpec::exponential_beta(0.3, T, 2.0);
    double prev_cos = step_size(cosine, 0);
    double prev_exp = step_size(expo, 0);
    for (std::int64_t t = 1; t <= T; ++t) {
        const double c = step_size(cosine, t);
        const double e = step_size(expo, t);
        CHECK(c <= prev_cos);
        CHECK(e < prev_exp);  // alpha < 1: strictly decreasing
        CHECK(c >= 0.0);
        CHECK(c <= 0.3);
        CHECK(e >= 0.0);
        CHECK(e <= 0.3);
        prev_cos = c;
        prev_exp = e;
    }
}

TEST_CASE("stagewise decay is right-continuous at milestones") {
    const auto spec = ScheduleSpec::stagewise(1.0, 20, {3, 7}, 0.1);
    CHECK(step_size(spec, 2) == doctest::Approx(1.0));
    CHECK(step_size(spec, 3) == doctest::Approx(0.1));  // new factor applies at the milestone
    CHECK(step_size(spec, 6) == doctest::Approx(0.1));
    CHECK(step_size(spec, 7) == doctest::Approx(0.01));
    CHECK(step_size(spec, 19) == doctest::Approx(0.01));
}

TEST_CASE("cosine restart stage structure") {
    const auto spec = ScheduleSpec::cosine_restart(0.8, 2, 2.0, 1);
    CHECK(spec.stage_lengths() == std::vector<std::int64_t>{2, 4});
    CHECK(spec.horizon() == 6);
    // first step of each stage is eta0 (cos 0 = 1)
    CHECK(step_size(spec, 0) == doctest::Approx(0.8));
    CHECK(step_size(spec, 2) == doctest::Approx(0.8));

    // stage slices match standalone cosine schedules bitwise
    std::int64_t offset = 0;
    for (const std::int64_t len : spec.stage_lengths()) {
        const auto stage = ScheduleSpec::cosine(0.8, len);
        for (std::int64_t local = 0; local < len; ++local) {
            CHECK(step_size(spec, offset + local) == step_size(stage, local));
        }
        offset += len;
    }

    // fractional r rounds per stage
    const auto frac = ScheduleSpec::cosine_restart(1.0, 3, 1.5, 2);
    CHECK(frac.stage_lengths() == std::vector<std::int64_t>{3, 5, 7});
    CHECK(frac.horizon() == 15);
}

TEST_CASE("restart produces exactly sum(T_i) steps") {
    struct Params {
        std::int64_t T0;
        double r;
        std::int64_t l;
    };
    for (const Params& p : {Params{1, 1.0, 0}, Params{4, 1.0, 3}, Params{2, 2.0, 4},
                            Params{5, 1.3, 3}}) {
        const auto [T0, r, l] = p;
        const auto spec = ScheduleSpec::cosine_restart(1.0, T0, r, l);
        std::int64_t total = 0;
        for (std::int64_t i = 0; i <= l; ++i) {
            total += std::llround(static_cast<double>(T0) * std::pow(r, static_cast<double>(i)));
        }
        CHECK(spec.horizon() == total);
        CHECK(static_cast<std::int64_t>(spec.stage_lengths().size()) == l + 1);
        CHECK_NOTHROW(step_size(spec, total - 1));
        CHECK_THROWS_AS(step_size(spec, total), IndexError);
    }
}
