// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "swa/rng.hpp"
#include "swa/schedules.hpp"

using namespace swa;

namespace {

StepScheduleSpec one_x() {
    StepScheduleSpec s;
    s.base_lr = 0.02;
    s.decay_epochs = {9, 12};
    s.decay_factor = 0.1;
    s.total_epochs = 12;
    return s;
}

StepScheduleSpec two_x() {
    StepScheduleSpec s;
    s.base_lr = 0.02;
    s.decay_epochs = {17, 23};
    s.decay_factor = 0.1;
    s.total_epochs = 24;
    return s;
}

} // namespace

TEST_CASE("step schedule: 1x and 2x recipes") {
    const StepScheduleSpec s1 = one_x();
    for (int e = 1; e <= 8; ++e) CHECK(step_lr(s1, e) == 0.02);
    for (int e = 9; e <= 11; ++e) CHECK(step_lr(s1, e) == 0.02 * 0.1);
    CHECK(step_lr(s1, 12) == 0.02 * 0.1 * 0.1);

    const StepScheduleSpec s2 = two_x();
    CHECK(step_lr(s2, 16) == 0.02);
    CHECK(step_lr(s2, 17) == 0.02 * 0.1);
    CHECK(step_lr(s2, 22) == 0.02 * 0.1);
    CHECK(step_lr(s2, 23) == 0.02 * 0.1 * 0.1);
    CHECK(step_lr(s2, 24) == 0.02 * 0.1 * 0.1);
}

TEST_CASE("step schedule: empty decay list means a fixed lr") {
    StepScheduleSpec s;
    s.base_lr = 0.02;
    s.total_epochs = 24;
    for (int e = 1; e <= 24; ++e) CHECK(step_lr(s, e) == 0.02);
}

TEST_CASE("step schedule: drops happen exactly at decay epochs") {
    DetRng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        StepScheduleSpec s;
        s.base_lr = 0.001 + rng.unit();
        s.decay_factor = 0.05 + 0.5 * rng.unit();
        s.total_epochs = 5 + static_cast<int>(rng.index(30));
        for (int e = 1; e <= s.total_epochs; ++e) {
            if (rng.index(4) == 0) s.decay_epochs.push_back(e);
        }
        for (int e = 2; e <= s.total_epochs; ++e) {
            const double ratio = step_lr(s, e) / step_lr(s, e - 1);
            const bool is_decay =
                std::find(s.decay_epochs.begin(), s.decay_epochs.end(), e) != s.decay_epochs.end();
            if (is_decay) {
                CHECK(std::abs(ratio - s.decay_factor) <= 1e-12);
            } else {
                CHECK(ratio == 1.0);
            }
        }
    }
}

TEST_CASE("step schedule: validation and range errors") {
    StepScheduleSpec s = one_x();
    CHECK_THROWS_AS(step_lr(s, 0), RangeError);
    CHECK_THROWS_AS(step_lr(s, 13), RangeError);

    s.decay_epochs = {12, 9};
    CHECK_THROWS_AS(validate(s), ConfigError);
    s = one_x();
    s.decay_epochs = {0};
    CHECK_THROWS_AS(validate(s), ConfigError);
    s = one_x();
    s.base_lr = 0.0;
    CHECK_THROWS_AS(validate(s), ConfigError);
}

TEST_CASE("cosine cycle: endpoints, midpoint, degenerate cases") {
    CosineCycleSpec spec{0.02, 0.0002, 1000, 1};
    CHECK(cyclical_cosine_lr(spec, 0) == 0.02);
    CHECK(cyclical_cosine_lr(spec, 999) == 0.0002);

    CosineCycleSpec odd{0.02, 0.0002, 1001, 1};
    CHECK(std::abs(cyclical_cosine_lr(odd, 500) - 0.0101) <= 1e-12 * 0.0101);

    CosineCycleSpec flat{0.001, 0.001, 500, 1};
    for (std::int64_t t : {0, 1, 250, 499}) CHECK(cyclical_cosine_lr(flat, t) == 0.001);

    CosineCycleSpec single{0.02, 0.0002, 1, 3};
    for (std::int64_t t : {0, 1, 2}) CHECK(cyclical_cosine_lr(single, t) == 0.02);
}

TEST_CASE("cosine cycle: closed-form oracle over random specs") {
    DetRng rng(41);
    double max_rel = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        CosineCycleSpec spec;
        spec.lr_max = std::pow(10.0, -3.0 * rng.unit());
        spec.lr_min = spec.lr_max * std::pow(10.0, -3.0 * rng.unit());
        spec.cycle_len_iters = 2 + static_cast<int>(rng.index(4095));
        spec.num_cycles = 1 + static_cast<int>(rng.index(4));
        const std::int64_t total = static_cast<std::int64_t>(spec.cycle_len_iters) * spec.num_cycles;
        const std::int64_t iter = static_cast<std::int64_t>(rng.index(total));
        const std::int64_t t = iter % spec.cycle_len_iters;

        // Algebraically equal form, written top-down from lr_max.
        const double frac = static_cast<double>(t) / (spec.cycle_len_iters - 1);
        const double oracle =
            spec.lr_max - 0.5 * (spec.lr_max - spec.lr_min) * (1.0 - std::cos(3.14159265358979323846 * frac));
        const double got = cyclical_cosine_lr(spec, iter);
        max_rel = std::max(max_rel, std::abs(got - oracle) / oracle);
    }
    CHECK(max_rel <= 1e-12);
}

TEST_CASE("cosine cycle: periodicity, monotonicity, containment") {
    CosineCycleSpec spec{0.02, 0.0002, 313, 4};
    for (std::int64_t t = 0; t < 313; ++t) {
        const double a = cyclical_cosine_lr(spec, t);
        CHECK(cyclical_cosine_lr(spec, t + 313) == a);
        CHECK(cyclical_cosine_lr(spec, t + 2 * 313) == a);
        CHECK(a >= spec.lr_min);
        CHECK(a <= spec.lr_max);
        if (t > 0) CHECK(a < cyclical_cosine_lr(spec, t - 1));
    }
}

TEST_CASE("cosine cycle: validation and range errors") {
    CosineCycleSpec spec{0.02, 0.0002, 10, 2};
    CHECK_THROWS_AS(cyclical_cosine_lr(spec, -1), RangeError);
    CHECK_THROWS_AS(cyclical_cosine_lr(spec, 20), RangeError);
    CHECK_THROWS_AS(validate(CosineCycleSpec{0.0002, 0.02, 10, 1}), ConfigError);
    CHECK_THROWS_AS(validate(CosineCycleSpec{0.02, 0.0, 10, 1}), ConfigError);
    CHECK_THROWS_AS(validate(CosineCycleSpec{0.02, 0.0002, 0, 1}), ConfigError);
}

TEST_CASE("emit_schedule covers both schedule kinds") {
    SECTION("single-record degenerate case") {
        const auto pts = emit_schedule(CosineCycleSpec{0.01, 0.001, 5, 1}, 1);
        REQUIRE(pts.size() == 1);
        CHECK(pts[0].iter == 0);
        CHECK(pts[0].lr == 0.01);
    }
    SECTION("cosine: per-iteration values match the scalar op") {
        CosineCycleSpec spec{0.02, 0.0002, 50, 2};
        const auto pts = emit_schedule(spec, 100);
        REQUIRE(pts.size() == 100);
        for (const auto& p : pts) CHECK(p.lr == cyclical_cosine_lr(spec, p.iter));
        CHECK(pts[0].lr == 0.02);
        CHECK(pts[49].lr == 0.0002);   // last iteration of each cycle ends at lr_min
        CHECK(pts[50].lr == 0.02);     // next cycle jumps back
        CHECK(pts[99].lr == 0.0002);
    }
    SECTION("step: iterations map to 1-indexed epochs") {
        StepScheduleSpec s = one_x();
        s.iters_per_epoch = 3;
        const auto pts = emit_schedule(s, 36);
        REQUIRE(pts.size() == 36);
        CHECK(pts[0].lr == 0.02);
        CHECK(pts[23].lr == 0.02);             // epoch 8, last iteration
        CHECK(pts[24].lr == 0.02 * 0.1);       // epoch 9 starts
        CHECK(pts[35].lr == 0.02 * 0.1 * 0.1); // epoch 12
    }
}

TEST_CASE("schedule CSV has the documented shape and roundtrips values") {
    const auto pts = emit_schedule(CosineCycleSpec{0.02, 0.0002, 4, 1}, 4);
    const std::string csv = schedule_csv(pts);
    CHECK(csv.rfind("iter,lr\n", 0) == 0);
    REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 5);

    // Values printed with %.17g parse back to the exact doubles.
    std::size_t pos = csv.find('\n') + 1;
    for (const auto& p : pts) {
        const std::size_t comma = csv.find(',', pos);
        const std::size_t eol = csv.find('\n', comma);
        CHECK(std::stoll(csv.substr(pos, comma - pos)) == p.iter);
        CHECK(std::stod(csv.substr(comma + 1, eol - comma - 1)) == p.lr);
        pos = eol + 1;
    }
}
