// Copyright 2026 The qtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qtraj/photon_stats.hpp"

using namespace qtraj;

namespace {

// Amplitudes of the undecayed atom, integrated directly:
// i c0' = (omega/2) c1,  i c1' = (omega/2) c0 - (delta + i gamma) c1.
double amplitude_survival(double omega, double delta, double gamma, double t) {
    cplx c0 = 1, c1 = 0;
    const int n = 20000;
    const double h = t / n;
    auto f = [&](cplx a, cplx b, cplx& da, cplx& db) {
        da = -I * 0.5 * omega * b;
        db = -I * (0.5 * omega * a - (delta + I * gamma) * b);
    };
    for (int k = 0; k < n; ++k) {
        cplx a1, b1, a2, b2, a3, b3, a4, b4;
        f(c0, c1, a1, b1);
        f(c0 + 0.5 * h * a1, c1 + 0.5 * h * b1, a2, b2);
        f(c0 + 0.5 * h * a2, c1 + 0.5 * h * b2, a3, b3);
        f(c0 + h * a3, c1 + h * b3, a4, b4);
        c0 += h / 6 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        c1 += h / 6 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    }
    return std::norm(c0) + std::norm(c1);
}

}  // namespace

TEST_CASE("delay function of the driven atom") {
    // frozen reference values at gamma = 1, omega = 5, on resonance
    CHECK(tls_delay_closed_form(5, 0, 1, 0.5) == doctest::Approx(0.730269).epsilon(2e-6));
    CHECK(tls_delay_closed_form(5, 0, 1, 1.0) == doctest::Approx(0.306575).epsilon(2e-6));
    CHECK(tls_delay_closed_form(5, 0, 1, 2.0) == doctest::Approx(0.136154).epsilon(2e-6));
    for (double t : {0.3, 1.7, 4.0})
        CHECK(tls_delay_closed_form(3.0, 0.7, 0.8, t) ==
              doctest::Approx(amplitude_survival(3.0, 0.7, 0.8, t)).epsilon(1e-9));
    const ModelSpec s = driven_tls(3.0, 0.7, 0.8);
    const auto grid = uniform_grid(5.0, 100);
    const DelayCurve c = delay_function(s.model, basis(2, 0), grid);
    for (std::size_t k = 0; k < grid.size(); ++k)
        CHECK(std::abs(c.p0[k] - tls_delay_closed_form(3.0, 0.7, 0.8, grid[k])) < 1e-10);
}

TEST_CASE("next photon density rejects a rising curve") {
    DelayCurve c{{0, 1, 2}, {1.0, 0.5, 0.7}};
    CHECK_THROWS_AS(next_photon_density(c), Error);
}

TEST_CASE("detector invariant") {
    DetectorConfig d;
    d.efficiency = 1.5;
    CHECK_THROWS_AS(d.validate(), Error);
    d.efficiency = 0.5;
    d.threshold = 0;
    CHECK_THROWS_AS(d.validate(), Error);
    d.threshold = 2;
    CHECK_NOTHROW(d.validate());
}

TEST_CASE("beta = 0 evolution is the master equation") {
    const ModelSpec s = driven_tls(4.0, 0.2, 1.0);
    const auto grid = uniform_grid(3.0, 30);
    const auto b = conditional_beta_evolution(s.model, projector(basis(2, 0)), 0.0, grid);
    const auto m = master_evolve(s.model, projector(basis(2, 0)), grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK((b.rho[k] - m[k]).norm() < 1e-10);
        CHECK(b.survival[k] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(b.rate[k] == 0.0);
    }
    // beta = 1 survival is the delay function
    const auto b1 = conditional_beta_evolution(s.model, projector(basis(2, 0)), 1.0, grid);
    for (std::size_t k = 0; k < grid.size(); ++k)
        CHECK(b1.survival[k] == doctest::Approx(tls_delay_closed_form(4.0, 0.2, 1.0, grid[k])).epsilon(1e-8));
}

TEST_CASE("partial-detection count rate against its closed form") {
    const ModelSpec s = driven_tls(5.0, 0.0, 1.0);
    const auto grid = uniform_grid(5.0, 100);
    for (double beta : {1.0, 0.3, 0.01}) {
        const auto b = conditional_beta_evolution(s.model, projector(basis(2, 0)), beta, grid);
        for (std::size_t k = 0; k < grid.size(); ++k)
            CHECK(std::abs(b.rate[k] - tls_beta_rate_closed_form(5.0, 1.0, beta, grid[k])) < 1e-9);
    }
}

TEST_CASE("renewal equation turns the next-photon density into g2") {
    const double omega = 5.0, gamma = 1.0;
    const ModelSpec s = driven_tls(omega, 0.0, gamma);
    const auto grid = uniform_grid(8.0, 8000);
    const DelayCurve c = delay_function(s.model, basis(2, 0), grid);
    const auto i1 = next_photon_density(c);
    const auto rate = any_photon_rate(i1, grid);
    const double rho11 = omega * omega / (2 * omega * omega + 4 * gamma * gamma);
    const auto g2 = g2_from_rate(rate, 2 * gamma * rho11);
    double err = 0;
    for (std::size_t k = 0; k < grid.size(); ++k)
        err = std::max(err, std::abs(g2[k] - tls_g2_closed_form(omega, gamma, grid[k])));
    CHECK(err < 2e-3);
    CHECK(tls_g2_closed_form(omega, gamma, 0.0) == doctest::Approx(0.0));

    const auto mg = master_g2(s.model, uniform_grid(4.0, 40));
    for (std::size_t k = 0; k < mg.size(); ++k)
        CHECK(std::abs(mg[k] - tls_g2_closed_form(omega, gamma, 0.1 * k)) < 1e-8);

    // a grid too coarse for the kernel is refused
    const auto coarse = uniform_grid(8.0, 20);
    const DelayCurve cc = delay_function(s.model, basis(2, 0), coarse);
    CHECK_THROWS_AS(any_photon_rate(next_photon_density(cc), coarse), Error);
}

TEST_CASE("telegraph periods of the shelving system") {
    VSystemParams p;
    p.omega1 = 2.0;
    p.omega2 = 0.2;
    // substituted by hand: T_D = omega1^2 / (2 omega2^2 gamma), T_L = 3 T_D
    const PeriodStats a = vsystem_periods(p);
    CHECK(a.T_D == doctest::Approx(50.0));
    CHECK(a.T_L == doctest::Approx(150.0));
    const PeriodStats m = periods_from_model(v_system(p).model, basis(3, 0));
    CHECK(m.T_D == doctest::Approx(50.0).epsilon(0.01));
    CHECK(m.T_L == doctest::Approx(150.0).epsilon(0.02));

    // one dark period per bright-dark cycle
    CHECK(vsystem_jump_rate_resonant(p) == doctest::Approx(1.0 / (a.T_D + a.T_L)).epsilon(0.03));

    VSystemParams bad = p;
    bad.omega2 = 1.5;
    CHECK_FALSE(validity_check(bad).ok);
    try {
        vsystem_periods(bad);
        FAIL("expected a validity error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::validity);
    }
}

TEST_CASE("period estimators from the delay function remove the threshold bias") {
    VSystemParams p;
    p.omega1 = 2.0;
    p.omega2 = 0.35;
    const ModelSpec s = v_system(p);
    const PeriodStats a = vsystem_periods(p);
    const DelayCurve c = delay_function(s.model, basis(3, 0), uniform_grid(400.0, 8000));
    const DelayPeriods d = mean_periods_from_delay(c, 20.0);
    CHECK(d.T_D_tail == doctest::Approx(a.T_D).epsilon(0.02));
    CHECK(d.T_D == doctest::Approx(20.0 + d.T_D_tail));
    CHECK(d.T_L_tail == doctest::Approx(a.T_L).epsilon(0.1));
}

TEST_CASE("period classification") {
    std::vector<JumpEvent> j;
    for (double t : {1.0, 2.0, 3.5, 40.0, 41.0, 100.0}) j.push_back({t, 0});
    const auto ps = classify_periods(j, 10.0);
    REQUIRE(ps.size() == 5);
    CHECK(ps[0].kind == PeriodKind::bright);
    CHECK(ps[0].length == doctest::Approx(2.5));
    CHECK(ps[1].kind == PeriodKind::dark);
    CHECK(ps[1].length == doctest::Approx(36.5));
    CHECK(ps[4].length == 0.0);
    const PeriodSummary sm = summarize_periods(ps, 10.0);
    CHECK(sm.n_dark == 2);
    CHECK(sm.mean_dark == doctest::Approx((36.5 + 59.0) / 2));
    CHECK(sm.T_D == doctest::Approx(sm.mean_dark - 10.0));
}

TEST_CASE("jump record sampling is reproducible") {
    const ModelSpec s = v_system(VSystemParams{});
    Rng a(4, 2), b(4, 2);
    const auto ja = sample_jump_record(s.model, s.initial, 500.0, a);
    const auto jb = sample_jump_record(s.model, s.initial, 500.0, b);
    REQUIRE(ja.size() == jb.size());
    CHECK(!ja.empty());
    for (std::size_t k = 0; k < ja.size(); ++k) CHECK(ja[k].t == jb[k].t);
    for (std::size_t k = 1; k < ja.size(); ++k) CHECK(ja[k].t > ja[k - 1].t);
}
