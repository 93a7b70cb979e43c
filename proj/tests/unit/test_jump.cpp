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
#include <unsupported/Eigen/MatrixFunctions>

#include "qtraj/jump.hpp"
#include "qtraj/models.hpp"

using namespace qtraj;

namespace {

StateVector tilted(int dim) {
    StateVector v(dim);
    for (int k = 0; k < dim; ++k) v(k) = cplx(1.0 + k, 0.3 * k);
    return v.normalized();
}

// Distance between the one-step branch mixture and the exact map.
double one_step_error(const LindbladModel& m, Order order, double dt) {
    const JumpStepper st(m, dt, order, 1.0, 1.0);
    const StateVector psi = tilted(m.dim());
    DensityMatrix mix = DensityMatrix::Zero(m.dim(), m.dim());
    for (const auto& o : st.branch_outcomes(psi)) mix += o.probability * projector(o.state);
    const Eigen::MatrixXcd L = liouvillian_superoperator(m);
    const Eigen::MatrixXcd E = (L * dt).exp();
    const DensityMatrix exact = unvec(E * vec(projector(psi)), m.dim());
    return (mix - exact).norm();
}

}  // namespace

TEST_CASE("jump maps the excited atom to the ground state") {
    const ModelSpec s = driven_tls(1.0, 0.0, 0.5);
    const StateVector psi = (basis(2, 0) + I * basis(2, 1)).normalized();
    const StateVector out = apply_jump(s.model, psi, 0);
    CHECK(fidelity(out, basis(2, 0)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(apply_jump(s.model, psi, 1), Error);
    CHECK_THROWS_AS(apply_jump(s.model, basis(2, 0), 0), Error);
}

TEST_CASE("jump probability guard") {
    const ModelSpec s = driven_tls(1.0, 0.0, 1.0);
    const JumpProbability jp = jump_probability(s.model, basis(2, 1), 1e-3);
    CHECK(jp.total == doctest::Approx(2e-3));
    try {
        jump_probability(s.model, basis(2, 1), 0.5);
        FAIL("expected a numerical error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::numerical);
    }
}

TEST_CASE("no-jump step without renormalization loses norm at rate 2 gamma rho11") {
    const ModelSpec s = driven_tls(0.0, 0.0, 0.5);
    const StateVector out = no_jump_step(s.model, basis(2, 1), 0.4, false);
    CHECK(out.squaredNorm() == doctest::Approx(std::exp(-0.4)).epsilon(1e-12));
}

TEST_CASE("branch weights of the higher-order tables") {
    const auto b2 = scheme_branches(Order::second, 1, 0.1);
    CHECK(b2.size() == 4);
    const auto b4 = scheme_branches(Order::fourth, 2, 0.1);
    // 1 + 2*4 + 4*3 + 8*4 + 16
    CHECK(b4.size() == 69);
    CHECK(scheme_branches(Order::first, 1, 0.1).empty());
}

TEST_CASE("one-step error scales with the scheme order") {
    const ModelSpec s = v_system(VSystemParams{1.0, 0.7, 0.2, -0.3, 0.5, 0.3});
    struct Case {
        Order order;
        double expected;
    };
    for (const Case c : {Case{Order::first, 2.0}, Case{Order::second, 3.0}, Case{Order::fourth, 5.0}}) {
        const double e1 = one_step_error(s.model, c.order, 0.1);
        const double e2 = one_step_error(s.model, c.order, 0.05);
        const double slope = std::log2(e1 / e2);
        CAPTURE(slope);
        CHECK(slope > c.expected - 0.4);
        CHECK(slope < c.expected + 0.6);
    }
}

TEST_CASE("ensemble mean follows the master equation") {
    const ModelSpec s = driven_tls(5.0, 0.0, 1.0);
    const auto grid = uniform_grid(5.0, 50);
    const auto rhos = master_evolve(s.model, projector(s.initial), grid, 1e-3);
    const Operator p11 = s.observables.at("rho11");
    for (const JumpMethod method : {JumpMethod::bernoulli, JumpMethod::waiting_time}) {
        JumpConfig cfg;
        cfg.dt = 1e-3;
        cfg.seed = 3;
        cfg.method = method;
        const std::size_t n = 800;
        const EnsembleResult r = ensemble_average(s.model, s.initial, grid, n, cfg, {p11}, {"rho11"}, 2);
        double ss = 0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double d = r.mean[0][k] - expect_rho(p11, rhos[k]);
            ss += d * d;
        }
        CHECK(std::sqrt(ss / grid.size()) <= 3.0 / std::sqrt(double(n)));
    }
}

TEST_CASE("ensemble is independent of the thread count") {
    const ModelSpec s = driven_tls(3.0, 0.5, 1.0);
    const auto grid = uniform_grid(2.0, 20);
    JumpConfig cfg;
    cfg.dt = 1e-3;
    cfg.seed = 11;
    const Operator p11 = s.observables.at("rho11");
    const auto a = ensemble_average(s.model, s.initial, grid, 100, cfg, {p11}, {}, 1);
    const auto b = ensemble_average(s.model, s.initial, grid, 100, cfg, {p11}, {}, 3);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
    CHECK(a.total_jumps == b.total_jumps);
}

TEST_CASE("trajectories are reproducible from seed and index") {
    const ModelSpec s = driven_tls(3.0, 0.0, 1.0);
    const auto grid = uniform_grid(3.0, 30);
    JumpConfig cfg;
    cfg.seed = 9;
    const auto a = run_trajectory(s.model, s.initial, grid, cfg, {}, 4);
    const auto b = run_trajectory(s.model, s.initial, grid, cfg, {}, 4);
    const auto c = run_trajectory(s.model, s.initial, grid, cfg, {}, 5);
    REQUIRE(a.jumps.size() == b.jumps.size());
    for (std::size_t k = 0; k < a.jumps.size(); ++k) CHECK(a.jumps[k].t == b.jumps[k].t);
    bool differs = a.jumps.size() != c.jumps.size();
    for (std::size_t k = 0; !differs && k < a.jumps.size(); ++k) differs = a.jumps[k].t != c.jumps[k].t;
    CHECK(differs);
}

TEST_CASE("waiting time is censored when no jump can happen") {
    const ModelSpec s = driven_tls(0.0, 0.0, 1.0);
    Rng rng(1, 0);
    const WaitingTime w = waiting_time_sample(s.model, basis(2, 0), rng, 5.0);
    CHECK(w.censored);
    CHECK(w.t == doctest::Approx(5.0));
}

TEST_CASE("exact scheme expectation approaches the master equation") {
    const ModelSpec s = driven_tls(1.0, 0.0, 1.0);
    const Operator p11 = s.observables.at("rho11");
    const double T = 4.0;
    const std::vector<double> grid{0.0, T};
    const double exact = expect_rho(p11, master_evolve(s.model, projector(basis(2, 0)), grid, 1e-4).back());
    auto err = [&](Order o, double dt) {
        const JumpStepper st(s.model, dt, o, 1.0, 1.0);
        const auto v = reset_scheme_expectation(st, basis(2, 0), p11, int(std::lround(T / dt)));
        return std::abs(v.back() - exact);
    };
    const double e1 = err(Order::first, 0.1), e2 = err(Order::second, 0.1), e4 = err(Order::fourth, 0.1);
    CAPTURE(e1);
    CAPTURE(e2);
    CAPTURE(e4);
    CHECK(e2 < e1);
    CHECK(e4 < e2);
    CHECK(err(Order::first, 0.05) < e1);
}
