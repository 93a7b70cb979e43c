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

#include "qtraj/rng.hpp"
#include "qtraj/spectra.hpp"

using namespace qtraj;

namespace {

// Incoherent emission density from the Liouvillian resolvent:
// (1/pi) Re tr C^dag (i x - L)^{-1} [C rho - <C> rho].
double resolvent_spectrum(const LindbladModel& m, double x) {
    const DensityMatrix rho = steady_state(m, projector(basis(m.dim(), 0)));
    const Operator& c = m.collapse_ops[0];
    const cplx mean_c = (c * rho).trace();
    const DensityMatrix src = c * rho - mean_c * rho;
    const Eigen::MatrixXcd L = liouvillian_superoperator(m);
    const Eigen::MatrixXcd A = I * x * Eigen::MatrixXcd::Identity(L.rows(), L.cols()) - L;
    const DensityMatrix r = unvec(A.partialPivLu().solve(vec(src)), m.dim());
    return (c.adjoint() * r).trace().real() / M_PI;
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4 : 2) * f(a + k * h);
    return s * h / 3;
}

}  // namespace

TEST_CASE("auxiliary pair step is the exact flow of its linear equations") {
    const ModelSpec s = driven_tls(2.0, 0.3, 0.6);
    AuxiliaryPair p{(basis(2, 0) + 0.5 * basis(2, 1)).normalized(), StateVector::Zero(2), 1.7};
    const Operator heff = effective_hamiltonian(s.model);
    const Operator& c = s.model.collapse_ops[0];
    StateVector phi = p.phi, beta = p.beta;
    const int n = 4000;
    const double h = 0.5 / n;
    auto f = [&](const StateVector& x, const StateVector& y, StateVector& dx, StateVector& dy) {
        dx = -I * (heff * x);
        dy = -I * (heff * y) - I * p.omega * y + c * x;
    };
    for (int k = 0; k < n; ++k) {
        StateVector a1, b1, a2, b2, a3, b3, a4, b4;
        f(phi, beta, a1, b1);
        f(phi + 0.5 * h * a1, beta + 0.5 * h * b1, a2, b2);
        f(phi + 0.5 * h * a2, beta + 0.5 * h * b2, a3, b3);
        f(phi + h * a3, beta + h * b3, a4, b4);
        phi += h / 6 * (a1 + 2 * a2 + 2 * a3 + a4);
        beta += h / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
    }
    const AuxiliaryPair q = aux_pair_step(s.model, p, 0.5);
    CHECK((q.phi - phi).norm() < 1e-10);
    CHECK((q.beta - beta).norm() < 1e-10);

    const AuxiliaryPair j = aux_pair_jump(s.model, q, 0);
    const double nc = (c * q.phi).norm();
    CHECK((j.phi - c * q.phi / nc).norm() < 1e-14);
    CHECK((j.beta - c * q.beta / nc).norm() < 1e-14);
}

TEST_CASE("an undriven atom in its ground state emits nothing") {
    const ModelSpec s = driven_tls(0.0, 0.0, 1.0);
    SpectrumConfig cfg;
    cfg.burn_in = 1;
    cfg.window = 5;
    cfg.trajectories = 10;
    const auto r = spectrum_estimate(s.model, s.initial, {0.0, 1.0, 2.0}, cfg);
    for (double v : r.values) CHECK(v == 0.0);
    CHECK(r.flux == 0.0);
    CHECK(r.resolution == doctest::Approx(2 * M_PI / 5));
    CHECK_THROWS_AS(conditional_spectrum(s.model, s.initial, GateConfig{2.0}, {0.0}, cfg), Error);
}

TEST_CASE("estimator area equals the emission rate") {
    const double omega = 3.0, gamma = 1.0;
    const ModelSpec s = driven_tls(omega, 0.0, gamma);
    SpectrumConfig cfg;
    cfg.burn_in = 8;
    cfg.window = 20;
    cfg.dt = 0.01;
    cfg.trajectories = 300;
    cfg.seed = 2;
    const double u = 2 * M_PI / cfg.window;
    std::vector<double> w;
    for (int k = 0; k <= 60; ++k) w.push_back(k * u);
    const auto r = spectrum_estimate(s.model, s.initial, w, cfg);
    double area = r.values[0];
    for (std::size_t k = 1; k < w.size(); ++k) area += 2 * r.values[k];
    area *= u / (2 * M_PI);
    const double rate = 2 * gamma * omega * omega / (2 * omega * omega + 4 * gamma * gamma);
    CHECK(area == doctest::Approx(rate).epsilon(0.05));
    CHECK(r.flux == doctest::Approx(rate).epsilon(0.05));
}

TEST_CASE("an infinite gate opened before the window reproduces the ungated curve") {
    const ModelSpec s = driven_tls(4.0, 0.0, 1.0);
    SpectrumConfig cfg;
    cfg.burn_in = 10;
    cfg.window = 10;
    cfg.trajectories = 40;
    cfg.seed = 4;
    const auto r = conditional_spectrum(s.model, s.initial, GateConfig{}, {0.0, 2.0, 4.0}, cfg);
    CHECK(r.open_fraction == doctest::Approx(1.0));
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(r.conditional.values[k] == doctest::Approx(r.unconditional.values[k]).epsilon(1e-12));
}

TEST_CASE("gate configuration") {
    CHECK_THROWS_AS((GateConfig{0.0}.validate()), Error);
    CHECK_THROWS_AS((GateConfig{std::numeric_limits<double>::infinity(), 0.5}.validate()), Error);
    CHECK_NOTHROW((GateConfig{10.0, 0.5}.validate()));
}

TEST_CASE("a shorter gate keeps less of the record open") {
    const ModelSpec s = v_system(VSystemParams{2.0, 0.35});
    SpectrumConfig cfg;
    cfg.burn_in = 20;
    cfg.window = 200;
    cfg.dt = 0.05;
    cfg.trajectories = 40;
    cfg.seed = 1;
    double prev = 2;
    for (double T0 : {1e6, 20.0, 2.0}) {
        const auto r = conditional_spectrum(s.model, s.initial, GateConfig{T0}, {0.0}, cfg);
        CHECK(r.open_fraction <= prev);
        prev = r.open_fraction;
    }
    CHECK(prev < 0.9);
}

TEST_CASE("two-time correlations: trajectories against regression") {
    const ModelSpec s = driven_tls(3.0, 0.0, 1.0);
    const Operator sp = transition(2, 1, 0), sm = transition(2, 0, 1);
    const std::vector<double> tau{0.0, 0.2, 0.5, 1.0, 2.0};
    CorrelationConfig cfg;
    cfg.dt = 1e-3;
    cfg.trajectories = 400;
    cfg.seed = 6;
    const auto mc = correlation_mcwf(s.model, s.initial, sp, sm, 1.0, tau, cfg);
    const auto rg = correlation_regression(s.model, projector(s.initial), sp, sm, 1.0, tau);
    const auto rho1 = master_evolve(s.model, projector(s.initial), {0.0, 1.0}).back();
    CHECK(std::abs(rg[0] - (sp * sm * rho1).trace()) < 1e-10);
    for (std::size_t k = 0; k < tau.size(); ++k) {
        CAPTURE(k);
        CHECK(std::abs(mc.mean[k].real() - rg[k].real()) <= 3.5 * mc.stderr_re[k] + 1e-12);
        CHECK(std::abs(mc.mean[k].imag() - rg[k].imag()) <= 3.5 * mc.stderr_im[k] + 1e-12);
    }
    // B = -1 empties one auxiliary state, which needs the perturbed estimator
    const Operator s11 = transition(2, 1, 1);
    const auto p = correlation_mcwf(s.model, s.initial, s11, -identity(2), 0.5, {0.0, 0.5}, cfg);
    CHECK(p.perturbed == cfg.trajectories);
    const auto pr = correlation_regression(s.model, projector(s.initial), s11, -identity(2), 0.5, {0.0, 0.5});
    for (std::size_t k = 0; k < 2; ++k)
        CHECK(std::abs(p.mean[k].real() - pr[k].real()) <= 3.5 * p.stderr_re[k] + 1e-6);
}

TEST_CASE("windowed spectrum of a rank-one correlation is a squared modulus") {
    const int n = 64;
    const double h = 0.1;
    Eigen::VectorXcd v(n);
    Rng rng(3, 0);
    for (int j = 0; j < n; ++j) v(j) = cplx(rng.normal(), rng.normal());
    const Eigen::MatrixXcd c = v * v.adjoint();
    const auto s = time_dependent_spectrum(c, h, {0.0, 1.0, 5.0, -7.0});
    for (std::size_t k = 0; k < s.values.size(); ++k) {
        cplx z = 0;
        for (int j = 0; j < n; ++j)
            z += ((j == 0 || j == n - 1) ? 0.5 * h : h) * std::exp(I * s.omega[k] * (j * h)) * v(j);
        CHECK(s.values[k] >= 0.0);
        CHECK(s.values[k] == doctest::Approx(std::norm(z) / ((n - 1) * h)).epsilon(1e-10));
    }
    CHECK_THROWS_AS(time_dependent_spectrum(c, h, {40.0}), Error);
}

TEST_CASE("two-level spectrum against the resolvent") {
    const double omega = 6.0, gamma = 1.0;
    const ModelSpec s = driven_tls(omega, 0.0, gamma);
    const TlsSpectrum a{omega, 0.0, gamma};
    for (double x : {0.3, 1.0, 3.0, 5.9, 9.0})
        CHECK(a.incoherent(x) == doctest::Approx(resolvent_spectrum(s.model, x)).epsilon(1e-8));
    for (double d : {0.0, 1.3}) {
        const TlsSpectrum b{omega, d, gamma};
        const double total = 2 * simpson([&](double x) { return b.incoherent(x); }, 0, 4000, 400000) +
                             b.coherent_weight();
        const double rate = gamma * omega * omega / (omega * omega + 2 * (d * d + gamma * gamma));
        CHECK(total == doctest::Approx(rate).epsilon(1e-4));
    }
}

TEST_CASE("shelving spectrum: Mollow part, narrow peak and telegraph picture agree") {
    VSystemParams p;
    p.omega1 = 2.0;
    p.omega2 = 0.2;
    const VSystemSpectrum v = vsystem_analytic_spectrum(p);
    const TlsSpectrum t{2.0, 0.0, 1.0};
    const double pref = 1.0 * 4.0 / (4.0 + 2.0);
    for (double x : {0.0, 0.7, 2.0, 4.0}) CHECK(t.incoherent(x) == doctest::Approx(pref * v.mollow(x)).epsilon(1e-8));

    const PeriodStats ps = vsystem_periods(p);
    CHECK(v.Gamma_p == doctest::Approx(1.0 / ps.T_D + 1.0 / ps.T_L).epsilon(0.05));
    const TelegraphSpectrum tg = telegraph_spectrum(2.0, 0.0, 1.0, ps.T_L, ps.T_D);
    CHECK(tg.A_p == doctest::Approx(v.A_p).epsilon(0.1));
    CHECK(tg.coherent_weight == doctest::Approx(v.coherent_weight).epsilon(0.1));
    CHECK(v.A_p == doctest::Approx(3.125).epsilon(1e-9));

    // slowest relaxation of the full model
    const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(liouvillian_superoperator(v_system(p).model));
    double slow = 1e9;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double re = -es.eigenvalues()(k).real();
        if (re > 1e-9) slow = std::min(slow, re);
    }
    CHECK(v.Gamma_p == doctest::Approx(slow).epsilon(0.02));

    // the narrow peak keeps its area as the probe weakens
    double prev = 0;
    for (double o2 : {0.1, 0.05, 0.025}) {
        p.omega2 = o2;
        const VSystemSpectrum w = vsystem_analytic_spectrum(p);
        const double area = w.A_p * w.Gamma_p;
        if (prev > 0) CHECK(area == doctest::Approx(prev).epsilon(1e-9));
        prev = area;
    }
    p.omega2 = 0.0;
    CHECK_THROWS_AS(vsystem_analytic_spectrum(p), Error);
    p.omega2 = 1.5;
    CHECK_THROWS_AS(vsystem_analytic_spectrum(p), Error);

    const TelegraphSpectrum nodark = telegraph_spectrum(2.0, 0.0, 1.0, 150.0, 0.0);
    CHECK(nodark.A_p == 0.0);
    CHECK(nodark.peak(0.1) == 0.0);
}

TEST_CASE("lorentzian fit recovers a known width") {
    std::vector<double> x, y, sg;
    Rng rng(12, 0);
    for (int k = 1; k <= 60; ++k) {
        const double xi = 0.005 * k;
        x.push_back(xi);
        y.push_back(3.0 / (1 + std::pow(xi / 0.04, 2)) + 0.2 - 0.5 * xi * xi + 0.01 * rng.normal());
        sg.push_back(0.01);
    }
    const LorentzianFit f = fit_lorentzian(x, y, sg);
    CHECK(f.gamma == doctest::Approx(0.04).epsilon(0.03));
    CHECK(f.amplitude == doctest::Approx(3.0).epsilon(0.03));
    // residuals in units of sigma
    CHECK(f.rms < 1.5);
}

TEST_CASE("fejer smoothing preserves a constant") {
    const auto s = fejer_smooth([](double) { return 1.0; }, {0.0, 1.0, 3.0}, 50.0);
    for (double v : s) CHECK(v == doctest::Approx(1.0).epsilon(1e-3));
}
