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

#include "qtraj/lindblad.hpp"
#include "qtraj/models.hpp"

using namespace qtraj;

namespace {

// Bloch equations of the driven atom, independent of the Liouvillian code.
// Population decay rate 2g, coherence decay rate g.
struct Bloch {
    double omega, delta, gamma;
    // state: rho11, Re rho10, Im rho10
    void rhs(const double* y, double* f) const {
        const double p = y[0], x = y[1], z = y[2];
        // H = -delta s11 + (omega/2)(s01 + s10)
        f[0] = -2 * gamma * p - omega * z;
        f[1] = -gamma * x - delta * z;
        f[2] = -gamma * z + delta * x + 0.5 * omega * (2 * p - 1);
    }
};

std::vector<double> bloch_rho11(const Bloch& b, const std::vector<double>& grid, double h) {
    double y[3] = {0, 0, 0};
    std::vector<double> out;
    double t = 0;
    for (double target : grid) {
        while (t < target - 1e-12) {
            const double s = std::min(h, target - t);
            double k1[3], k2[3], k3[3], k4[3], tmp[3];
            b.rhs(y, k1);
            for (int i = 0; i < 3; ++i) tmp[i] = y[i] + 0.5 * s * k1[i];
            b.rhs(tmp, k2);
            for (int i = 0; i < 3; ++i) tmp[i] = y[i] + 0.5 * s * k2[i];
            b.rhs(tmp, k3);
            for (int i = 0; i < 3; ++i) tmp[i] = y[i] + s * k3[i];
            b.rhs(tmp, k4);
            for (int i = 0; i < 3; ++i) y[i] += s / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
            t += s;
        }
        out.push_back(y[0]);
    }
    return out;
}

}  // namespace

TEST_CASE("model validation") {
    Operator h(2, 2);
    h << 0, 1, 0, 0;
    CHECK_THROWS_AS(make_model(h, {}), Error);
    CHECK_THROWS_AS(make_model(identity(2), {identity(3)}), Error);
    CHECK_NOTHROW(make_model(identity(2), {destroy(2)}));
}

TEST_CASE("effective hamiltonian has the -i/2 sum C^dag C part") {
    const ModelSpec s = driven_tls(2.0, 0.3, 0.7);
    const Operator heff = effective_hamiltonian(s.model);
    const Operator anti = 0.5 * (heff - heff.adjoint()) / I;
    CHECK(std::abs(anti(1, 1) - cplx(-0.7)) < 1e-14);
    CHECK(std::abs(anti(0, 0)) < 1e-14);
}

TEST_CASE("master equation against independent Bloch equations") {
    const double omega = 5.0, delta = 0.4, gamma = 1.0;
    const ModelSpec s = driven_tls(omega, delta, gamma);
    const auto grid = uniform_grid(5.0, 50);
    const auto rhos = master_evolve(s.model, projector(basis(2, 0)), grid, 1e-3);
    const auto ref = bloch_rho11(Bloch{omega, delta, gamma}, grid, 1e-4);
    double err = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        err = std::max(err, std::abs(rhos[k](1, 1).real() - ref[k]));
        CHECK(std::abs(rhos[k].trace() - cplx(1.0)) < 1e-8);
        CHECK(min_eigenvalue(rhos[k]) > -1e-10);
    }
    CHECK(err < 1e-8);
}

TEST_CASE("steady state of the driven atom") {
    const double omega = 5.0, gamma = 1.0;
    const ModelSpec s = driven_tls(omega, 0.0, gamma);
    const DensityMatrix rho = steady_state(s.model, projector(basis(2, 0)));
    CHECK(rho(1, 1).real() == doctest::Approx(omega * omega / (2 * omega * omega + 4 * gamma * gamma)).epsilon(1e-9));
    CHECK(rho(1, 1).real() == doctest::Approx(25.0 / 54.0).epsilon(1e-9));
}

TEST_CASE("superoperator agrees with direct application") {
    const ModelSpec s = v_system(VSystemParams{});
    const Eigen::MatrixXcd L = liouvillian_superoperator(s.model);
    DensityMatrix rho = DensityMatrix::Zero(3, 3);
    rho(0, 0) = 0.5;
    rho(1, 1) = 0.3;
    rho(2, 2) = 0.2;
    rho(0, 1) = cplx(0.1, 0.05);
    rho(1, 0) = std::conj(rho(0, 1));
    const DensityMatrix a = liouvillian_apply(s.model, rho);
    const DensityMatrix b = unvec(L * vec(rho), 3);
    CHECK((a - b).norm() < 1e-13);
    CHECK(std::abs(a.trace()) < 1e-13);
}

TEST_CASE("rk4 trace guard trips on a non-trace-preserving generator") {
    const Generator gen = [](const DensityMatrix& r, DensityMatrix& out) { out = -r; };
    RK4Options opt;
    opt.dt = 1e-2;
    try {
        rk4_evolve(gen, projector(basis(2, 0)), {0.0, 1.0}, opt);
        FAIL("expected a numerical error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::numerical);
    }
    opt.trace_tolerance = -1;
    const auto r = rk4_evolve(gen, projector(basis(2, 0)), {0.0, 1.0}, opt);
    CHECK(r.back()(0, 0).real() == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}
