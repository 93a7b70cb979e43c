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
#include <set>

#include "qtraj/core.hpp"
#include "qtraj/rng.hpp"
#include "qtraj/stats.hpp"

using namespace qtraj;

TEST_CASE("normalize rejects the zero vector") {
    CHECK_THROWS_AS(normalize(StateVector::Zero(3)), Error);
    try {
        normalize(StateVector::Zero(3));
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::domain);
    }
    const auto [v, n] = normalize(StateVector::Constant(4, cplx(1, 1)));
    CHECK(v.norm() == doctest::Approx(1.0));
    CHECK(n == doctest::Approx(std::sqrt(8.0)));
}

TEST_CASE("ladder operators") {
    const int d = 6;
    const Operator a = destroy(d);
    const Operator n = number_op(d);
    CHECK((a.adjoint() * a - n).norm() < 1e-14);
    for (int k = 1; k < d; ++k) {
        const StateVector v = a * basis(d, k);
        CHECK(std::abs(v(k - 1) - std::sqrt(double(k))) < 1e-14);
    }
    CHECK(transition(3, 0, 2)(0, 2) == cplx(1.0));
    CHECK_THROWS_AS(transition(3, 0, 3), Error);
}

TEST_CASE("tensor products respect the dimension cap") {
    const Operator x = tensor_product(destroy(2), identity(3));
    CHECK(x.rows() == 6);
    CHECK_THROWS_AS(tensor_product(identity(16), identity(16), 128), Error);
    const StateVector s = tensor_state(basis(2, 1), basis(3, 2));
    CHECK(std::abs(s(5) - cplx(1.0)) < 1e-15);
}

TEST_CASE("coherent states") {
    const cplx alpha(1.5, -0.5);
    const int d = coherent_dimension(std::abs(alpha));
    CHECK(d >= std::norm(alpha) + 6 * std::abs(alpha));
    const StateVector c = coherent_state(alpha, d);
    CHECK(c.norm() == doctest::Approx(1.0).epsilon(1e-12));
    // truncation leaves a tail of order 1e-4 at the minimum dimension
    CHECK(expectation(number_op(d), c).real() == doctest::Approx(std::norm(alpha)).epsilon(1e-3));
    CHECK(std::abs(expectation(destroy(d), c) - alpha) < 1e-3);
    const StateVector wide = coherent_state(alpha, 2 * d);
    CHECK(expectation(number_op(2 * d), wide).real() == doctest::Approx(std::norm(alpha)).epsilon(1e-10));
    CHECK(coherent_dimension(4.0) == 40);
}

TEST_CASE("propagators") {
    Operator h(2, 2);
    h << 0.3, cplx(0.2, 0.1), cplx(0.2, -0.1), -0.4;
    const Operator u = propagator(h, 1.7);
    CHECK((u.adjoint() * u - identity(2)).norm() < 1e-12);
    Operator heff = h;
    heff(1, 1) -= I * 0.5;
    const EffectivePropagator p(heff);
    for (double s : {0.0, 0.1, 2.5, 10.0})
        CHECK((p.matrix(s) - propagator(heff, s)).norm() < 1e-10);
    CHECK(p.diagonalized());
}

TEST_CASE("fidelity ignores global phase") {
    const StateVector a = coherent_state(1.0, 12);
    CHECK(fidelity(a, std::exp(I * 0.7) * a) == doctest::Approx(1.0));
    CHECK(fidelity(basis(3, 0), basis(3, 1)) == doctest::Approx(0.0));
}

TEST_CASE("rng streams are reproducible and distinct") {
    Rng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        CHECK(x != c.next());
        CHECK(x != d.next());
    }
    Rng r(1, 0);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double g = r.normal();
        s += g;
        s2 += g * g;
    }
    CHECK(std::abs(s / n) < 5.0 / std::sqrt(double(n)));
    CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("rng uniform passes a KS test") {
    Rng r(5, 3);
    std::vector<double> u;
    for (int i = 0; i < 20000; ++i) u.push_back(r.uniform_open0());
    const KsResult k = ks_test(u, [](double x) { return std::clamp(x, 0.0, 1.0); });
    CHECK(k.p_value > 0.01);
    std::vector<double> shifted;
    for (double x : u) shifted.push_back(x * x);
    CHECK(ks_test(shifted, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value < 1e-6);
}

TEST_CASE("kolmogorov tail") {
    CHECK(kolmogorov_q(0.0) == doctest::Approx(1.0));
    // Q(1.36) ~ 0.05
    CHECK(kolmogorov_q(1.358) == doctest::Approx(0.05).epsilon(0.01));
}

TEST_CASE("small statistics helpers") {
    std::vector<double> y;
    for (int k = 0; k <= 100; ++k) y.push_back(std::sin(M_PI * k / 100.0));
    CHECK(trapz(y, M_PI / 100.0) == doctest::Approx(2.0).epsilon(1e-3));
    const auto [slope, icpt] = linear_fit({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK(slope == doctest::Approx(2.0));
    CHECK(icpt == doctest::Approx(1.0));
    const auto p = peak_normalize({1, 4, 2});
    CHECK(p[1] == doctest::Approx(1.0));
    CHECK(sup_abs_diff({1, 2}, {1.5, 2}) == doctest::Approx(0.5));
}
