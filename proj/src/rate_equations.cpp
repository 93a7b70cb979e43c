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

#include "qtraj/rate_equations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qtraj/core.hpp"

namespace qtraj {

namespace {

Populations deriv(const EinsteinParams& p, const Populations& r) {
    Populations d;
    d.p1 = -(p.A1 + p.B1W1) * r.p1 + p.B1W1 * r.p0;
    d.p2 = -(p.A2 + p.B2W2) * r.p2 + p.B2W2 * r.p0;
    d.p0 = -(p.B1W1 + p.B2W2) * r.p0 + (p.A1 + p.B1W1) * r.p1 + (p.A2 + p.B2W2) * r.p2;
    return d;
}

Populations axpy(const Populations& r, double a, const Populations& d) {
    return {r.p0 + a * d.p0, r.p1 + a * d.p1, r.p2 + a * d.p2};
}

}  // namespace

void EinsteinParams::validate() const {
    for (double v : {A1, A2, B1W1, B2W2})
        if (!(v >= 0) || !std::isfinite(v)) throw Error(ErrorKind::domain, "EinsteinParams: rates must be finite and >= 0");
}

bool EinsteinParams::shelving(double ratio) const {
    return B1W1 >= ratio * B2W2 && A1 >= ratio * B2W2 && B2W2 >= ratio * A2;
}

bool EinsteinParams::saturated(double ratio, double tolerance) const {
    if (!(A1 > 0) || B1W1 / A1 < ratio) return false;
    const double exact = rate_steady_state(*this).p1;
    const double approx = (A2 + B2W2) / (2 * A2 + 3 * B2W2);
    return std::abs(approx - exact) <= tolerance * exact;
}

std::vector<Populations> rate_integrate(const EinsteinParams& p, const Populations& start,
                                        const std::vector<double>& t_grid, double dt) {
    p.validate();
    if (std::abs(start.sum() - 1.0) > 1e-10 || start.p0 < 0 || start.p1 < 0 || start.p2 < 0)
        throw Error(ErrorKind::domain, "rate_integrate: populations must be >= 0 and sum to 1");
    std::vector<Populations> out;
    out.reserve(t_grid.size());
    Populations r = start;
    double t = t_grid.empty() ? 0.0 : t_grid.front();
    for (double target : t_grid) {
        while (t < target - 1e-12 * std::max(1.0, std::abs(target))) {
            const double h = std::min(dt, target - t);
            const Populations k1 = deriv(p, r);
            const Populations k2 = deriv(p, axpy(r, 0.5 * h, k1));
            const Populations k3 = deriv(p, axpy(r, 0.5 * h, k2));
            const Populations k4 = deriv(p, axpy(r, h, k3));
            r.p0 += h / 6 * (k1.p0 + 2 * k2.p0 + 2 * k3.p0 + k4.p0);
            r.p1 += h / 6 * (k1.p1 + 2 * k2.p1 + 2 * k3.p1 + k4.p1);
            r.p2 += h / 6 * (k1.p2 + 2 * k2.p2 + 2 * k3.p2 + k4.p2);
            t += h;
        }
        out.push_back(r);
    }
    return out;
}

Populations rate_steady_state(const EinsteinParams& p) {
    p.validate();
    const double den = p.A1 * (p.A2 + 2 * p.B2W2) + p.B1W1 * (2 * p.A2 + 3 * p.B2W2);
    if (!(den > 0)) {
        // One sector is decoupled.
        Populations r{1, 0, 0};
        if (p.A2 == 0 && p.B2W2 == 0) {
            if (!(p.A1 + p.B1W1 > 0)) throw Error(ErrorKind::domain, "rate_steady_state: all rates vanish");
            r.p1 = p.B1W1 / (p.A1 + 2 * p.B1W1);
        } else {
            r.p2 = p.B2W2 / (p.A2 + 2 * p.B2W2);
        }
        r.p0 = 1.0 - r.p1 - r.p2;
        return r;
    }
    Populations r;
    r.p1 = p.B1W1 * (p.A2 + p.B2W2) / den;
    r.p2 = p.B2W2 * (p.A1 + p.B1W1) / den;
    r.p0 = 1.0 - r.p1 - r.p2;
    return r;
}

Populations rate_transient_saturated(const EinsteinParams& p, double t) {
    const double s = 2 * p.A2 + 3 * p.B2W2;
    const double slow = std::exp(-(p.A2 + 1.5 * p.B2W2) * t);
    const double fast = std::exp(-(2 * p.B1W1 + p.A1 + 0.5 * p.B2W2) * t);
    Populations r;
    r.p1 = p.B2W2 / (2 * s) * slow - 0.5 * fast + (p.A2 + p.B2W2) / s;
    r.p2 = p.B2W2 / s * (1 - slow);
    r.p0 = 1 - r.p1 - r.p2;
    return r;
}

RateG2 g2_rate_saturated(const EinsteinParams& p, const std::vector<double>& tau_grid) {
    p.validate();
    RateG2 g;
    g.regime_ok = p.shelving() && p.saturated();
    if (!g.regime_ok) g.warning = "g2_rate_saturated: parameters outside the saturated shelving regime";
    const double slow_rate = p.A2 + 1.5 * p.B2W2;
    const double fast_rate = 2 * p.B1W1 + p.A1 + 0.5 * p.B2W2;
    const double q = p.A2 + p.B2W2;
    for (double tau : tau_grid) {
        const double slow = std::exp(-slow_rate * tau);
        g.g11.push_back(1 + p.B2W2 / (2 * q) * slow - (2 * p.A2 + 3 * p.B2W2) / (2 * q) * std::exp(-fast_rate * tau));
        g.g22.push_back(1 - slow);
    }
    if (g.regime_ok && p.B1W1 >= 10 * p.B2W2)
        for (double tau : tau_grid)
            g.g11_simplified.push_back(
                1 + 0.5 * (std::exp(-1.5 * p.B2W2 * tau) - 3 * std::exp(-2 * p.B1W1 * tau)));
    return g;
}

std::vector<double> g2_rate_regression(const EinsteinParams& p, const std::vector<double>& tau_grid, double dt) {
    const double inf = rate_steady_state(p).p1;
    if (!(inf > 0)) throw Error(ErrorKind::domain, "g2_rate_regression: zero steady emission");
    const auto curve = rate_integrate(p, Populations{1, 0, 0}, tau_grid, dt);
    std::vector<double> g;
    for (const auto& r : curve) g.push_back(r.p1 / inf);
    return g;
}

TelegraphEstimates telegraph_estimates(const EinsteinParams& p) {
    p.validate();
    const double strong = p.A1 + 2 * p.B1W1;
    if (!(strong > 0)) throw Error(ErrorKind::domain, "telegraph_estimates: strong transition is idle");
    const double ground = (p.A1 + p.B1W1) / strong;
    const double into_shelf = p.B2W2 * ground;
    const double out_of_shelf = p.A2 + p.B2W2;
    if (!(into_shelf > 0) || !(out_of_shelf > 0))
        throw Error(ErrorKind::domain, "telegraph_estimates: zero shelf gradient, no shelving");
    TelegraphEstimates e;
    e.T_B = 1.0 / into_shelf;
    e.T_D = 1.0 / out_of_shelf;
    e.hump_ratio = e.T_D / e.T_B;
    return e;
}

double hump_from_curve(const std::vector<Populations>& curve, double rho11_inf) {
    double peak = 0;
    for (const auto& r : curve) peak = std::max(peak, r.p1);
    return (peak - rho11_inf) / rho11_inf;
}

double collapse_time(double T_B, double t_d) {
    if (!(t_d > 0) || !(T_B > t_d)) throw Error(ErrorKind::domain, "collapse_time: need T_B > t_d > 0");
    return t_d * std::log(T_B / t_d);
}

std::vector<double> mandel_q(const std::vector<double>& g2, double h, double mean_intensity) {
    std::vector<double> q(g2.size(), 0.0);
    double inner = 0, outer = 0;
    for (std::size_t k = 1; k < g2.size(); ++k) {
        const double prev_inner = inner;
        inner += 0.5 * h * ((g2[k - 1] - 1) + (g2[k] - 1));
        outer += 0.5 * h * (prev_inner + inner);
        q[k] = 2 * mean_intensity / (k * h) * outer;
    }
    return q;
}

double mandel_q_infinity(const std::vector<double>& g2, double h, double mean_intensity) {
    double s = 0;
    for (std::size_t k = 1; k < g2.size(); ++k) s += 0.5 * h * ((g2[k - 1] - 1) + (g2[k] - 1));
    return 2 * mean_intensity * s;
}

double CountingModel::mean(double T) const {
    return mode == CountingMode::poisson_zero_excess ? 0.5 * gamma1 * eta * T : H * I0 * T;
}

double log_counting_distribution(long long n, double T, const CountingModel& m) {
    if (n < 0 || !(T > 0)) throw Error(ErrorKind::domain, "counting_distribution: need n >= 0 and T > 0");
    const double a = m.zero_excess;
    if (!(a >= 0 && a <= 1)) throw Error(ErrorKind::domain, "counting_distribution: zero excess must lie in [0, 1]");
    const double lam = m.mean(T);
    const double nd = static_cast<double>(n);
    double log_pois;
    if (lam == 0.0) log_pois = n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    else log_pois = nd * std::log(lam) - lam - std::lgamma(nd + 1.0);
    const double log_rest = a < 1 ? std::log1p(-a) + log_pois : -std::numeric_limits<double>::infinity();
    if (n != 0) return log_rest;
    if (a == 0) return log_rest;
    // log(a + (1-a) e^{-lam})
    const double la = std::log(a);
    const double hi = std::max(la, log_rest), lo = std::min(la, log_rest);
    return hi + std::log1p(std::exp(lo - hi));
}

double counting_distribution(long long n, double T, const CountingModel& m) {
    return std::exp(log_counting_distribution(n, T, m));
}

}  // namespace qtraj
