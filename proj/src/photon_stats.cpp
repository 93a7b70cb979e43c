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

#include "qtraj/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "qtraj/stats.hpp"

namespace qtraj {

namespace {

bool is_uniform(const std::vector<double>& t) {
    if (t.size() < 3) return true;
    const double h = t[1] - t[0];
    for (std::size_t i = 2; i < t.size(); ++i)
        if (std::abs((t[i] - t[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h))) return false;
    return true;
}

// Trapezoidal solve of I = I1 + I1 * I with spacing h.
std::vector<double> volterra(const std::vector<double>& i1, double h) {
    const std::size_t n = i1.size();
    std::vector<double> out(n, 0.0);
    if (n == 0) return out;
    const double denom = 1.0 - 0.5 * h * i1[0];
    if (!(std::abs(denom) > 1e-12))
        throw Error(ErrorKind::numerical, "any_photon_rate: step too large for the kernel");
    out[0] = i1[0] / denom;
    for (std::size_t k = 1; k < n; ++k) {
        double s = 0.5 * out[0] * i1[k];
        for (std::size_t j = 1; j < k; ++j) s += out[k - j] * i1[j];
        out[k] = (i1[k] + h * s) / denom;
    }
    return out;
}

}  // namespace

void DetectorConfig::validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
        throw Error(ErrorKind::config, "DetectorConfig: efficiency must lie in [0, 1]");
    if (!(threshold > 0.0))
        throw Error(ErrorKind::config, "DetectorConfig: threshold T0 must be > 0");
}

DelayCurve delay_function(const LindbladModel& model, const StateVector& psi_reset,
                          const std::vector<double>& t_grid) {
    if (psi_reset.size() != model.dim())
        throw Error(ErrorKind::dimension, "delay_function: state dimension mismatch");
    const StateVector psi = normalize(psi_reset).first;
    const Operator heff = effective_hamiltonian(model);
    DelayCurve c{t_grid, std::vector<double>(t_grid.size())};
    if (t_grid.empty()) return c;
    if (is_uniform(t_grid) && t_grid.size() > 1) {
        const Operator u = propagator(heff, t_grid[1] - t_grid[0]);
        StateVector s = propagator(heff, t_grid[0]) * psi;
        for (std::size_t k = 0; k < t_grid.size(); ++k) {
            if (k > 0) s = u * s;
            c.p0[k] = std::min(1.0, s.squaredNorm());
        }
    } else {
        const EffectivePropagator prop(heff);
        for (std::size_t k = 0; k < t_grid.size(); ++k)
            c.p0[k] = std::min(1.0, prop.apply(t_grid[k], psi).squaredNorm());
    }
    return c;
}

std::vector<double> next_photon_density(const DelayCurve& curve) {
    const auto& t = curve.t_grid;
    const auto& p = curve.p0;
    const std::size_t n = p.size();
    if (n < 2 || t.size() != n) throw Error(ErrorKind::domain, "next_photon_density: need >= 2 points");
    for (std::size_t k = 1; k < n; ++k)
        if (p[k] > p[k - 1] + 1e-12) throw Error(ErrorKind::domain, "next_photon_density: curve is not monotone");
    std::vector<double> out(n);
    out[0] = -(p[1] - p[0]) / (t[1] - t[0]);
    out[n - 1] = -(p[n - 1] - p[n - 2]) / (t[n - 1] - t[n - 2]);
    for (std::size_t k = 1; k + 1 < n; ++k) out[k] = -(p[k + 1] - p[k - 1]) / (t[k + 1] - t[k - 1]);
    return out;
}

BetaEvolution conditional_beta_evolution(const LindbladModel& model, const DensityMatrix& rho0,
                                         double beta, const std::vector<double>& t_grid, double dt) {
    if (!(beta >= 0.0 && beta <= 1.0))
        throw Error(ErrorKind::domain, "conditional_beta_evolution: beta must lie in [0, 1]");
    const Operator heff = effective_hamiltonian(model);
    const Operator a = -I * heff;
    const Operator ad = a.adjoint();
    const double keep = 1.0 - beta;
    Generator gen = [&](const DensityMatrix& rho, DensityMatrix& out) {
        out.noalias() = a * rho;
        out.noalias() += rho * ad;
        if (keep > 0)
            for (const auto& c : model.collapse_ops) out.noalias() += keep * (c * rho * c.adjoint());
    };
    RK4Options opt;
    opt.dt = dt;
    opt.trace_tolerance = -1;
    BetaEvolution ev;
    ev.rho = rk4_evolve(gen, rho0, t_grid, opt);
    for (const auto& r : ev.rho) {
        ev.survival.push_back(r.trace().real());
        double rate = 0;
        for (const auto& c : model.collapse_ops) rate += (c * r * c.adjoint()).trace().real();
        ev.rate.push_back(beta * rate);
    }
    return ev;
}

std::vector<double> any_photon_rate(const std::vector<double>& i1, const std::vector<double>& t_grid,
                                    double tolerance) {
    if (i1.size() != t_grid.size() || t_grid.size() < 3)
        throw Error(ErrorKind::domain, "any_photon_rate: need matching inputs with >= 3 points");
    if (!is_uniform(t_grid)) throw Error(ErrorKind::domain, "any_photon_rate: grid must be uniform");
    const double h = t_grid[1] - t_grid[0];
    std::vector<double> fine = volterra(i1, h);
    std::vector<double> half;
    for (std::size_t k = 0; k < i1.size(); k += 2) half.push_back(i1[k]);
    const std::vector<double> coarse = volterra(half, 2 * h);
    double scale = 0, err = 0;
    for (double v : fine) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < coarse.size(); ++k)
        err = std::max(err, std::abs(fine[2 * k] - coarse[k]) / 3.0);
    if (scale > 0 && err > tolerance * scale)
        throw Error(ErrorKind::numerical, "any_photon_rate: grid too coarse, estimated relative error " +
                                              std::to_string(err / scale));
    return fine;
}

std::vector<double> g2_from_rate(const std::vector<double>& rate, double steady_rate) {
    if (!(steady_rate > 0)) throw Error(ErrorKind::domain, "g2_from_rate: steady rate must be > 0");
    std::vector<double> g(rate);
    for (double& v : g) v /= steady_rate;
    return g;
}

std::vector<double> master_g2(const LindbladModel& model, const std::vector<double>& tau_grid, double dt) {
    DensityMatrix rho0 = DensityMatrix::Zero(model.dim(), model.dim());
    rho0(0, 0) = 1.0;
    SteadyStateOptions sso;
    const DensityMatrix ss = steady_state(model, rho0, sso);
    Operator n = Operator::Zero(model.dim(), model.dim());
    DensityMatrix sigma = DensityMatrix::Zero(model.dim(), model.dim());
    for (const auto& c : model.collapse_ops) {
        n += c.adjoint() * c;
        sigma += c * ss * c.adjoint();
    }
    const double mean_rate = expect_rho(n, ss);
    if (!(mean_rate > 0)) throw Error(ErrorKind::domain, "master_g2: zero steady emission rate");
    const auto evolved = master_evolve(model, sigma, tau_grid, dt);
    std::vector<double> g;
    for (const auto& r : evolved) g.push_back(expect_rho(n, r) / (mean_rate * mean_rate));
    return g;
}

double tls_delay_closed_form(double omega, double delta, double gamma, double t) {
    if (omega == 0.0) return 1.0;
    const cplx a(-gamma, delta);
    const cplx root = std::sqrt(cplx(gamma * gamma - delta * delta - omega * omega, -2.0 * delta * gamma));
    const cplx l1 = 0.5 * (a + root), l2 = 0.5 * (a - root);
    cplx c0, dc0;
    if (std::abs(l1 - l2) < 1e-9 * std::max(1.0, std::abs(l1))) {
        const cplx l = 0.5 * (l1 + l2);
        c0 = std::exp(l * t) * (1.0 - l * t);
        dc0 = -l * l * t * std::exp(l * t);
    } else {
        c0 = (l2 * std::exp(l1 * t) - l1 * std::exp(l2 * t)) / (l2 - l1);
        dc0 = l1 * l2 * (std::exp(l1 * t) - std::exp(l2 * t)) / (l2 - l1);
    }
    const cplx c1 = 2.0 * I * dc0 / omega;
    return std::norm(c0) + std::norm(c1);
}

double tls_g2_closed_form(double omega, double gamma, double tau) {
    const double a = 1.5 * gamma;
    const double m2 = omega * omega - 0.25 * gamma * gamma;
    double osc;
    if (m2 > 1e-14) {
        const double mu = std::sqrt(m2);
        osc = std::cos(mu * tau) + a / mu * std::sin(mu * tau);
    } else if (m2 < -1e-14) {
        const double k = std::sqrt(-m2);
        osc = std::cosh(k * tau) + a / k * std::sinh(k * tau);
    } else {
        osc = 1.0 + a * tau;
    }
    return 1.0 - std::exp(-a * tau) * osc;
}

double tls_beta_rate_closed_form(double omega, double gamma, double beta, double t) {
    // Denominator z^3 + 3G z^2 + (2G^2 + W^2) z + beta G W^2.
    const double c2 = 3 * gamma, c1 = 2 * gamma * gamma + omega * omega, c0 = beta * gamma * omega * omega;
    Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
    comp(0, 0) = -c2;
    comp(0, 1) = -c1;
    comp(0, 2) = -c0;
    comp(1, 0) = 1;
    comp(2, 1) = 1;
    const Eigen::Vector3cd z = comp.eigenvalues();
    cplx sum = 0;
    for (int k = 0; k < 3; ++k) {
        const cplx d = 3.0 * z(k) * z(k) + 2.0 * c2 * z(k) + c1;
        sum += std::exp(z(k) * t) / d;
    }
    return beta * gamma * omega * omega * sum.real();
}

ValidityResult validity_check(const VSystemParams& p, double threshold) {
    const double G = p.gamma11;
    const double shift = p.omega1 * p.omega1 + 4 * p.delta2 * (p.delta1 - p.delta2);
    const double big = 16 * p.delta2 * p.delta2 * G * G + shift * shift;
    const double dd = p.delta1 - p.delta2;
    ValidityResult r;
    const double rhs1 = 0.25 * big / (G * G + dd * dd);
    r.margin_drive = p.omega2 * p.omega2 / rhs1;
    const double rhs2 = p.omega1 * p.omega1 * p.omega2 * p.omega2 * G / big;
    if (p.gamma22 == 0.0) r.margin_decay = 0.0;
    else r.margin_decay = rhs2 > 0 ? p.gamma22 / rhs2 : std::numeric_limits<double>::infinity();
    r.ok = r.margin_drive <= threshold && r.margin_decay <= threshold;
    return r;
}

PeriodStats vsystem_periods(const VSystemParams& p, double threshold) {
    p.validate();
    const ValidityResult v = validity_check(p, threshold);
    if (!v.ok)
        throw Error(ErrorKind::validity,
                    "vsystem_periods: telegraph approximation invalid (drive margin " +
                        std::to_string(v.margin_drive) + ", decay margin " + std::to_string(v.margin_decay) +
                        ", threshold " + std::to_string(threshold) + ")");
    if (!(p.omega2 > 0))
        throw Error(ErrorKind::validity, "vsystem_periods: omega2 = 0 gives no dark periods");
    const double G = p.gamma11;
    const double w1 = p.omega1 * p.omega1, w2 = p.omega2 * p.omega2;
    const double s = w1 - 4 * p.delta2 * (p.delta2 - p.delta1);
    PeriodStats st;
    st.T_D = (16 * p.delta2 * p.delta2 * G * G + s * s) / (2 * w1 * w2 * G);
    st.T_L = (2 * p.delta1 * p.delta1 + 2 * G * G + w1) /
             (2 * G * G + 2 * (p.delta1 - p.delta2) * (p.delta1 - p.delta2)) * st.T_D;
    const double rho11 = 0.25 * w1 / (p.delta1 * p.delta1 + G * G + 0.5 * w1);
    st.tau_L = 1.0 / (2 * G * rho11);
    st.jump_rate = 1.0 / (st.T_D + st.T_L);
    return st;
}

double vsystem_jump_rate_resonant(const VSystemParams& p) {
    const double G = p.gamma11, d2 = p.delta2 * p.delta2;
    const double w1 = p.omega1 * p.omega1, w2 = p.omega2 * p.omega2;
    const double q = w1 - 4 * d2;
    return 4 * w1 * w2 * G / (16 * d2 * G * G + q * q) * (G * G + d2) / (4 * G * G + 2 * d2 + w1);
}

PeriodStats periods_from_model(const LindbladModel& model, const StateVector& psi_reset) {
    const EffectivePropagator prop(effective_hamiltonian(model));
    if (!prop.diagonalized())
        throw Error(ErrorKind::numerical, "periods_from_model: H_eff is not diagonalizable");
    const auto& lam = prop.eigenvalues();
    const Operator& v = prop.eigenvectors();
    const Eigen::VectorXcd c = prop.inverse_eigenvectors() * normalize(psi_reset).first;
    int slow = 0;
    for (int k = 1; k < lam.size(); ++k)
        if (lam(k).imag() > lam(slow).imag()) slow = k;
    if (!(lam(slow).imag() < -1e-14))
        throw Error(ErrorKind::domain, "periods_from_model: no-jump evolution does not decay");
    PeriodStats st;
    st.T_D = 1.0 / (-2.0 * lam(slow).imag());
    const double p = std::norm(c(slow)) * v.col(slow).squaredNorm();
    // int_0^inf P0 dt, term by term.
    cplx total = 0;
    for (int j = 0; j < lam.size(); ++j)
        for (int k = 0; k < lam.size(); ++k) {
            if (std::abs(c(j)) == 0.0 || std::abs(c(k)) == 0.0) continue;
            total += std::conj(c(j)) * c(k) * v.col(j).dot(v.col(k)) * I / (std::conj(lam(j)) - lam(k));
        }
    st.tau_L = (total.real() - p * st.T_D) / (1.0 - p);
    st.T_L = st.tau_L / p;
    st.jump_rate = 1.0 / (st.T_D + st.T_L);
    return st;
}

double vsystem_g2_tail(const PeriodStats& s, double tau) {
    return 1.0 + s.T_D / s.T_L * std::exp(-(1.0 / s.T_D + 1.0 / s.T_L) * tau);
}

DelayPeriods mean_periods_from_delay(const DelayCurve& curve, double T0) {
    const auto& t = curve.t_grid;
    const auto& p = curve.p0;
    const std::size_t n = t.size();
    if (n < 10 || p.size() != n) throw Error(ErrorKind::domain, "mean_periods_from_delay: need >= 10 points");
    if (!(T0 > t.front() && T0 < t.back()))
        throw Error(ErrorKind::domain, "mean_periods_from_delay: T0 outside the grid");

    // Exponential tail from the last tenth of the grid.
    const std::size_t first = n - std::max<std::size_t>(3, n / 10);
    std::vector<double> xs, ys;
    for (std::size_t k = first; k < n; ++k) {
        if (!(p[k] > 0))
            throw Error(ErrorKind::numerical, "mean_periods_from_delay: P0 underflows on the tail");
        xs.push_back(t[k]);
        ys.push_back(std::log(p[k]));
    }
    const auto [slope, icept] = linear_fit(xs, ys);
    if (!(slope < 0)) throw Error(ErrorKind::numerical, "mean_periods_from_delay: tail does not decay");
    const double tail = std::exp(icept + slope * t.back()) / (-slope);

    std::size_t i = 0;
    while (t[i + 1] <= T0) ++i;
    const double f = (T0 - t[i]) / (t[i + 1] - t[i]);
    const double pT0 = p[i] * (1 - f) + p[i + 1] * f;
    if (!(pT0 > std::numeric_limits<double>::epsilon()))
        throw Error(ErrorKind::numerical, "mean_periods_from_delay: P0(T0) is below machine tolerance");

    double below = 0, above = 0;
    for (std::size_t k = 0; k < i; ++k) below += 0.5 * (p[k] + p[k + 1]) * (t[k + 1] - t[k]);
    below += 0.5 * (p[i] + pT0) * (T0 - t[i]);
    above += 0.5 * (pT0 + p[i + 1]) * (t[i + 1] - T0);
    for (std::size_t k = i + 1; k + 1 < n; ++k) above += 0.5 * (p[k] + p[k + 1]) * (t[k + 1] - t[k]);
    above += tail;

    DelayPeriods r;
    r.T_D_tail = above / pT0;
    r.T_D = T0 + r.T_D_tail;
    const double first_moment = below - T0 * pT0;  // int_0^T0 t I1
    const double mass = 1.0 - pT0;                  // int_0^T0 I1
    const double tau = first_moment / mass;
    r.T_L = tau / pT0;
    r.T_L_tail = tau / (pT0 * std::exp(T0 / r.T_D_tail));
    return r;
}

std::vector<Period> classify_periods(const std::vector<JumpEvent>& jumps, double T0) {
    std::vector<Period> out;
    if (jumps.empty()) return out;
    double run_start = jumps[0].t, run_len = 0;
    for (std::size_t k = 1; k < jumps.size(); ++k) {
        const double gap = jumps[k].t - jumps[k - 1].t;
        if (gap > T0) {
            out.push_back({PeriodKind::bright, run_start, run_len});
            out.push_back({PeriodKind::dark, jumps[k - 1].t, gap});
            run_start = jumps[k].t;
            run_len = 0;
        } else {
            run_len += gap;
        }
    }
    out.push_back({PeriodKind::bright, run_start, run_len});
    return out;
}

std::vector<Period> classify_periods(const TrajectoryRecord& record, double T0) {
    return classify_periods(record.jumps, T0);
}

PeriodSummary summarize_periods(const std::vector<Period>& periods, double T0) {
    std::vector<double> dark, bright;
    for (const auto& p : periods) (p.kind == PeriodKind::dark ? dark : bright).push_back(p.length);
    PeriodSummary s;
    s.n_dark = dark.size();
    s.n_bright = bright.size();
    if (!dark.empty()) {
        s.mean_dark = mean(dark);
        s.stderr_dark = std_error(dark);
        s.T_D = s.mean_dark - T0;
    }
    if (!bright.empty()) {
        s.mean_bright = mean(bright);
        s.stderr_bright = std_error(bright);
        s.T_L = s.T_D > 0 ? s.mean_bright * std::exp(-T0 / s.T_D) : s.mean_bright;
    }
    return s;
}

std::vector<JumpEvent> sample_jump_record(const LindbladModel& model, const StateVector& psi0,
                                          double t_end, Rng& rng, double lattice_dt) {
    const WaitingTimeSampler sampler(model, lattice_dt);
    std::vector<JumpEvent> out;
    StateVector psi = normalize(psi0).first;
    double t = 0;
    while (t < t_end) {
        WaitingTime w = sampler.sample(psi, rng, t_end - t);
        if (w.censored) break;
        t += w.t;
        out.push_back({t, w.channel});
        psi = std::move(w.state);
    }
    return out;
}

}  // namespace qtraj
