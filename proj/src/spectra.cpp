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

#include "qtraj/spectra.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>

#include "qtraj/jump.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

namespace {

void check_channel(const LindbladModel& model, int channel) {
    if (channel < 0 || channel >= model.channels())
        throw Error(ErrorKind::domain, "spectra: monitored channel " + std::to_string(channel) + " out of range");
}

// Lower-left block of exp(dt [[-i H_eff, 0], [C, -i H_eff - i omega]]).
Operator source_block(const Operator& heff, const Operator& c, double omega, double dt) {
    const int d = static_cast<int>(heff.rows());
    Operator m = Operator::Zero(2 * d, 2 * d);
    m.topLeftCorner(d, d) = -I * heff;
    m.bottomLeftCorner(d, d) = c;
    m.bottomRightCorner(d, d) = -I * heff - I * omega * identity(d);
    // propagator(h, t) = exp(-i h t), so pass h = i m.
    const Operator e = propagator(I * m, dt);
    return e.bottomLeftCorner(d, d);
}

long step_count(double span, double dt, const char* what) {
    const double n = span / dt;
    const long k = std::lround(n);
    if (std::abs(n - static_cast<double>(k)) > 1e-6 * std::max(1.0, n))
        throw Error(ErrorKind::domain, std::string(what) + " must be a multiple of dt");
    return k;
}

struct Engine {
    const LindbladModel& model;
    const std::vector<double>& omega;
    const SpectrumConfig& cfg;
    const GateConfig* gate;
    Operator u;
    Operator xstack;  // (n_omega * d) x d
    Eigen::VectorXcd rot;
    long burn_steps, window_steps;
    int required;  // detections within T0 needed to open

    Engine(const LindbladModel& m, const std::vector<double>& w, const SpectrumConfig& c, const GateConfig* g)
        : model(m), omega(w), cfg(c), gate(g) {
        validate(model);
        check_channel(model, cfg.channel);
        if (!(cfg.dt > 0) || !(cfg.window > 0) || !(cfg.burn_in >= 0))
            throw Error(ErrorKind::domain, "spectrum: need dt > 0, window > 0, burn_in >= 0");
        if (omega.empty()) throw Error(ErrorKind::domain, "spectrum: empty omega grid");
        if (cfg.trajectories < 1) throw Error(ErrorKind::domain, "spectrum: N must be >= 1");
        burn_steps = step_count(cfg.burn_in, cfg.dt, "spectrum: burn_in");
        window_steps = step_count(cfg.window, cfg.dt, "spectrum: window");
        const Operator heff = effective_hamiltonian(model);
        const int d = model.dim();
        u = propagator(heff, cfg.dt);
        xstack.resize(static_cast<Eigen::Index>(omega.size()) * d, d);
        rot.resize(static_cast<Eigen::Index>(omega.size()));
        for (std::size_t k = 0; k < omega.size(); ++k) {
            xstack.block(static_cast<Eigen::Index>(k) * d, 0, d, d) =
                source_block(heff, model.collapse_ops[cfg.channel], omega[k], cfg.dt);
            rot(static_cast<Eigen::Index>(k)) = std::exp(-I * omega[k] * cfg.dt);
        }
        required = 1;
        if (gate && gate->open_rate > 0) required = std::max(1, static_cast<int>(std::ceil(gate->open_rate * gate->T0)));
    }

    // samples[0][k]: |beta|^2/|phi|^2 ungated; [1][k]: detections in the window.
    // Gated: [2][k] |beta|^2/|phi|^2, [3][k] open time, [4][k] detections while open.
    double run(std::size_t index, std::vector<std::vector<double>>& samples) const {
        const int d = model.dim();
        const Eigen::Index nw = static_cast<Eigen::Index>(omega.size());
        Rng rng(cfg.seed, index);
        StateVector phi = normalize(model_initial).first;
        Eigen::MatrixXcd bu = Eigen::MatrixXcd::Zero(d, nw);
        Eigen::MatrixXcd bg = Eigen::MatrixXcd::Zero(d, nw);
        Eigen::MatrixXcd tmp(d, nw);
        Eigen::VectorXcd src(nw * d);
        StateVector next(d);
        std::vector<double> rates(static_cast<std::size_t>(model.channels()));
        double r = rng.uniform_open0();
        double jumps = 0;
        double open_time = 0;
        double counted = 0, counted_open = 0;
        bool open = false;
        double last = -std::numeric_limits<double>::infinity();
        std::deque<double> recent;
        long detections = 0;
        const double T0 = gate ? gate->T0 : std::numeric_limits<double>::infinity();

        for (long s = 0; s < burn_steps + window_steps; ++s) {
            const double t = s * cfg.dt;
            const bool accumulate = s >= burn_steps;
            if (accumulate) {
                src.noalias() = xstack * phi;
                Eigen::Map<const Eigen::MatrixXcd> srcm(src.data(), d, nw);
                tmp.noalias() = u * bu;
                bu = tmp * rot.asDiagonal();
                bu += srcm;
                if (gate) {
                    while (!recent.empty() && t - recent.front() >= T0) recent.pop_front();
                    open = std::isinf(T0) ? detections >= required
                                                     : static_cast<int>(recent.size()) >= required &&
                                                           t - last < T0;
                    tmp.noalias() = u * bg;
                    if (open) {
                        bg = tmp * rot.asDiagonal();
                        bg += srcm;
                        open_time += cfg.dt;
                    } else {
                        bg = tmp;
                    }
                }
            }
            next.noalias() = u * phi;
            phi = next;
            if (phi.squaredNorm() < r) {
                double total = 0;
                for (int m = 0; m < model.channels(); ++m) {
                    rates[m] = (model.collapse_ops[m] * phi).squaredNorm();
                    total += rates[m];
                }
                if (!(total > 0)) throw Error(ErrorKind::numerical, "spectrum: jump with zero rate");
                double pick = rng.uniform() * total;
                int ch = 0;
                while (ch + 1 < model.channels() && pick >= rates[ch]) pick -= rates[ch++];
                const Operator& c = model.collapse_ops[ch];
                const double nrm = std::sqrt(rates[ch]);
                next.noalias() = c * phi;
                phi = next / nrm;
                if (accumulate) {
                    counted += 1;
                    if (open) counted_open += 1;
                    tmp.noalias() = c * bu;
                    bu = tmp / nrm;
                    if (gate) {
                        tmp.noalias() = c * bg;
                        bg = tmp / nrm;
                    }
                }
                const double tj = t + cfg.dt;
                last = tj;
                ++detections;
                if (gate && !std::isinf(T0)) recent.push_back(tj);
                jumps += 1;
                r = rng.uniform_open0();
            }
        }
        const double pn = phi.squaredNorm();
        samples.assign(gate ? 5 : 2, std::vector<double>(static_cast<std::size_t>(nw)));
        for (Eigen::Index k = 0; k < nw; ++k) {
            samples[0][k] = bu.col(k).squaredNorm() / pn;
            samples[1][k] = counted;
            if (gate) {
                samples[2][k] = bg.col(k).squaredNorm() / pn;
                samples[3][k] = open_time;
                samples[4][k] = counted_open;
            }
        }
        return jumps;
    }

    StateVector model_initial;
};

SpectrumCurve make_curve(const std::vector<double>& omega, double window) {
    SpectrumCurve c;
    c.omega = omega;
    c.resolution = 2 * M_PI / window;
    return c;
}

}  // namespace

AuxiliaryPair aux_pair_step(const LindbladModel& model, const AuxiliaryPair& pair, double dt, int channel) {
    check_channel(model, channel);
    const Operator heff = effective_hamiltonian(model);
    AuxiliaryPair out = pair;
    out.phi = propagator(heff, dt) * pair.phi;
    out.beta = std::exp(-I * pair.omega * dt) * (propagator(heff, dt) * pair.beta) +
               source_block(heff, model.collapse_ops[channel], pair.omega, dt) * pair.phi;
    return out;
}

AuxiliaryPair aux_pair_jump(const LindbladModel& model, const AuxiliaryPair& pair, int channel) {
    check_channel(model, channel);
    const Operator& c = model.collapse_ops[channel];
    const StateVector cphi = c * pair.phi;
    const double nrm = cphi.norm();
    if (!(nrm > 0)) throw Error(ErrorKind::domain, "aux_pair_jump: C phi = 0");
    AuxiliaryPair out = pair;
    out.phi = cphi / nrm;
    out.beta = c * pair.beta / nrm;
    return out;
}

SpectrumCurve spectrum_estimate(const LindbladModel& model, const StateVector& psi0,
                                const std::vector<double>& omega_grid, const SpectrumConfig& config) {
    Engine eng(model, omega_grid, config, nullptr);
    eng.model_initial = psi0;
    const EnsembleResult res = run_ensemble(config.trajectories, config.threads, omega_grid, {"S", "counts"},
                                            [&](std::size_t i, std::vector<std::vector<double>>& s) {
                                                return eng.run(i, s);
                                            });
    SpectrumCurve c = make_curve(omega_grid, config.window);
    c.flux = res.mean[1][0] / config.window;
    for (std::size_t k = 0; k < omega_grid.size(); ++k) {
        c.values.push_back(res.mean[0][k] / config.window);
        c.stderr_.push_back(res.stderr_[0][k] / config.window);
    }
    return c;
}

void GateConfig::validate() const {
    if (!(T0 > 0)) throw Error(ErrorKind::config, "GateConfig: T0 must be > 0");
    if (!(open_rate >= 0) || !std::isfinite(open_rate)) throw Error(ErrorKind::config, "GateConfig: open_rate must be >= 0");
    if (open_rate > 0 && std::isinf(T0)) throw Error(ErrorKind::config, "GateConfig: open_rate needs a finite T0");
}

ConditionalSpectrum conditional_spectrum(const LindbladModel& model, const StateVector& psi0, const GateConfig& gate,
                                         const std::vector<double>& omega_grid, const SpectrumConfig& config) {
    gate.validate();
    Engine eng(model, omega_grid, config, &gate);
    eng.model_initial = psi0;
    const EnsembleResult res = run_ensemble(config.trajectories, config.threads, omega_grid,
                                            {"S", "counts", "S_gated", "open_time", "counts_open"},
                                            [&](std::size_t i, std::vector<std::vector<double>>& s) {
                                                return eng.run(i, s);
                                            });
    const double open = res.mean[3][0];
    if (!(open > 0)) throw Error(ErrorKind::domain, "conditional_spectrum: the gate never opened (no detections)");
    ConditionalSpectrum out;
    out.unconditional = make_curve(omega_grid, config.window);
    out.conditional = make_curve(omega_grid, open);
    out.open_fraction = open / config.window;
    out.unconditional.flux = res.mean[1][0] / config.window;
    out.conditional.flux = res.mean[4][0] / open;
    for (std::size_t k = 0; k < omega_grid.size(); ++k) {
        out.unconditional.values.push_back(res.mean[0][k] / config.window);
        out.unconditional.stderr_.push_back(res.stderr_[0][k] / config.window);
        out.conditional.values.push_back(res.mean[2][k] / open);
        out.conditional.stderr_.push_back(res.stderr_[2][k] / open);
    }
    return out;
}

std::vector<double> coherent_spectrum_part(const LindbladModel& model, const StateVector& psi0,
                                           const std::vector<double>& omega_grid, const SpectrumConfig& config) {
    check_channel(model, config.channel);
    const long nb = step_count(config.burn_in, config.dt, "spectrum: burn_in");
    const long nw = step_count(config.window, config.dt, "spectrum: window");
    std::vector<double> grid;
    for (long s = 0; s <= nw; ++s) grid.push_back(config.burn_in + s * config.dt);
    std::vector<double> full{0.0};
    if (nb > 0) full.insert(full.end(), grid.begin(), grid.end());
    else full = grid;
    const DensityMatrix rho0 = projector(normalize(psi0).first);
    const auto rhos = master_evolve(model, rho0, full, std::min(config.dt, 1e-3));
    const std::size_t off = nb > 0 ? 1 : 0;
    const Operator& c = model.collapse_ops[config.channel];
    std::vector<cplx> amp;
    for (std::size_t s = 0; s < grid.size(); ++s) amp.push_back((c * rhos[s + off]).trace());
    std::vector<double> out;
    for (double w : omega_grid) {
        cplx acc = 0;
        for (std::size_t s = 0; s < grid.size(); ++s) {
            const double wt = (s == 0 || s + 1 == grid.size()) ? 0.5 : 1.0;
            acc += wt * amp[s] * std::exp(I * w * grid[s]);
        }
        acc *= config.dt;
        out.push_back(std::norm(acc) / config.window);
    }
    return out;
}

std::vector<double> fejer_smooth(const std::function<double(double)>& f, const std::vector<double>& omega_grid,
                                 double window) {
    if (!(window > 0)) throw Error(ErrorKind::domain, "fejer_smooth: window must be > 0");
    // K(nu) = (L / 2 pi) sinc^2(nu L / 2), unit area.
    const double width = 2 * M_PI / window;
    const double reach = 400 * width;
    const double h = width / 64;
    const long n = static_cast<long>(std::ceil(reach / h));
    std::vector<double> out;
    for (double w : omega_grid) {
        double acc = 0;
        for (long j = -n; j <= n; ++j) {
            const double nu = j * h;
            const double x = 0.5 * nu * window;
            const double sinc = j == 0 ? 1.0 : std::sin(x) / x;
            acc += f(w - nu) * sinc * sinc;
        }
        out.push_back(acc * h * window / (2 * M_PI));
    }
    return out;
}

// ---- correlation functions ---------------------------------------------------

CorrelationResult correlation_mcwf(const LindbladModel& model, const StateVector& psi0, const Operator& A,
                                   const Operator& B, double t, const std::vector<double>& tau_grid,
                                   const CorrelationConfig& config) {
    validate(model);
    const int d = model.dim();
    if (A.rows() != d || A.cols() != d || B.rows() != d || B.cols() != d)
        throw Error(ErrorKind::dimension, "correlation_mcwf: operator dimension mismatch");
    if (!(t >= 0)) throw Error(ErrorKind::domain, "correlation_mcwf: t must be >= 0");
    if (config.trajectories < 1) throw Error(ErrorKind::domain, "correlation_mcwf: N must be >= 1");
    const long t_steps = step_count(t, config.dt, "correlation_mcwf: t");
    std::vector<long> tau_steps;
    for (double tau : tau_grid) {
        if (!(tau >= 0)) throw Error(ErrorKind::domain, "correlation_mcwf: tau must be >= 0");
        tau_steps.push_back(step_count(tau, config.dt, "correlation_mcwf: tau"));
        if (tau_steps.size() > 1 && tau_steps.back() < tau_steps[tau_steps.size() - 2])
            throw Error(ErrorKind::domain, "correlation_mcwf: tau grid must be ascending");
    }
    constexpr double kEps = 1e-8;
    const JumpStepper proto(model, config.dt, Order::first);
    std::atomic<std::size_t> perturbed{0};

    const EnsembleResult res = run_ensemble(
        config.trajectories, config.threads, tau_grid, {"re", "im"},
        [&](std::size_t i, std::vector<std::vector<double>>& samples) {
            JumpStepper st(proto);
            Rng base(config.seed, i);
            std::vector<JumpEvent> jumps;
            StateVector phi = normalize(psi0).first;
            for (long s = 0; s < t_steps; ++s) st.step(phi, s * config.dt, base.uniform(), jumps);

            Operator b = B;
            const Operator id = identity(d);
            auto weights = [&](const Operator& bb, std::vector<StateVector>& chi, std::vector<double>& mu) {
                const cplx coef[4] = {1.0, -1.0, I, -I};
                chi.clear();
                mu.clear();
                for (const cplx c : coef) {
                    const StateVector v = phi + c * (bb * phi);
                    mu.push_back(v.squaredNorm());
                    chi.push_back(v);
                }
                return *std::min_element(mu.begin(), mu.end()) > 1e-20;
            };
            std::vector<StateVector> chi;
            std::vector<double> mu;
            bool shifted = false;
            if (!weights(b, chi, mu)) {
                b = B + kEps * id;
                shifted = true;
                perturbed.fetch_add(1);
                if (!weights(b, chi, mu))
                    throw Error(ErrorKind::numerical, "correlation_mcwf: zero weight after perturbation");
            }
            for (int k = 0; k < 4; ++k) chi[k] /= std::sqrt(mu[k]);
            const std::size_t nstates = shifted ? 5 : 4;
            if (shifted) chi.push_back(phi);

            std::vector<Rng> rngs;
            for (std::size_t k = 0; k < nstates; ++k) {
                if (config.shared_randomness) rngs.push_back(Rng(base.split(0)));
                else rngs.push_back(base.split(k + 1));
            }
            if (config.shared_randomness)
                for (std::size_t k = 1; k < nstates; ++k) rngs[k] = rngs[0];

            samples.assign(2, std::vector<double>(tau_grid.size()));
            long done = 0;
            double events = static_cast<double>(jumps.size());
            for (std::size_t j = 0; j < tau_grid.size(); ++j) {
                for (; done < tau_steps[j]; ++done)
                    for (std::size_t k = 0; k < nstates; ++k) {
                        jumps.clear();
                        st.step(chi[k], t + done * config.dt, rngs[k].uniform(), jumps);
                        events += static_cast<double>(jumps.size());
                    }
                cplx c[4];
                for (int k = 0; k < 4; ++k) c[k] = expectation(A, chi[k]);
                cplx v = 0.25 * (mu[0] * c[0] - mu[1] * c[1] - I * mu[2] * c[2] + I * mu[3] * c[3]);
                if (shifted) v -= kEps * expectation(A, chi[4]);
                samples[0][j] = v.real();
                samples[1][j] = v.imag();
            }
            return events;
        });
    CorrelationResult out;
    out.tau = tau_grid;
    out.perturbed = perturbed.load();
    for (std::size_t j = 0; j < tau_grid.size(); ++j) {
        out.mean.emplace_back(res.mean[0][j], res.mean[1][j]);
        out.stderr_re.push_back(res.stderr_[0][j]);
        out.stderr_im.push_back(res.stderr_[1][j]);
    }
    return out;
}

std::vector<cplx> correlation_regression(const LindbladModel& model, const DensityMatrix& rho0, const Operator& A,
                                         const Operator& B, double t, const std::vector<double>& tau_grid,
                                         double dt) {
    const auto rt = master_evolve(model, rho0, {0.0, t}, dt);
    const DensityMatrix x0 = B * rt.back();
    RK4Options opt;
    opt.dt = dt;
    opt.trace_tolerance = -1;
    opt.symmetrize = false;
    const Generator gen = [&](const DensityMatrix& r, DensityMatrix& out) { out = liouvillian_apply(model, r); };
    std::vector<double> grid = tau_grid;
    const bool prepend = grid.empty() || grid.front() != 0.0;
    if (prepend) grid.insert(grid.begin(), 0.0);
    const auto xs = rk4_evolve(gen, x0, grid, opt);
    std::vector<cplx> out;
    for (std::size_t k = prepend ? 1 : 0; k < xs.size(); ++k) out.push_back((A * xs[k]).trace());
    return out;
}

SpectrumCurve time_dependent_spectrum(const Eigen::MatrixXcd& c, double h, const std::vector<double>& omega_grid) {
    if (c.rows() != c.cols() || c.rows() < 2)
        throw Error(ErrorKind::dimension, "time_dependent_spectrum: need a square grid with >= 2 points");
    if (!(h > 0)) throw Error(ErrorKind::domain, "time_dependent_spectrum: h must be > 0");
    const double nyquist = M_PI / h;
    const Eigen::Index n = c.rows();
    const double T = (n - 1) * h;
    SpectrumCurve out = make_curve(omega_grid, T);
    Eigen::VectorXcd u(n);
    for (double w : omega_grid) {
        if (std::abs(w) > nyquist)
            throw Error(ErrorKind::domain, "time_dependent_spectrum: |omega| above the Nyquist limit pi/h = " +
                                               std::to_string(nyquist));
        for (Eigen::Index j = 0; j < n; ++j) {
            const double wt = (j == 0 || j == n - 1) ? 0.5 * h : h;
            u(j) = wt * std::exp(-I * w * (j * h));
        }
        out.values.push_back((u.dot(c * u)).real() / T);
    }
    out.stderr_.assign(omega_grid.size(), 0.0);
    return out;
}

// ---- analytic spectra --------------------------------------------------------

namespace {

struct MollowCoeffs {
    double B, C, D;
};

MollowCoeffs mollow_coeffs(double omega1, double delta1, double gamma) {
    const double w = omega1 * omega1, g = gamma * gamma, d = delta1 * delta1;
    MollowCoeffs m;
    m.B = 6 * g - 2 * w - 2 * d;
    m.C = w * w + 2 * w * g + 9 * g * g + d * d + 2 * d * w - 6 * g * d;
    m.D = g * std::pow(w + 2 * d + 2 * g, 2);
    return m;
}

// pi S_Mollow
double mollow_pi(const MollowCoeffs& m, double omega1, double gamma, double delta) {
    const double w = omega1 * omega1, x = delta * delta;
    return gamma * w * (w + 2 * x + 8 * gamma * gamma) / (2 * (x * x * x + m.B * x * x + m.C * x + m.D));
}

}  // namespace

double TlsSpectrum::incoherent(double delta) const {
    const double w = omega1 * omega1;
    const double pref = gamma * w / (w + 2 * (delta1 * delta1 + gamma * gamma));
    const MollowCoeffs m = mollow_coeffs(omega1, delta1, gamma);
    const double x = delta * delta;
    return pref / M_PI * gamma * w * (w + 2 * x + 8 * gamma * gamma) /
           (2 * (std::pow(x, 3) + m.B * x * x + m.C * x + m.D));
}

double TlsSpectrum::coherent_weight() const {
    const double w = omega1 * omega1;
    const double s = 2 * (delta1 * delta1 + gamma * gamma);
    return gamma * w / (w + s) * s / (w + s);
}

double VSystemSpectrum::mollow(double delta) const {
    const double x = delta * delta;
    return omega1_ * omega1_ * gamma_ * (omega1_ * omega1_ + 2 * x + 8 * gamma_ * gamma_) /
           (2 * M_PI * (x * x * x + B * x * x + C * x + D));
}

double VSystemSpectrum::peak(double delta) const {
    return A_p * Gamma_p * Gamma_p / (M_PI * (delta * delta + Gamma_p * Gamma_p));
}

VSystemSpectrum vsystem_analytic_spectrum(const VSystemParams& p, double threshold) {
    p.validate();
    const ValidityResult v = validity_check(p, threshold);
    if (!v.ok)
        throw Error(ErrorKind::validity, "vsystem_analytic_spectrum: weak-drive conditions violated (drive margin " +
                                             std::to_string(v.margin_drive) + ", decay margin " +
                                             std::to_string(v.margin_decay) + ")");
    if (!(p.omega2 > 0)) throw Error(ErrorKind::validity, "vsystem_analytic_spectrum: omega2 = 0 has no narrow peak");
    const double G = p.gamma11, g = G * G;
    const double d1 = p.delta1, d2 = p.delta2;
    const double w1 = p.omega1 * p.omega1, w2 = p.omega2 * p.omega2;
    const MollowCoeffs m = mollow_coeffs(p.omega1, d1, G);
    VSystemSpectrum s;
    s.B = m.B;
    s.C = m.C;
    s.D = m.D;
    s.omega1_ = p.omega1;
    s.gamma_ = G;
    const double shift = std::pow(w1 - 4 * d2 * d2 + 4 * d1 * d2, 2) + 16 * d2 * d2 * g;
    const double q = w1 + 2 * d2 * d2 + 4 * d1 * d1 - 4 * d1 * d2 + 4 * g;
    s.A_p = 2 * (d1 * d1 + g) * ((d1 - d2) * (d1 - d2) + g) * shift / (w1 * w2 * G * q * q);
    s.Gamma_p = 2 * w1 * w2 * G * q / (shift * (w1 + 2 * d1 * d1 + 2 * g));
    s.coherent_weight = 2 * (d1 * d1 + g) / q;
    return s;
}

double TelegraphSpectrum::mollow(double delta) const {
    const MollowCoeffs m = mollow_coeffs(omega1, delta1, gamma);
    return mollow_pi(m, omega1, gamma, delta) / M_PI;
}

double TelegraphSpectrum::peak(double delta) const {
    if (A_p == 0) return 0;
    return A_p * Gamma_p * Gamma_p / (M_PI * (delta * delta + Gamma_p * Gamma_p));
}

TelegraphSpectrum telegraph_spectrum(double omega1, double delta1, double gamma, double T_L, double T_D) {
    if (!(T_L > 0) || !(T_D >= 0) || !(gamma > 0))
        throw Error(ErrorKind::domain, "telegraph_spectrum: need T_L > 0, T_D >= 0, gamma > 0");
    TelegraphSpectrum s;
    s.omega1 = omega1;
    s.delta1 = delta1;
    s.gamma = gamma;
    s.T_L = T_L;
    s.T_D = T_D;
    const double w = omega1 * omega1;
    const double weight = 2 * (delta1 * delta1 + gamma * gamma) / (w + 2 * (delta1 * delta1 + gamma * gamma));
    const double sum = T_L + T_D;
    s.coherent_weight = T_L / sum * weight;
    if (T_D == 0) {
        s.Gamma_p = std::numeric_limits<double>::infinity();
        s.A_p = 0;
        return s;
    }
    s.Gamma_p = 1.0 / T_D + 1.0 / T_L;
    s.A_p = weight * T_D * T_D * T_L / (sum * sum);
    return s;
}

LorentzianFit fit_lorentzian(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& sigma) {
    if (x.size() != y.size() || x.size() < 5)
        throw Error(ErrorKind::domain, "fit_lorentzian: need >= 5 matching points");
    if (!sigma.empty() && sigma.size() != x.size())
        throw Error(ErrorKind::domain, "fit_lorentzian: sigma size mismatch");
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());
    Eigen::VectorXd yv(n), wv = Eigen::VectorXd::Ones(n);
    double xmax = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!sigma.empty()) {
            if (!(sigma[i] > 0)) throw Error(ErrorKind::domain, "fit_lorentzian: sigma must be > 0");
            wv(i) = 1.0 / sigma[i];
        }
        yv(i) = y[i] * wv(i);
        xmax = std::max(xmax, std::abs(x[i]));
    }
    auto solve = [&](double g, LorentzianFit& f) {
        Eigen::MatrixXd a(n, 3);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double u = x[i] / g;
            a(i, 0) = wv(i) / (1.0 + u * u);
            a(i, 1) = wv(i);
            a(i, 2) = wv(i) * x[i] * x[i];
        }
        const Eigen::Vector3d c = a.colPivHouseholderQr().solve(yv);
        f.gamma = g;
        f.amplitude = c(0);
        f.b0 = c(1);
        f.b2 = c(2);
        f.rms = std::sqrt((a * c - yv).squaredNorm() / static_cast<double>(n));
        return f.rms;
    };
    const double lo = std::log(1e-3 * xmax), hi = std::log(2 * xmax);
    const int grid = 400;
    LorentzianFit best, f;
    double best_rms = std::numeric_limits<double>::infinity();
    int best_k = 0;
    for (int k = 0; k <= grid; ++k) {
        const double r = solve(std::exp(lo + (hi - lo) * k / grid), f);
        if (r < best_rms) {
            best_rms = r;
            best = f;
            best_k = k;
        }
    }
    // golden section on the bracketing cells
    double a = lo + (hi - lo) * std::max(0, best_k - 1) / grid;
    double b = lo + (hi - lo) * std::min(grid, best_k + 1) / grid;
    const double phi = 0.5 * (std::sqrt(5.0) - 1);
    for (int it = 0; it < 60; ++it) {
        const double c1 = b - phi * (b - a), c2 = a + phi * (b - a);
        LorentzianFit f1, f2;
        if (solve(std::exp(c1), f1) < solve(std::exp(c2), f2)) b = c2;
        else a = c1;
    }
    solve(std::exp(0.5 * (a + b)), f);
    if (f.rms <= best.rms) best = f;
    return best;
}

}  // namespace qtraj
