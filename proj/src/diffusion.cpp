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

#include "qtraj/diffusion.hpp"

#include <cmath>

#include "qtraj/jump.hpp"
#include "qtraj/models.hpp"
#include "qtraj/stats.hpp"

namespace qtraj {

namespace {

double phase_free_distance(const StateVector& a, const StateVector& b) {
    const double overlap = std::min(1.0, std::abs(a.dot(b)));
    return std::sqrt(std::max(0.0, 2.0 - 2.0 * overlap));
}

}  // namespace

std::vector<cplx> wiener_sample(double dt, Rng& rng, int channels) {
    if (!(dt > 0)) throw Error(ErrorKind::domain, "wiener_sample: dt must be > 0");
    const double s = std::sqrt(dt);
    std::vector<cplx> out(channels);
    for (auto& x : out) {
        const double re = rng.normal();
        const double im = rng.normal();
        x = cplx(re * s, im * s);
    }
    return out;
}

QsdStepper::QsdStepper(const LindbladModel& model) : h_(model.hamiltonian) {
    for (const auto& c : model.collapse_ops) {
        l_.push_back(c / std::sqrt(2.0));
        ldl_.push_back(l_.back().adjoint() * l_.back());
    }
}

void QsdStepper::drift_and_noise(const StateVector& psi, StateVector& drift,
                                 std::vector<StateVector>& noise) const {
    drift = -I * (h_ * psi);
    noise.resize(l_.size());
    for (std::size_t m = 0; m < l_.size(); ++m) {
        const StateVector lpsi = l_[m] * psi;
        const cplx l = psi.dot(lpsi);
        const cplx ld = std::conj(l);
        drift += -(ldl_[m] * psi) + 2.0 * ld * lpsi - ld * l * psi;
        noise[m] = lpsi - l * psi;
    }
}

void QsdStepper::step(StateVector& psi, double dt, const std::vector<cplx>& dxi, QsdVariant variant) const {
    if (static_cast<int>(dxi.size()) != channels())
        throw Error(ErrorKind::dimension, "qsd_step: one Wiener increment per channel required");
    if (variant == QsdVariant::normalized) {
        StateVector drift;
        std::vector<StateVector> noise;
        drift_and_noise(psi, drift, noise);
        psi += dt * drift;
        for (std::size_t m = 0; m < noise.size(); ++m) psi += dxi[m] * noise[m];
        const double n = psi.norm();
        if (!(n > 1e-12) || !std::isfinite(n)) throw Error(ErrorKind::numerical, "qsd_step: state norm collapsed");
        psi /= n;
        return;
    }
    const double n0 = psi.norm();
    if (!(n0 > 1e-12) || !std::isfinite(n0))
        throw Error(ErrorKind::numerical, "qsd_step: linear-variant norm collapsed below 1e-12");
    StateVector delta = -I * (h_ * psi);
    for (std::size_t m = 0; m < l_.size(); ++m) {
        const StateVector lpsi = l_[m] * psi;
        const cplx ld = std::conj(psi.dot(lpsi)) / (n0 * n0);
        delta += (2.0 * ld * lpsi - ldl_[m] * psi);
        delta += (dxi[m] / dt) * lpsi;
    }
    psi += dt * delta;
    const double n1 = psi.norm();
    if (!(n1 > 1e-12) || !std::isfinite(n1))
        throw Error(ErrorKind::numerical, "qsd_step: linear-variant norm collapsed below 1e-12");
}

StateVector qsd_step(const LindbladModel& model, const StateVector& psi, double dt,
                     const std::vector<cplx>& dxi, QsdVariant variant) {
    if (psi.size() != model.dim()) throw Error(ErrorKind::dimension, "qsd_step: state dimension mismatch");
    StateVector out = psi;
    QsdStepper(model).step(out, dt, dxi, variant);
    return out;
}

EnsembleResult qsd_ensemble(const LindbladModel& model, const StateVector& psi0,
                            const std::vector<double>& t_grid, std::size_t n, const QsdConfig& config,
                            const std::vector<Operator>& observables, const std::vector<std::string>& names,
                            int threads) {
    if (n < 1) throw Error(ErrorKind::domain, "qsd_ensemble: N must be >= 1");
    if (!(config.dt > 0)) throw Error(ErrorKind::domain, "qsd_ensemble: dt must be > 0");
    const long per = steps_per_sample(t_grid, config.dt);
    const QsdStepper stepper(model);
    std::vector<std::string> labels = names;
    for (std::size_t o = labels.size(); o < observables.size(); ++o) labels.push_back("obs" + std::to_string(o));
    const StateVector start = normalize(psi0).first;
    return run_ensemble(n, threads, t_grid, labels,
                        [&](std::size_t index, std::vector<std::vector<double>>& samples) {
                            Rng rng(config.seed, index);
                            StateVector psi = start;
                            auto record = [&](std::size_t k) {
                                const double nn = psi.squaredNorm();
                                for (std::size_t o = 0; o < observables.size(); ++o)
                                    samples[o][k] = expectation(observables[o], psi).real() / nn;
                            };
                            record(0);
                            for (std::size_t k = 1; k < t_grid.size(); ++k) {
                                for (long s = 0; s < per; ++s)
                                    stepper.step(psi, config.dt, wiener_sample(config.dt, rng, stepper.channels()),
                                                 config.variant);
                                record(k);
                            }
                            return 0.0;
                        });
}

LindbladModel homodyne_model(const LindbladModel& model, cplx alpha, int channel) {
    if (channel < 0 || channel >= model.channels())
        throw Error(ErrorKind::domain, "homodyne_model: no such channel");
    if (alpha == cplx(0.0)) return model;
    LindbladModel out = model;
    const Operator& c = model.collapse_ops[channel];
    const cplx lambda = alpha * c.norm();
    out.collapse_ops[channel] = c + lambda * identity(model.dim());
    out.hamiltonian = model.hamiltonian - 0.5 * I * (std::conj(lambda) * c - lambda * c.adjoint());
    out.hamiltonian = 0.5 * (out.hamiltonian + out.hamiltonian.adjoint()).eval();
    return out;
}

double homodyne_jump_probability(const StateVector& psi, double gamma, cplx alpha, double dt) {
    if (psi.size() != 2) throw Error(ErrorKind::dimension, "homodyne_jump_probability: two-level state required");
    const StateVector p = normalize(psi).first;
    const Operator s = transition(2, 0, 1);
    const double ll = expectation(s.adjoint() * s, p).real();
    const cplx l = expectation(s, p);
    const double cross = 2.0 * (std::conj(alpha) * l).real();
    return 2 * gamma * (ll + cross + std::norm(alpha)) * dt;
}

HeterodyneOps heterodyne_jump_ops(double gamma_cav, double gamma_loc, double beta, double omega, double t,
                                  int dim) {
    if (!(gamma_cav > 0) || !(gamma_loc > 0))
        throw Error(ErrorKind::domain, "heterodyne_jump_ops: decay rates must be > 0");
    const Operator a = destroy(dim);
    const cplx ph = std::exp(I * omega * t);
    const Operator cav = std::sqrt(gamma_cav) * ph * a;
    const Operator loc = std::sqrt(gamma_loc) * beta * identity(dim);
    return {(cav + loc) / std::sqrt(2.0), (loc - cav) / std::sqrt(2.0)};
}

HeterodyneRates heterodyne_rates(double gamma_cav, double gamma_loc, double beta, double omega, double t,
                                 const StateVector& psi) {
    const int dim = static_cast<int>(psi.size());
    const StateVector p = normalize(psi).first;
    const HeterodyneOps ops = heterodyne_jump_ops(gamma_cav, gamma_loc, beta, omega, t, dim);
    HeterodyneRates r;
    r.c = (ops.Jc * p).squaredNorm();
    r.d = (ops.Jd * p).squaredNorm();
    const Operator a = destroy(dim);
    const cplx ph = std::exp(-I * omega * t);
    r.quadrature = expectation(a.adjoint() * ph + a * std::conj(ph), p).real();
    const double base = 0.5 * beta * beta * gamma_loc;
    const double mix = 0.5 * beta * std::sqrt(gamma_cav * gamma_loc) * r.quadrature;
    r.c_linear = base + mix;
    r.d_linear = base - mix;
    r.linear_nonnegative = beta * beta * gamma_loc >= 4 * gamma_cav;
    return r;
}

Operator heterodyne_effective_hamiltonian(double gamma_cav, double gamma_loc, double beta, int dim) {
    return -0.5 * I * (gamma_cav * number_op(dim) + gamma_loc * beta * beta * identity(dim));
}

std::vector<LadderPoint> homodyne_ladder(double omega, double delta, double gamma,
                                         const std::vector<double>& alphas, const std::vector<double>& t_grid,
                                         double dt, std::size_t n, std::uint64_t seed, int threads) {
    const ModelSpec tls = driven_tls(omega, delta, gamma);
    const Operator inversion = tls.observables.at("sigma3");
    std::vector<LadderPoint> out;
    for (double alpha : alphas) {
        const LindbladModel model = homodyne_model(tls.model, alpha);
        const JumpStepper proto(model, dt, Order::first);
        const long per = steps_per_sample(t_grid, dt);
        std::vector<double> steps(n, 0.0), counts(n, 0.0);
        JumpConfig cfg;
        cfg.dt = dt;
        cfg.seed = seed;
        EnsembleResult ens = run_ensemble(
            n, threads, t_grid, {"sigma3"}, [&](std::size_t i, std::vector<std::vector<double>>& samples) {
                JumpStepper st(proto);
                Rng rng(seed, i);
                StateVector psi = tls.initial;
                std::vector<JumpEvent> jumps;
                double dist = 0;
                samples[0][0] = expectation(inversion, psi).real();
                for (std::size_t k = 1; k < t_grid.size(); ++k) {
                    for (long s = 0; s < per; ++s) {
                        const std::size_t before = jumps.size();
                        const StateVector prev = psi;
                        st.step(psi, t_grid[k - 1] + s * dt, rng.uniform(), jumps);
                        if (jumps.size() != before) dist += phase_free_distance(prev, psi);
                    }
                    samples[0][k] = expectation(inversion, psi).real();
                }
                counts[i] = static_cast<double>(jumps.size());
                steps[i] = dist;
                return counts[i];
            });
        double total_jumps = 0, total_dist = 0;
        for (std::size_t i = 0; i < n; ++i) {
            total_jumps += counts[i];
            total_dist += steps[i];
        }
        LadderPoint lp;
        lp.alpha = alpha;
        lp.mean_jumps = total_jumps / n;
        lp.mean_step = total_jumps > 0 ? total_dist / total_jumps : 0.0;
        lp.mean_inversion = ens.mean[0];
        lp.stderr_inversion = ens.stderr_[0];
        out.push_back(std::move(lp));
    }
    return out;
}

namespace {

struct HetRun {
    double jumps = 0;
    double dist = 0;
    double dx = 0;
};

// First-order heterodyne trajectory over one window.
HetRun heterodyne_window(const HeterodyneDemoConfig& c, double beta, const StateVector& psi0, Rng& rng) {
    const int dim = c.dim;
    const Operator a = destroy(dim);
    const Operator x = a + a.adjoint();
    const Operator u = propagator(heterodyne_effective_hamiltonian(c.gamma_cav, 0.0, beta, dim), c.dt);
    const double sc = std::sqrt(c.gamma_cav), sl = std::sqrt(c.gamma_loc) * beta;
    const long steps = std::lround(c.window / c.dt);
    StateVector psi = psi0;
    const double x0 = expectation(x, psi).real();
    HetRun out;
    StateVector apsi(dim), jc(dim), jd(dim);
    for (long s = 0; s < steps; ++s) {
        const double t = s * c.dt;
        apsi.noalias() = a * psi;
        const cplx ph = std::exp(I * c.omega * t);
        jc = (sc * ph * apsi + sl * psi) / std::sqrt(2.0);
        jd = (sl * psi - sc * ph * apsi) / std::sqrt(2.0);
        const double pc = jc.squaredNorm() * c.dt, pd = jd.squaredNorm() * c.dt;
        if (pc + pd > 0.5) throw Error(ErrorKind::numerical, "heterodyne demo: dt too large for the jump rate");
        const double r = rng.uniform();
        if (r < pc + pd) {
            const StateVector prev = psi;
            psi = r < pc ? jc : jd;
            psi /= psi.norm();
            out.jumps += 1;
            out.dist += phase_free_distance(prev, psi);
        } else {
            psi = u * psi;
            psi /= psi.norm();
        }
    }
    out.dx = expectation(x, psi).real() - x0;
    return out;
}

}  // namespace

HeterodyneDemoReport qsd_from_heterodyne_demo(const HeterodyneDemoConfig& c) {
    if (c.betas.empty()) throw Error(ErrorKind::domain, "heterodyne demo: empty beta ladder");
    const StateVector psi0 = fock_superposition(c.dim, {0, 1});
    HeterodyneDemoReport rep;
    std::vector<double> het_dx;
    for (std::size_t b = 0; b < c.betas.size(); ++b) {
        const double beta = c.betas[b];
        std::vector<HetRun> runs(c.samples);
        parallel_for(c.samples, c.threads, [&](std::size_t i) {
            Rng rng(c.seed, b * c.samples + i);
            runs[i] = heterodyne_window(c, beta, psi0, rng);
        });
        double jumps = 0, dist = 0;
        for (const auto& r : runs) {
            jumps += r.jumps;
            dist += r.dist;
        }
        rep.ladder.push_back({beta, jumps / (c.samples * c.window), jumps > 0 ? dist / jumps : 0.0});
        if (b + 1 == c.betas.size())
            for (const auto& r : runs) het_dx.push_back(r.dx);
    }

    const LindbladModel cavity = make_model(Operator::Zero(c.dim, c.dim), {std::sqrt(c.gamma_cav) * destroy(c.dim)});
    const QsdStepper stepper(cavity);
    const Operator a = destroy(c.dim);
    const Operator x = a + a.adjoint();
    const double qdt = 1e-4;
    const long steps = std::lround(c.window / qdt);
    std::vector<double> qsd_dx(c.samples);
    parallel_for(c.samples, c.threads, [&](std::size_t i) {
        Rng rng(c.seed + 1, i);
        StateVector psi = psi0;
        const double x0 = expectation(x, psi).real();
        for (long s = 0; s < steps; ++s) stepper.step(psi, qdt, wiener_sample(qdt, rng, 1), QsdVariant::normalized);
        qsd_dx[i] = expectation(x, psi).real() - x0;
    });
    const KsResult ks = ks_test_2(het_dx, qsd_dx);
    rep.ks_statistic = ks.statistic;
    rep.ks_p_value = ks.p_value;
    return rep;
}

}  // namespace qtraj
