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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qtraj/lindblad.hpp"
#include "qtraj/parallel.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

enum class QsdVariant { normalized, linear };

struct QsdConfig {
    double dt = 1e-3;
    std::uint64_t seed = 0;
    QsdVariant variant = QsdVariant::normalized;
};

/// Complex increments with independent real and imaginary parts of
/// variance dt each.
std::vector<cplx> wiener_sample(double dt, Rng& rng, int channels);

/// Precomputed L_m = C_m / sqrt(2) and L_m^dag L_m for repeated steps.
class QsdStepper {
public:
    explicit QsdStepper(const LindbladModel& model);

    /// One Euler-Maruyama step. The normalized variant renormalizes; the
    /// linear variant leaves the norm free and throws ErrorKind::numerical
    /// when it falls below 1e-12.
    void step(StateVector& psi, double dt, const std::vector<cplx>& dxi, QsdVariant variant) const;

    /// Drift (per unit time) and per-channel noise vectors of the
    /// normalized equation at a normalized state.
    void drift_and_noise(const StateVector& psi, StateVector& drift, std::vector<StateVector>& noise) const;

    int channels() const { return static_cast<int>(l_.size()); }

private:
    Operator h_;
    std::vector<Operator> l_, ldl_;
};

StateVector qsd_step(const LindbladModel& model, const StateVector& psi, double dt,
                     const std::vector<cplx>& dxi, QsdVariant variant = QsdVariant::normalized);

/// Ensemble of QSD paths; observables are evaluated on the normalized state.
EnsembleResult qsd_ensemble(const LindbladModel& model, const StateVector& psi0,
                            const std::vector<double>& t_grid, std::size_t n, const QsdConfig& config,
                            const std::vector<Operator>& observables,
                            const std::vector<std::string>& names = {}, int threads = 0);

/**
 * Homodyne unraveling of channel `channel`: C' = C + lambda 1 with
 * lambda = alpha |C|_F, and H' = H - (i/2)(lambda^* C - lambda C^dag). The
 * ensemble dynamics are unchanged. alpha = 0 returns the model unchanged.
 */
LindbladModel homodyne_model(const LindbladModel& model, cplx alpha, int channel = 0);

/// Jump probability per step for a two-level atom under homodyne detection,
/// written with the bare lowering operator s01 of the atom.
double homodyne_jump_probability(const StateVector& psi, double gamma, cplx alpha, double dt);

struct HeterodyneOps {
    Operator Jc, Jd;
};

/// Balanced heterodyne jump operators at time t for a cavity truncated at `dim`.
HeterodyneOps heterodyne_jump_ops(double gamma_cav, double gamma_loc, double beta, double omega,
                                  double t, int dim);

struct HeterodyneRates {
    double c = 0, d = 0;           ///< <J^dag J> evaluated directly
    double c_linear = 0, d_linear = 0;  ///< linearized form without the <a^dag a> term
    double quadrature = 0;         ///< <a^dag e^{i phi} + a e^{-i phi}> at phi = -omega t
    /// The linearized rates are nonnegative for every state.
    bool linear_nonnegative = false;
};

HeterodyneRates heterodyne_rates(double gamma_cav, double gamma_loc, double beta, double omega,
                                 double t, const StateVector& psi);

/// Effective Hamiltonian of the heterodyne scheme, -(i/2)(gamma_cav a^dag a + gamma_loc beta^2).
Operator heterodyne_effective_hamiltonian(double gamma_cav, double gamma_loc, double beta, int dim);

struct LadderPoint {
    double alpha;
    double mean_jumps;     ///< per trajectory
    double mean_step;      ///< mean per-jump |delta psi| up to global phase
    std::vector<double> mean_inversion;  ///< ensemble <s11 - s00> on the sample grid
    std::vector<double> stderr_inversion;
};

/// Homodyne ladder on the driven two-level atom with `n` first-order
/// trajectories per alpha.
std::vector<LadderPoint> homodyne_ladder(double omega, double delta, double gamma,
                                         const std::vector<double>& alphas, const std::vector<double>& t_grid,
                                         double dt, std::size_t n, std::uint64_t seed, int threads = 0);

struct HeterodyneDemoConfig {
    double gamma_cav = 1.0;
    double gamma_loc = 1.0;
    double omega = 200.0;
    std::vector<double> betas{1.0, 3.0, 10.0, 50.0};
    int dim = 6;
    double window = 0.05;
    double dt = 4e-6;
    std::size_t samples = 1000;
    std::uint64_t seed = 7;
    int threads = 0;
};

struct HeterodyneLadderPoint {
    double beta;
    double jump_rate;  ///< counts per unit time, both detectors
    double mean_step;  ///< mean per-jump |delta psi| up to global phase
};

struct HeterodyneDemoReport {
    std::vector<HeterodyneLadderPoint> ladder;
    /// Two-sample test of the change of <a + a^dag> over one window,
    /// heterodyne at the largest beta against normalized QSD.
    double ks_statistic = 0;
    double ks_p_value = 0;
};

/// Heterodyne jump simulation of a decaying cavity from (|0> + |1>)/sqrt(2)
/// compared with QSD on the same model.
HeterodyneDemoReport qsd_from_heterodyne_demo(const HeterodyneDemoConfig& config);

}  // namespace qtraj
