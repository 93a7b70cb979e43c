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
#include <functional>
#include <limits>
#include <vector>

#include "qtraj/lindblad.hpp"
#include "qtraj/models.hpp"
#include "qtraj/parallel.hpp"
#include "qtraj/photon_stats.hpp"

namespace qtraj {

/// Conditional no-detection state and its spectral accumulator.
struct AuxiliaryPair {
    StateVector phi;
    StateVector beta;
    double omega = 0;
};

/// Deterministic step of the pair between detections:
/// d phi = -i H_eff phi dt, d beta = (-i H_eff - i omega) beta dt + C phi dt
/// with C the monitored channel. Exact over dt.
AuxiliaryPair aux_pair_step(const LindbladModel& model, const AuxiliaryPair& pair, double dt, int channel = 0);

/// Detection through `channel`: both vectors get C and are divided by |C phi|.
AuxiliaryPair aux_pair_jump(const LindbladModel& model, const AuxiliaryPair& pair, int channel);

enum class Normalization { raw, unit_area, peak_one };

struct SpectrumCurve {
    std::vector<double> omega;
    std::vector<double> values;
    std::vector<double> stderr_;
    Normalization normalization = Normalization::raw;
    /// 2 pi / window
    double resolution = 0;
    /// Detections per unit accumulation time.
    double flux = 0;
};

struct SpectrumConfig {
    double burn_in = 10.0;  ///< t0
    double window = 50.0;   ///< T - t0
    double dt = 0.01;
    std::size_t trajectories = 1000;
    std::uint64_t seed = 0;
    int threads = 0;
    int channel = 0;  ///< monitored output channel
};

/// Mean over realizations of |beta(T)|^2 / |phi(T)|^2 / (T - t0).
SpectrumCurve spectrum_estimate(const LindbladModel& model, const StateVector& psi0,
                                const std::vector<double>& omega_grid, const SpectrumConfig& config);

/// Spectrometer gate. It opens on a detection and closes after `T0` without
/// one. With open_rate > 0 at least ceil(open_rate * T0) detections within
/// the last T0 are needed.
struct GateConfig {
    double T0 = std::numeric_limits<double>::infinity();
    double open_rate = 0.0;
    void validate() const;
};

struct ConditionalSpectrum {
    SpectrumCurve unconditional;
    SpectrumCurve conditional;
    double open_fraction = 0;
};

/**
 * Gated and ungated spectra from the same trajectories. While the gate is
 * closed the gated accumulator follows the no-detection evolution only (no
 * source, no rotation) and the closed time is excluded from its
 * normalization.
 */
ConditionalSpectrum conditional_spectrum(const LindbladModel& model, const StateVector& psi0, const GateConfig& gate,
                                         const std::vector<double>& omega_grid, const SpectrumConfig& config);

/// |int_{t0}^{T} <C>(s) e^{i omega s} ds|^2 / (T - t0) from the master equation:
/// the coherent part of spectrum_estimate.
std::vector<double> coherent_spectrum_part(const LindbladModel& model, const StateVector& psi0,
                                           const std::vector<double>& omega_grid, const SpectrumConfig& config);

/// Convolution with the finite-window (Fejer) kernel of length `window`.
std::vector<double> fejer_smooth(const std::function<double(double)>& f, const std::vector<double>& omega_grid,
                                 double window);

struct CorrelationConfig {
    double dt = 1e-3;
    std::size_t trajectories = 1000;
    std::uint64_t seed = 0;
    int threads = 0;
    /// Use one random stream for all four auxiliary states.
    bool shared_randomness = false;
};

struct CorrelationResult {
    std::vector<double> tau;
    std::vector<cplx> mean;
    std::vector<double> stderr_re, stderr_im;
    std::size_t perturbed = 0;  ///< realizations that needed B + eps 1
};

/// <A(t + tau) B(t)> from four auxiliary wavefunctions per realization.
CorrelationResult correlation_mcwf(const LindbladModel& model, const StateVector& psi0, const Operator& A,
                                   const Operator& B, double t, const std::vector<double>& tau_grid,
                                   const CorrelationConfig& config);

/// <A(t + tau) B(t)> by the regression theorem.
std::vector<cplx> correlation_regression(const LindbladModel& model, const DensityMatrix& rho0, const Operator& A,
                                         const Operator& B, double t, const std::vector<double>& tau_grid,
                                         double dt = 1e-3);

/**
 * S_T(omega) = (1/T) double integral of e^{i omega (t' - t'')} C(t', t'')
 * over the square [0, T]^2 with trapezoid weights. `c` is sampled on a
 * uniform grid of spacing h. Throws ErrorKind::domain when |omega|
 * exceeds the Nyquist limit pi / h.
 */
SpectrumCurve time_dependent_spectrum(const Eigen::MatrixXcd& c, double h, const std::vector<double>& omega_grid);

// ---- analytic spectra --------------------------------------------------------

/// Driven two-level atom: incoherent density and coherent weight, both
/// carrying the overall prefactor Gamma Omega^2 / (Omega^2 + 2(Delta^2 + Gamma^2)).
struct TlsSpectrum {
    double omega1, delta1, gamma;
    double incoherent(double delta) const;
    double coherent_weight() const;
};

struct VSystemSpectrum {
    double B, C, D;
    double A_p, Gamma_p;
    double coherent_weight;
    double omega1_, gamma_;
    /// Mollow part, normalized convention.
    double mollow(double delta) const;
    /// Narrow peak, normalized convention.
    double peak(double delta) const;
    double incoherent(double delta) const { return mollow(delta) + peak(delta); }
};

/// Throws ErrorKind::validity when the weak-drive conditions fail.
VSystemSpectrum vsystem_analytic_spectrum(const VSystemParams& p, double threshold = 0.1);

/// Telegraph-modulated two-level spectrum in the normalized convention.
struct TelegraphSpectrum {
    double coherent_weight;  ///< remaining delta weight
    double Gamma_p;          ///< 1/T_D + 1/T_L
    double A_p;              ///< narrow-peak amplitude
    double omega1, delta1, gamma;
    double T_L, T_D;
    double mollow(double delta) const;
    double peak(double delta) const;
    double incoherent(double delta) const { return mollow(delta) + peak(delta); }
};

TelegraphSpectrum telegraph_spectrum(double omega1, double delta1, double gamma, double T_L, double T_D);

struct LorentzianFit {
    double gamma = 0;      ///< half width
    double amplitude = 0;  ///< height above the background at 0
    double b0 = 0, b2 = 0;
    double rms = 0;  ///< weighted by 1/sigma when sigma is given
};

/// Least-squares a / (1 + (x/gamma)^2) + b0 + b2 x^2, optionally weighted
/// by 1/sigma^2.
LorentzianFit fit_lorentzian(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& sigma = {});

}  // namespace qtraj
