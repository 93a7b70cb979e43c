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

#include <string>
#include <utility>
#include <vector>

#include "qtraj/jump.hpp"
#include "qtraj/lindblad.hpp"
#include "qtraj/models.hpp"

namespace qtraj {

/// Survival probability P0(t) of the no-jump evolution.
struct DelayCurve {
    std::vector<double> t_grid;
    std::vector<double> p0;
};

struct DetectorConfig {
    double efficiency = 1.0;
    double threshold = 1.0;
    void validate() const;
};

struct PeriodStats {
    double T_D = 0;
    double T_L = 0;
    double tau_L = 0;
    double jump_rate = 0;
};

/// p0(t) = |exp(-i H_eff t) psi_reset|^2.
DelayCurve delay_function(const LindbladModel& model, const StateVector& psi_reset,
                          const std::vector<double>& t_grid);

/// -dP0/dt by centered differences (one-sided at the ends). Throws
/// ErrorKind::domain on a non-monotone curve.
std::vector<double> next_photon_density(const DelayCurve& curve);

struct BetaEvolution {
    std::vector<DensityMatrix> rho;
    std::vector<double> survival;  ///< tr rho
    std::vector<double> rate;      ///< beta * sum_m tr(C_m rho C_m^dag)
};

/**
 * Imperfect-detector evolution
 *   d rho/dt = -i(H_eff rho - rho H_eff^dag) + (1 - beta) sum_m C_m rho C_m^dag.
 * beta = 0 is the master equation and beta = 1 the conditional no-count
 * evolution.
 */
BetaEvolution conditional_beta_evolution(const LindbladModel& model, const DensityMatrix& rho0,
                                         double beta, const std::vector<double>& t_grid,
                                         double dt = 1e-3);

/**
 * Solves I = I1 + I1 * I on a uniform grid with the trapezoidal rule.
 * The error is estimated from a solve at twice the spacing; an estimated
 * relative error above `tolerance` throws ErrorKind::numerical.
 */
std::vector<double> any_photon_rate(const std::vector<double>& i1, const std::vector<double>& t_grid,
                                    double tolerance = 0.01);

std::vector<double> g2_from_rate(const std::vector<double>& rate, double steady_rate);

/// g2 from quantum regression: tr(C^dag C e^{L tau}[C rho_ss C^dag]) / <C^dag C>^2,
/// summed over channels.
std::vector<double> master_g2(const LindbladModel& model, const std::vector<double>& tau_grid,
                              double dt = 1e-3);

// ---- driven two-level atom, closed forms -----------------------------------

/// Survival probability from the ground state: |c0|^2 + |c1|^2 with c0 the
/// two-exponential amplitude and c1 = 2i dc0/dt / Omega.
double tls_delay_closed_form(double omega, double delta, double gamma, double t);
/// Intensity correlation on resonance.
double tls_g2_closed_form(double omega, double gamma, double tau);
/// Count rate of a detector of efficiency beta after a count at t = 0, on
/// resonance, from the partial-fraction inverse of its Laplace transform.
double tls_beta_rate_closed_form(double omega, double gamma, double beta, double t);

// ---- V-system telegraph statistics -----------------------------------------

struct ValidityResult {
    bool ok = false;
    double margin_drive = 0;  ///< weak-drive condition, LHS / RHS
    double margin_decay = 0;  ///< slow-decay condition, LHS / RHS
};

ValidityResult validity_check(const VSystemParams& p, double threshold = 0.1);

/// Analytic periods. Throws ErrorKind::validity when validity_check fails.
PeriodStats vsystem_periods(const VSystemParams& p, double threshold = 0.1);

/// Jump rate in the closed form valid for delta1 = 0.
double vsystem_jump_rate_resonant(const VSystemParams& p);

/// Periods from the no-jump spectrum of the model itself: T_D from the
/// slowest H_eff eigenvalue, the bright fraction from its tail amplitude and
/// tau_L from the mean of the fast part of the waiting time.
PeriodStats periods_from_model(const LindbladModel& model, const StateVector& psi_reset);

/// 1 + (T_D/T_L) exp(-(1/T_D + 1/T_L) tau).
double vsystem_g2_tail(const PeriodStats& s, double tau);

struct DelayPeriods {
    double T_D;       ///< T0 + int_{T0}^inf P0 / P0(T0)
    double T_L;       ///< (1/P0(T0)) int_0^{T0} t I1 / int_0^{T0} I1
    double T_D_tail;  ///< int_{T0}^inf P0 / P0(T0)
    double T_L_tail;  ///< mean bright length with the T0 bias removed
};

/// Period estimates from a delay curve. The integral beyond the grid is
/// closed with an exponential fitted to log p0 over the last tenth of the
/// grid.
DelayPeriods mean_periods_from_delay(const DelayCurve& curve, double T0);

enum class PeriodKind { bright, dark };

struct Period {
    PeriodKind kind;
    double start;
    double length;
};

std::vector<Period> classify_periods(const std::vector<JumpEvent>& jumps, double T0);
std::vector<Period> classify_periods(const TrajectoryRecord& record, double T0);

struct PeriodSummary {
    double mean_dark = 0, stderr_dark = 0;
    double mean_bright = 0, stderr_bright = 0;
    std::size_t n_dark = 0, n_bright = 0;
    /// mean_dark - T0
    double T_D = 0;
    /// mean_bright * exp(-T0 / T_D)
    double T_L = 0;
};

PeriodSummary summarize_periods(const std::vector<Period>& periods, double T0);

/**
 * Jump record of one long trajectory built by chaining waiting-time draws,
 * each starting from the post-jump state of the previous one.
 */
std::vector<JumpEvent> sample_jump_record(const LindbladModel& model, const StateVector& psi0,
                                          double t_end, Rng& rng, double lattice_dt = 0.05);

}  // namespace qtraj
