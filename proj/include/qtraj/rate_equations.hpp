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
#include <vector>

namespace qtraj {

/// Einstein coefficients of the incoherently driven V-system. Level 1 is
/// the strong transition, level 2 the shelf.
struct EinsteinParams {
    double A1 = 0, A2 = 0;
    double B1W1 = 0, B2W2 = 0;

    void validate() const;
    /// B1W1, A1 >= ratio * B2W2 and B2W2 >= ratio * A2.
    bool shelving(double ratio = 10.0) const;
    /// B1W1 / A1 >= ratio and the saturated approximation of rho11(inf)
    /// within `tolerance` of the exact value.
    bool saturated(double ratio = 10.0, double tolerance = 0.05) const;
};

struct Populations {
    double p0 = 1, p1 = 0, p2 = 0;
    double sum() const { return p0 + p1 + p2; }
};

std::vector<Populations> rate_integrate(const EinsteinParams& p, const Populations& start,
                                        const std::vector<double>& t_grid, double dt = 1e-2);

/// Closed-form steady state. Throws ErrorKind::domain if all rates vanish.
Populations rate_steady_state(const EinsteinParams& p);

/// Strong-driving transient from the ground state.
Populations rate_transient_saturated(const EinsteinParams& p, double t);

struct RateG2 {
    std::vector<double> g11;
    std::vector<double> g22;
    /// Simplified form; empty unless B1W1 >> B2W2 and the transition is saturated.
    std::vector<double> g11_simplified;
    bool regime_ok = false;
    std::string warning;
};

RateG2 g2_rate_saturated(const EinsteinParams& p, const std::vector<double>& tau_grid);

/// g2 of the strong-transition fluorescence by regression:
/// rho11(tau | ground) / rho11(inf).
std::vector<double> g2_rate_regression(const EinsteinParams& p, const std::vector<double>& tau_grid,
                                       double dt = 1e-2);

struct TelegraphEstimates {
    double T_B;
    double T_D;
    /// T_D / T_B, which equals the relative hump of rho11.
    double hump_ratio;
};

/**
 * Mean bright and dark periods from null measurements. The shelf gradient
 * for the bright period uses the quasi-steady ground population of the
 * strong transition.
 */
TelegraphEstimates telegraph_estimates(const EinsteinParams& p);

/// Relative hump (max rho11 - rho11(inf)) / rho11(inf) of a transient curve.
double hump_from_curve(const std::vector<Populations>& curve, double rho11_inf);

/// t_d ln(T_B / t_d). Throws ErrorKind::domain if T_B <= t_d.
double collapse_time(double T_B, double t_d);

/**
 * Q_M(tau_k) = (2<I>/tau_k) int_0^tau_k dt2 int_0^t2 dt1 (g2(t1) - 1) on a
 * uniform grid of spacing h starting at 0. Q_M(0) = 0.
 */
std::vector<double> mandel_q(const std::vector<double>& g2, double h, double mean_intensity);

/// 2 <I> int_0^inf (g2 - 1), the large-window limit of mandel_q.
double mandel_q_infinity(const std::vector<double>& g2, double h, double mean_intensity);

enum class CountingMode { poisson_zero_excess, two_state };

/**
 * Counting model. poisson_zero_excess uses the mean gamma1 * eta * T / 2;
 * two_state uses H * I0 * T. In both the zero bin carries the extra weight
 * `zero_excess`.
 */
struct CountingModel {
    CountingMode mode = CountingMode::two_state;
    double gamma1 = 1, eta = 1;
    double H = 1, I0 = 1;
    double zero_excess = 1.0 / 3.0;
    double mean(double T) const;
};

double log_counting_distribution(long long n, double T, const CountingModel& m);
double counting_distribution(long long n, double T, const CountingModel& m);

}  // namespace qtraj
