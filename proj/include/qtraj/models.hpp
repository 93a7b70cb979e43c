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

#include <map>
#include <string>
#include <vector>

#include "qtraj/lindblad.hpp"

namespace qtraj {

/// A built preset: model, default initial state and named observables.
struct ModelSpec {
    std::string name;
    std::map<std::string, double> parameters;
    LindbladModel model;
    StateVector initial;
    std::map<std::string, Operator> observables;
    /// One line per channel describing the post-jump state.
    std::vector<std::string> reset_notes;
};

/**
 * Laser-driven two-level system, levels |0> (ground) and |1> (excited).
 *
 * H = -delta |1><1| + (omega/2)(|0><1| + |1><0|). 2*gamma is the Einstein
 * coefficient, so the single channel is C = sqrt(2 gamma) |0><1| and
 * H_eff = H - i gamma |1><1|.
 */
ModelSpec driven_tls(double omega, double delta, double gamma);

/// Rabi frequencies, detunings and half Einstein coefficients of a V-system
/// with ground state |0>, strong transition 0-1 and weak transition 0-2.
struct VSystemParams {
    double omega1 = 2.0;
    double omega2 = 0.2;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double gamma11 = 1.0;
    double gamma22 = 0.0;
    void validate() const;
};

/**
 * V-system. H = -delta1 s11 - delta2 s22 + (omega1/2)(s01+s10)
 * + (omega2/2)(s02+s20); channels sqrt(2 gamma11) s01 and sqrt(2 gamma22) s02.
 * The weak channel is kept (as a zero operator) when gamma22 = 0 so channel
 * indices do not depend on parameters.
 */
ModelSpec v_system(const VSystemParams& p);

/// Fock superposition with equal weights on the given levels.
StateVector fock_superposition(int dim, const std::vector<int>& levels);

/// Cavity mode in the interaction picture: H = 0, C = sqrt(gamma) a.
ModelSpec decaying_cavity(double gamma, int dim, const StateVector& psi0);

/// (|alpha> + sign |-alpha>) normalized, truncated to dim.
StateVector cat_state(cplx alpha, int dim, int sign = +1);

/// Cat-state preset on a decaying cavity and its two-component checker.
struct CatScenario {
    ModelSpec spec;
    cplx alpha;
    double gamma;
    int dim;
    /// Expected conditional state after `jumps` detections at time t:
    /// amplitude alpha e^{-gamma t/2}, relative sign (-1)^jumps.
    StateVector expected(double t, int jumps) const;
    double fidelity(const StateVector& psi, double t, int jumps) const;
};
CatScenario cat_state_scenario(cplx alpha, int dim, double gamma);

/**
 * Atom (2 levels) coupled to a cavity mode, atom factor first.
 * H = -delta s11 + g (s10 a + s01 a^dag); cavity field decays at rate
 * 2 gamma_cav through C = sqrt(2 gamma_cav) a. The atom starts excited and
 * the field in |alpha>. Observable "inversion" is (s11 - s00)/2.
 */
ModelSpec jaynes_cummings(double g, double gamma_cav, double delta, int dim, cplx alpha);

/**
 * Two cavities A -> B coupled one way through a shared output.
 * C = sqrt(2 kA) a + sqrt(2 kB) b and
 * H = H_A + H_B + i sqrt(kA kB)(a^dag b - a b^dag), which gives
 * H_eff = H_A + H_B - i[kA a^dag a + kB b^dag b + 2 sqrt(kA kB) a b^dag].
 */
ModelSpec cascaded_cavities(double kappa_a, double kappa_b, const Operator& h_a,
                            const Operator& h_b);

/// Names accepted by build_preset.
std::vector<std::string> preset_names();
/// Parameter names and defaults for a preset.
std::map<std::string, double> preset_defaults(const std::string& name);
/// Builds a preset from a parameter map; unknown parameters are rejected.
ModelSpec build_preset(const std::string& name, const std::map<std::string, double>& params);
/// One-line description for `presets list`.
std::string preset_description(const std::string& name);

}  // namespace qtraj
