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

#include <functional>
#include <string>
#include <vector>

#include "qtraj/core.hpp"

namespace qtraj {

/**
 * Hamiltonian plus collapse operators.
 *
 * Dissipators use D[C]rho = C rho C^dag - 1/2 {C^dag C, rho}, with rates
 * folded into C. A model with C = sqrt(2) L reproduces a master equation
 * written as 2 L rho L^dag - L^dag L rho - rho L^dag L.
 */
struct LindbladModel {
    Operator hamiltonian;
    std::vector<Operator> collapse_ops;
    std::vector<std::string> labels;

    int dim() const { return static_cast<int>(hamiltonian.rows()); }
    int channels() const { return static_cast<int>(collapse_ops.size()); }
};

/// Checks hermiticity of H, dimensions, finiteness. Fills missing labels.
LindbladModel make_model(Operator hamiltonian, std::vector<Operator> collapse_ops,
                         std::vector<std::string> labels = {});
void validate(const LindbladModel& model);

/// H - (i/2) sum C^dag C.
Operator effective_hamiltonian(const LindbladModel& model);

/// -i[H, rho] + sum D[C]rho.
DensityMatrix liouvillian_apply(const LindbladModel& model, const DensityMatrix& rho);

/// Liouvillian as a dim^2 x dim^2 matrix acting on column-stacked rho.
Eigen::MatrixXcd liouvillian_superoperator(const LindbladModel& model);
DensityMatrix unvec(const Eigen::VectorXcd& v, int dim);
Eigen::VectorXcd vec(const DensityMatrix& rho);

using Generator = std::function<void(const DensityMatrix& rho, DensityMatrix& out)>;

struct RK4Options {
    double dt = 1e-3;
    /// Maximum allowed |tr rho(t) - tr rho(0)|; negative disables the check.
    double trace_tolerance = 1e-8;
    bool symmetrize = true;
};

/// Fixed-step RK4 for a general linear generator. Steps land exactly on the
/// grid points; the step inside each interval is the largest <= dt that
/// divides it evenly.
std::vector<DensityMatrix> rk4_evolve(const Generator& gen, const DensityMatrix& rho0,
                                      const std::vector<double>& t_grid, const RK4Options& opt);

/// Master-equation oracle. t_grid must start at 0 and increase strictly.
std::vector<DensityMatrix> master_evolve(const LindbladModel& model, const DensityMatrix& rho0,
                                         const std::vector<double>& t_grid, double dt = 1e-3);

struct SteadyStateOptions {
    double dt = 1e-2;
    double chunk = 10.0;
    double tolerance = 1e-12;
    double t_max = 1e5;
};

/// Steady state by integrating until the Liouvillian residual (max entry)
/// falls below the tolerance.
DensityMatrix steady_state(const LindbladModel& model, const DensityMatrix& rho0,
                           const SteadyStateOptions& opt = {});

double min_eigenvalue(const DensityMatrix& rho);
/// Observable trace tr(A rho), real part.
double expect_rho(const Operator& op, const DensityMatrix& rho);

/// Uniform grid 0, h, ..., n h.
std::vector<double> uniform_grid(double t_max, int intervals);

}  // namespace qtraj
