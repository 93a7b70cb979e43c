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

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace qtraj {

using cplx = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using DensityMatrix = Eigen::MatrixXcd;

inline constexpr cplx I{0.0, 1.0};

/// Error categories. The CLI maps them onto exit codes.
enum class ErrorKind {
    dimension,  ///< mismatched or oversized Hilbert spaces
    domain,     ///< invalid argument (zero norm, empty channel, ...)
    numerical,  ///< a numerical guard tripped (step too large, drift)
    config,     ///< configuration/schema problem
    validity,   ///< physical validity conditions violated
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

/// Process-wide default for the largest Hilbert-space dimension a tensor
/// product may produce. Thread safe.
int default_dimension_cap();
void set_default_dimension_cap(int cap);

/// <psi|A|psi>. Throws on dimension mismatch.
cplx expectation(const Operator& op, const StateVector& psi);

/// Kronecker product a (x) b. Throws when the result exceeds `cap`.
Operator tensor_product(const Operator& a, const Operator& b, int cap = default_dimension_cap());
/// Kronecker product of two state vectors.
StateVector tensor_state(const StateVector& a, const StateVector& b);

/// Returns (psi / |psi|, |psi|). Throws on a zero vector.
std::pair<StateVector, double> normalize(const StateVector& psi);

Operator identity(int dim);
/// |i><j| in a space of dimension `dim`.
Operator transition(int dim, int i, int j);
/// Truncated annihilation operator.
Operator destroy(int dim);
Operator number_op(int dim);
StateVector basis(int dim, int k);
/// Fock expansion of |alpha>, truncated to `dim` levels and renormalized.
StateVector coherent_state(cplx alpha, int dim);
/// Smallest dimension for which a coherent state of amplitude |alpha| is
/// considered well represented: |alpha|^2 + 6|alpha|, at least 2.
int coherent_dimension(double abs_alpha);

DensityMatrix projector(const StateVector& psi);
bool is_hermitian(const Operator& a, double tol = 1e-12);
/// |<a|b>|^2 / (|a|^2 |b|^2).
double fidelity(const StateVector& a, const StateVector& b);
bool all_finite(const Operator& a);

/// exp(-i heff t) for a possibly non-Hermitian generator. The scalar part
/// Im(tr heff)/dim is factored out so that large uniform decay rates do not
/// cost accuracy in the scaling-and-squaring step.
Operator propagator(const Operator& heff, double t);

/**
 * exp(-i heff s) for arbitrary s from one eigendecomposition, falling back
 * to the matrix exponential when the eigenvector basis is ill conditioned.
 */
class EffectivePropagator {
public:
    explicit EffectivePropagator(const Operator& heff);
    Operator matrix(double s) const;
    StateVector apply(double s, const StateVector& psi) const;
    bool diagonalized() const { return diag_; }
    const Eigen::VectorXcd& eigenvalues() const { return lambda_; }
    const Operator& eigenvectors() const { return v_; }
    const Operator& inverse_eigenvectors() const { return vinv_; }

private:
    Operator heff_;
    bool diag_ = false;
    Eigen::VectorXcd lambda_;
    Operator v_, vinv_;
};

}  // namespace qtraj
