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

#include "qtraj/core.hpp"

#include <atomic>
#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace qtraj {

namespace {
std::atomic<int> g_dimension_cap{64};
}

int default_dimension_cap() { return g_dimension_cap.load(); }

void set_default_dimension_cap(int cap) {
    if (cap < 1) throw Error(ErrorKind::domain, "dimension cap must be positive");
    g_dimension_cap.store(cap);
}

cplx expectation(const Operator& op, const StateVector& psi) {
    if (op.rows() != op.cols() || op.cols() != psi.size())
        throw Error(ErrorKind::dimension, "expectation: dimension mismatch");
    return psi.dot(op * psi);
}

Operator tensor_product(const Operator& a, const Operator& b, int cap) {
    if (a.rows() != a.cols() || b.rows() != b.cols())
        throw Error(ErrorKind::dimension, "tensor_product: operands must be square");
    const long dim = a.rows() * b.rows();
    if (dim > cap)
        throw Error(ErrorKind::dimension, "tensor_product: dimension " + std::to_string(dim) +
                                              " exceeds cap " + std::to_string(cap));
    return Eigen::kroneckerProduct(a, b).eval();
}

StateVector tensor_state(const StateVector& a, const StateVector& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

std::pair<StateVector, double> normalize(const StateVector& psi) {
    const double n = psi.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw Error(ErrorKind::domain, "normalize: zero or non-finite norm");
    return {psi / n, n};
}

Operator identity(int dim) { return Operator::Identity(dim, dim); }

Operator transition(int dim, int i, int j) {
    if (i < 0 || j < 0 || i >= dim || j >= dim)
        throw Error(ErrorKind::dimension, "transition: level index out of range");
    Operator op = Operator::Zero(dim, dim);
    op(i, j) = 1.0;
    return op;
}

Operator destroy(int dim) {
    Operator a = Operator::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

Operator number_op(int dim) {
    Operator n = Operator::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

StateVector basis(int dim, int k) {
    if (k < 0 || k >= dim) throw Error(ErrorKind::dimension, "basis: level index out of range");
    StateVector v = StateVector::Zero(dim);
    v(k) = 1.0;
    return v;
}

StateVector coherent_state(cplx alpha, int dim) {
    StateVector v(dim);
    // Amplitudes alpha^n / sqrt(n!) built recursively; the e^{-|alpha|^2/2}
    // prefactor is restored by the final normalization.
    cplx c = 1.0;
    for (int n = 0; n < dim; ++n) {
        if (n > 0) c *= alpha / std::sqrt(static_cast<double>(n));
        v(n) = c;
    }
    return normalize(v).first;
}

int coherent_dimension(double abs_alpha) {
    return std::max(2, static_cast<int>(std::ceil(abs_alpha * abs_alpha + 6.0 * abs_alpha)));
}

DensityMatrix projector(const StateVector& psi) { return psi * psi.adjoint(); }

bool is_hermitian(const Operator& a, double tol) {
    if (a.rows() != a.cols()) return false;
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double fidelity(const StateVector& a, const StateVector& b) {
    return std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm());
}

bool all_finite(const Operator& a) { return a.allFinite(); }

Operator propagator(const Operator& heff, double t) {
    const long dim = heff.rows();
    const double z = heff.trace().imag() / static_cast<double>(dim);
    Operator shifted = heff;
    shifted.diagonal().array() -= cplx(0.0, z);
    Operator gen = (-I * t) * shifted;
    Operator u = gen.exp();
    return u * std::exp(z * t);
}

EffectivePropagator::EffectivePropagator(const Operator& heff) : heff_(heff) {
    Eigen::ComplexEigenSolver<Operator> es(heff);
    if (es.info() == Eigen::Success) {
        v_ = es.eigenvectors();
        Eigen::PartialPivLU<Operator> lu(v_);
        vinv_ = lu.inverse();
        lambda_ = es.eigenvalues();
        const double cond = v_.cwiseAbs().rowwise().sum().maxCoeff() *
                            vinv_.cwiseAbs().rowwise().sum().maxCoeff();
        diag_ = std::isfinite(cond) && cond < 1e6;
    }
}

Operator EffectivePropagator::matrix(double s) const {
    if (!diag_) return propagator(heff_, s);
    Eigen::VectorXcd d = (-I * s * lambda_.array()).exp().matrix();
    return v_ * d.asDiagonal() * vinv_;
}

StateVector EffectivePropagator::apply(double s, const StateVector& psi) const {
    if (!diag_) return propagator(heff_, s) * psi;
    Eigen::VectorXcd c = vinv_ * psi;
    c.array() *= (-I * s * lambda_.array()).exp();
    return v_ * c;
}

}  // namespace qtraj
