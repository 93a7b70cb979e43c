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

#include "qtraj/lindblad.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace qtraj {

void validate(const LindbladModel& model) {
    const long d = model.hamiltonian.rows();
    if (d < 1 || model.hamiltonian.cols() != d)
        throw Error(ErrorKind::dimension, "model: hamiltonian must be square and non-empty");
    if (!model.hamiltonian.allFinite())
        throw Error(ErrorKind::domain, "model: hamiltonian has non-finite entries");
    if (!is_hermitian(model.hamiltonian, 1e-12))
        throw Error(ErrorKind::domain, "model: hamiltonian is not Hermitian");
    for (const auto& c : model.collapse_ops) {
        if (c.rows() != d || c.cols() != d)
            throw Error(ErrorKind::dimension, "model: collapse operator dimension mismatch");
        if (!c.allFinite()) throw Error(ErrorKind::domain, "model: collapse operator not finite");
    }
    if (model.labels.size() != model.collapse_ops.size())
        throw Error(ErrorKind::domain, "model: one label per channel required");
}

LindbladModel make_model(Operator hamiltonian, std::vector<Operator> collapse_ops,
                         std::vector<std::string> labels) {
    LindbladModel m;
    // Remove rounding-level anti-Hermitian residue from assembled sums.
    m.hamiltonian = 0.5 * (hamiltonian + hamiltonian.adjoint().eval());
    if ((hamiltonian - m.hamiltonian).cwiseAbs().maxCoeff() > 1e-12)
        throw Error(ErrorKind::domain, "model: hamiltonian is not Hermitian");
    m.collapse_ops = std::move(collapse_ops);
    if (labels.empty())
        for (std::size_t k = 0; k < m.collapse_ops.size(); ++k)
            labels.push_back("C" + std::to_string(k));
    m.labels = std::move(labels);
    validate(m);
    return m;
}

Operator effective_hamiltonian(const LindbladModel& model) {
    Operator h = model.hamiltonian;
    for (const auto& c : model.collapse_ops) h -= (0.5 * I) * (c.adjoint() * c);
    return h;
}

DensityMatrix liouvillian_apply(const LindbladModel& model, const DensityMatrix& rho) {
    if (rho.rows() != model.dim() || rho.cols() != model.dim())
        throw Error(ErrorKind::dimension, "liouvillian_apply: dimension mismatch");
    const Operator heff = effective_hamiltonian(model);
    DensityMatrix out = -I * (heff * rho - rho * heff.adjoint());
    for (const auto& c : model.collapse_ops) out += c * rho * c.adjoint();
    return out;
}

Eigen::MatrixXcd liouvillian_superoperator(const LindbladModel& model) {
    const int d = model.dim();
    const Operator id = identity(d);
    const Operator heff = effective_hamiltonian(model);
    // vec(A X B) = (B^T (x) A) vec(X)
    Eigen::MatrixXcd l = Eigen::kroneckerProduct(id, (-I * heff).eval()).eval();
    l += Eigen::kroneckerProduct((I * heff.conjugate()).eval(), id).eval();
    for (const auto& c : model.collapse_ops)
        l += Eigen::kroneckerProduct(c.conjugate().eval(), c).eval();
    return l;
}

Eigen::VectorXcd vec(const DensityMatrix& rho) {
    return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
}

DensityMatrix unvec(const Eigen::VectorXcd& v, int dim) {
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), dim, dim);
}

std::vector<double> uniform_grid(double t_max, int intervals) {
    std::vector<double> g(intervals + 1);
    for (int k = 0; k <= intervals; ++k) g[k] = t_max * k / intervals;
    return g;
}

std::vector<DensityMatrix> rk4_evolve(const Generator& gen, const DensityMatrix& rho0,
                                      const std::vector<double>& t_grid, const RK4Options& opt) {
    if (t_grid.empty()) return {};
    if (!(opt.dt > 0)) throw Error(ErrorKind::domain, "rk4: dt must be positive");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (!(t_grid[k] > t_grid[k - 1]))
            throw Error(ErrorKind::domain, "rk4: time grid must increase strictly");

    const long d = rho0.rows();
    std::vector<DensityMatrix> out;
    out.reserve(t_grid.size());
    DensityMatrix rho = rho0;
    const cplx tr0 = rho0.trace();
    out.push_back(rho);
    DensityMatrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d);
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double span = t_grid[k] - t_grid[k - 1];
        const long n = std::max(1L, static_cast<long>(std::ceil(span / opt.dt - 1e-9)));
        const double h = span / n;
        for (long s = 0; s < n; ++s) {
            gen(rho, k1);
            tmp = rho + (0.5 * h) * k1;
            gen(tmp, k2);
            tmp = rho + (0.5 * h) * k2;
            gen(tmp, k3);
            tmp = rho + h * k3;
            gen(tmp, k4);
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (opt.symmetrize) {
                tmp = 0.5 * (rho + rho.adjoint());
                rho = tmp;
            }
        }
        if (!rho.allFinite()) throw Error(ErrorKind::numerical, "rk4: non-finite state");
        if (opt.trace_tolerance >= 0 && std::abs(rho.trace() - tr0) > opt.trace_tolerance)
            throw Error(ErrorKind::numerical, "rk4: trace drift exceeds tolerance; reduce dt");
        out.push_back(rho);
    }
    return out;
}

std::vector<DensityMatrix> master_evolve(const LindbladModel& model, const DensityMatrix& rho0,
                                         const std::vector<double>& t_grid, double dt) {
    if (rho0.rows() != model.dim() || rho0.cols() != model.dim())
        throw Error(ErrorKind::dimension, "master_evolve: dimension mismatch");
    if (t_grid.empty() || t_grid.front() != 0.0)
        throw Error(ErrorKind::domain, "master_evolve: time grid must start at 0");
    const Operator heff = effective_hamiltonian(model);
    const Operator heff_dag = heff.adjoint();
    std::vector<Operator> cs = model.collapse_ops;
    std::vector<Operator> cds;
    for (const auto& c : cs) cds.push_back(c.adjoint());
    const long d = model.dim();
    Generator gen = [heff, heff_dag, cs, cds, d](const DensityMatrix& rho, DensityMatrix& out) {
        out.noalias() = (-I) * (heff * rho);
        out.noalias() += I * (rho * heff_dag);
        DensityMatrix t(d, d);
        for (std::size_t k = 0; k < cs.size(); ++k) {
            t.noalias() = cs[k] * rho;
            out.noalias() += t * cds[k];
        }
    };
    RK4Options opt;
    opt.dt = dt;
    return rk4_evolve(gen, rho0, t_grid, opt);
}

DensityMatrix steady_state(const LindbladModel& model, const DensityMatrix& rho0,
                           const SteadyStateOptions& opt) {
    DensityMatrix rho = rho0;
    double t = 0;
    while (t < opt.t_max) {
        rho = master_evolve(model, rho, {0.0, opt.chunk}, opt.dt).back();
        t += opt.chunk;
        if (liouvillian_apply(model, rho).cwiseAbs().maxCoeff() < opt.tolerance) return rho;
    }
    throw Error(ErrorKind::numerical, "steady_state: no convergence before t_max");
}

double min_eigenvalue(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()),
                                                       Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double expect_rho(const Operator& op, const DensityMatrix& rho) {
    return (op * rho).trace().real();
}

}  // namespace qtraj
