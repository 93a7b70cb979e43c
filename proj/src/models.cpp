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

#include "qtraj/models.hpp"

#include <cmath>

namespace qtraj {

ModelSpec driven_tls(double omega, double delta, double gamma) {
    if (!(gamma > 0)) throw Error(ErrorKind::domain, "driven_tls: gamma must be positive");
    const Operator s01 = transition(2, 0, 1);
    const Operator s10 = transition(2, 1, 0);
    const Operator s11 = transition(2, 1, 1);
    const Operator s00 = transition(2, 0, 0);
    Operator h = -delta * s11 + (omega / 2.0) * (s01 + s10);

    ModelSpec spec;
    spec.name = "driven_tls";
    spec.parameters = {{"omega", omega}, {"delta", delta}, {"gamma", gamma}};
    spec.model = make_model(h, {std::sqrt(2.0 * gamma) * s01}, {"fluorescence"});
    spec.initial = basis(2, 0);
    spec.observables = {{"rho00", s00}, {"rho11", s11}, {"sigma3", 0.5 * (s11 - s00)}};
    spec.reset_notes = {"jump resets to |0>"};
    return spec;
}

void VSystemParams::validate() const {
    if (!(omega1 > 0) || !(gamma11 > 0))
        throw Error(ErrorKind::domain, "v_system: omega1 and gamma11 must be positive");
    if (omega2 < 0 || gamma22 < 0)
        throw Error(ErrorKind::domain, "v_system: omega2 and gamma22 must be non-negative");
}

ModelSpec v_system(const VSystemParams& p) {
    p.validate();
    auto s = [](int i, int j) { return transition(3, i, j); };
    Operator h = -p.delta1 * s(1, 1) - p.delta2 * s(2, 2) + (p.omega1 / 2.0) * (s(0, 1) + s(1, 0)) +
                 (p.omega2 / 2.0) * (s(0, 2) + s(2, 0));
    ModelSpec spec;
    spec.name = "v_system";
    spec.parameters = {{"omega1", p.omega1}, {"omega2", p.omega2},   {"delta1", p.delta1},
                       {"delta2", p.delta2}, {"gamma11", p.gamma11}, {"gamma22", p.gamma22}};
    spec.model = make_model(
        h, {std::sqrt(2.0 * p.gamma11) * s(0, 1), std::sqrt(2.0 * p.gamma22) * s(0, 2)},
        {"strong", "weak"});
    spec.initial = basis(3, 0);
    spec.observables = {{"rho00", s(0, 0)}, {"rho11", s(1, 1)}, {"rho22", s(2, 2)}};
    spec.reset_notes = {"strong jump resets to |0>", "weak jump resets to |0>"};
    return spec;
}

StateVector fock_superposition(int dim, const std::vector<int>& levels) {
    if (levels.empty()) throw Error(ErrorKind::domain, "fock_superposition: no levels");
    StateVector v = StateVector::Zero(dim);
    for (int n : levels) {
        if (n < 0 || n >= dim)
            throw Error(ErrorKind::dimension, "initial state outside the cavity truncation");
        v(n) += 1.0;
    }
    return normalize(v).first;
}

ModelSpec decaying_cavity(double gamma, int dim, const StateVector& psi0) {
    if (dim < 2) throw Error(ErrorKind::dimension, "decaying_cavity: dim must be >= 2");
    if (!(gamma > 0)) throw Error(ErrorKind::domain, "decaying_cavity: gamma must be positive");
    if (psi0.size() != dim)
        throw Error(ErrorKind::dimension, "initial state outside the cavity truncation");
    ModelSpec spec;
    spec.name = "decaying_cavity";
    spec.parameters = {{"gamma", gamma}, {"dim", dim}};
    spec.model = make_model(Operator::Zero(dim, dim), {std::sqrt(gamma) * destroy(dim)},
                            {"cavity"});
    spec.initial = normalize(psi0).first;
    spec.observables = {{"n", number_op(dim)}};
    spec.reset_notes = {"jump applies a and renormalizes"};
    return spec;
}

StateVector cat_state(cplx alpha, int dim, int sign) {
    StateVector v = coherent_state(alpha, dim) + double(sign) * coherent_state(-alpha, dim);
    return normalize(v).first;
}

StateVector CatScenario::expected(double t, int jumps) const {
    const cplx a = alpha * std::exp(-0.5 * gamma * t);
    return cat_state(a, dim, jumps % 2 == 0 ? +1 : -1);
}

double CatScenario::fidelity(const StateVector& psi, double t, int jumps) const {
    return qtraj::fidelity(psi, expected(t, jumps));
}

CatScenario cat_state_scenario(cplx alpha, int dim, double gamma) {
    if (dim < coherent_dimension(std::abs(alpha)))
        throw Error(ErrorKind::dimension, "cat_state_scenario: dim below |alpha|^2 + 6|alpha|");
    CatScenario sc{decaying_cavity(gamma, dim, std::abs(alpha) > 0 ? cat_state(alpha, dim, +1)
                                                                   : basis(dim, 0)),
                   alpha, gamma, dim};
    sc.spec.name = "cat_state";
    sc.spec.parameters["alpha"] = std::abs(alpha);
    return sc;
}

ModelSpec jaynes_cummings(double g, double gamma_cav, double delta, int dim, cplx alpha) {
    if (dim < coherent_dimension(std::abs(alpha)))
        throw Error(ErrorKind::dimension, "jaynes_cummings: dim below |alpha|^2 + 6|alpha|");
    const Operator ia = identity(2);
    const Operator ib = identity(dim);
    const Operator a = tensor_product(ia, destroy(dim));
    const Operator s10 = tensor_product(transition(2, 1, 0), ib);
    const Operator s11 = tensor_product(transition(2, 1, 1), ib);
    const Operator s00 = tensor_product(transition(2, 0, 0), ib);
    Operator h = -delta * s11 + g * (s10 * a + s10.adjoint() * a.adjoint());
    ModelSpec spec;
    spec.name = "jaynes_cummings";
    spec.parameters = {{"g", g}, {"gamma", gamma_cav}, {"delta", delta}, {"dim", dim},
                       {"alpha", std::abs(alpha)}};
    std::vector<Operator> cs;
    if (gamma_cav > 0) cs.push_back(std::sqrt(2.0 * gamma_cav) * a);
    else cs.push_back(Operator::Zero(2 * dim, 2 * dim));
    spec.model = make_model(h, cs, {"cavity"});
    spec.initial = tensor_state(basis(2, 1), coherent_state(alpha, dim));
    spec.observables = {{"inversion", 0.5 * (s11 - s00)}, {"n", a.adjoint() * a}};
    spec.reset_notes = {"jump applies a (field loss), atom untouched"};
    return spec;
}

ModelSpec cascaded_cavities(double kappa_a, double kappa_b, const Operator& h_a,
                            const Operator& h_b) {
    if (!(kappa_a > 0) || kappa_b < 0)
        throw Error(ErrorKind::domain, "cascaded_cavities: kappa_a > 0, kappa_b >= 0 required");
    const int na = static_cast<int>(h_a.rows());
    const int nb = static_cast<int>(h_b.rows());
    const Operator a = tensor_product(destroy(na), identity(nb));
    const Operator b = tensor_product(identity(na), destroy(nb));
    const double k = std::sqrt(kappa_a * kappa_b);
    Operator h = tensor_product(h_a, identity(nb)) + tensor_product(identity(na), h_b) +
                 (I * k) * (a.adjoint() * b - a * b.adjoint());
    ModelSpec spec;
    spec.name = "cascaded_cavities";
    spec.parameters = {{"kappa_a", kappa_a}, {"kappa_b", kappa_b}, {"dim_a", na}, {"dim_b", nb}};
    spec.model =
        make_model(h, {std::sqrt(2.0 * kappa_a) * a + std::sqrt(2.0 * kappa_b) * b}, {"output"});
    spec.initial = tensor_state(basis(na, std::min(1, na - 1)), basis(nb, 0));
    spec.observables = {{"nA", a.adjoint() * a}, {"nB", b.adjoint() * b}};
    spec.reset_notes = {"jump applies sqrt(2kA) a + sqrt(2kB) b, superposing both outputs"};
    return spec;
}

// ---------------------------------------------------------------------------
// Registry used by the CLI.

std::vector<std::string> preset_names() {
    return {"driven_tls", "v_system", "decaying_cavity", "cat_state", "jaynes_cummings",
            "cascaded_cavities"};
}

std::map<std::string, double> preset_defaults(const std::string& name) {
    if (name == "driven_tls") return {{"omega", 5.0}, {"delta", 0.0}, {"gamma", 1.0}};
    if (name == "v_system")
        return {{"omega1", 2.0}, {"omega2", 0.2},  {"delta1", 0.0},
                {"delta2", 0.0}, {"gamma11", 1.0}, {"gamma22", 0.0}};
    if (name == "decaying_cavity")
        return {{"gamma", 1.0}, {"dim", 16}, {"n_low", 0}, {"n_high", 10}};
    if (name == "cat_state") return {{"alpha", 2.0}, {"gamma", 1.0}, {"dim", 0}};
    if (name == "jaynes_cummings")
        return {{"g", 1.0}, {"gamma", 0.01}, {"delta", 0.0}, {"alpha", 4.0}, {"dim", 0}};
    if (name == "cascaded_cavities")
        return {{"kappa_a", 1.0}, {"kappa_b", 1.0}, {"dim_a", 3},   {"dim_b", 3},
                {"omega_a", 0.0}, {"omega_b", 0.0}, {"photons_a", 1}};
    throw Error(ErrorKind::config, "unknown scenario '" + name + "'");
}

std::string preset_description(const std::string& name) {
    if (name == "driven_tls") return "laser-driven two-level atom, C = sqrt(2 gamma)|0><1|";
    if (name == "v_system") return "V-system with metastable shelf, channels sqrt(2 gamma_ii)|0><i|";
    if (name == "decaying_cavity") return "lossy cavity from (|n_low>+|n_high>)/sqrt2, C = sqrt(gamma) a";
    if (name == "cat_state") return "even cat state in a lossy cavity, C = sqrt(gamma) a";
    if (name == "jaynes_cummings") return "excited atom + coherent field, C = sqrt(2 gamma) a";
    if (name == "cascaded_cavities") return "cavity A driving cavity B one way, shared output";
    throw Error(ErrorKind::config, "unknown scenario '" + name + "'");
}

namespace {
int as_int(double v, const std::string& key) {
    if (v != std::floor(v)) throw Error(ErrorKind::config, "parameters." + key + " must be an integer");
    return static_cast<int>(v);
}
}  // namespace

ModelSpec build_preset(const std::string& name, const std::map<std::string, double>& params) {
    auto p = preset_defaults(name);
    for (const auto& [k, v] : params) {
        if (!p.count(k))
            throw Error(ErrorKind::config, "parameters." + k + ": unknown parameter for " + name);
        if (!std::isfinite(v)) throw Error(ErrorKind::config, "parameters." + k + " is not finite");
        p[k] = v;
    }
    if (name == "driven_tls") return driven_tls(p["omega"], p["delta"], p["gamma"]);
    if (name == "v_system") {
        VSystemParams vp{p["omega1"], p["omega2"], p["delta1"], p["delta2"], p["gamma11"], p["gamma22"]};
        return v_system(vp);
    }
    if (name == "decaying_cavity") {
        const int dim = as_int(p["dim"], "dim");
        return decaying_cavity(p["gamma"], dim,
                               fock_superposition(dim, {as_int(p["n_low"], "n_low"),
                                                        as_int(p["n_high"], "n_high")}));
    }
    if (name == "cat_state") {
        int dim = as_int(p["dim"], "dim");
        if (dim == 0) dim = coherent_dimension(std::abs(p["alpha"]));
        return cat_state_scenario(p["alpha"], dim, p["gamma"]).spec;
    }
    if (name == "jaynes_cummings") {
        int dim = as_int(p["dim"], "dim");
        if (dim == 0) dim = coherent_dimension(std::abs(p["alpha"]));
        return jaynes_cummings(p["g"], p["gamma"], p["delta"], dim, p["alpha"]);
    }
    // cascaded_cavities
    const int na = as_int(p["dim_a"], "dim_a");
    const int nb = as_int(p["dim_b"], "dim_b");
    ModelSpec spec = cascaded_cavities(p["kappa_a"], p["kappa_b"], p["omega_a"] * number_op(na),
                                       p["omega_b"] * number_op(nb));
    const int n0 = as_int(p["photons_a"], "photons_a");
    if (n0 < 0 || n0 >= na) throw Error(ErrorKind::config, "parameters.photons_a outside dim_a");
    spec.initial = tensor_state(basis(na, n0), basis(nb, 0));
    return spec;
}

}  // namespace qtraj
