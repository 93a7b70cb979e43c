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

#include "qtraj/jump.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <sstream>

namespace qtraj {

JumpProbability jump_probability(const LindbladModel& model, const StateVector& psi, double dt,
                                 double error_threshold) {
    if (psi.size() != model.dim())
        throw Error(ErrorKind::dimension, "jump_probability: dimension mismatch");
    JumpProbability jp;
    jp.per_channel.reserve(model.channels());
    for (const auto& c : model.collapse_ops) {
        const double p = dt * (c * psi).squaredNorm();
        jp.per_channel.push_back(p);
        jp.total += p;
    }
    if (jp.total > error_threshold) {
        std::ostringstream os;
        os << "jump probability per step " << jp.total << " exceeds " << error_threshold
           << "; reduce dt";
        throw Error(ErrorKind::numerical, os.str());
    }
    return jp;
}

StateVector apply_jump(const LindbladModel& model, const StateVector& psi, int channel) {
    if (channel < 0 || channel >= model.channels())
        throw Error(ErrorKind::domain, "apply_jump: channel index out of range");
    StateVector out = model.collapse_ops[channel] * psi;
    const double n = out.norm();
    if (!(n > 0)) throw Error(ErrorKind::domain, "apply_jump: zero-probability channel");
    return out / n;
}

StateVector no_jump_step(const LindbladModel& model, const StateVector& psi, double dt,
                         bool renormalize) {
    StateVector out = propagator(effective_hamiltonian(model), dt) * psi;
    if (renormalize) return normalize(out).first;
    return out;
}

// ---------------------------------------------------------------------------
// Mini-trajectory tables.

namespace {

struct Template {
    double coeff;  // multiplies dt^power
    int power;
    std::vector<int> ops;  // >0: U over k sixths, 0: collapse
};

std::vector<Template> scheme_templates(Order order) {
    const int C = 0;
    if (order == Order::second) {
        return {{1.0, 0, {6}}, {0.5, 1, {C, 6}}, {0.5, 1, {6, C}}, {0.5, 2, {C, C, 6}}};
    }
    if (order == Order::fourth) {
        // Application order (rightmost factor first). Single-jump nodes at
        // 0, 1/3, 2/3, 1 of the step; double-jump nodes (0,1/2), (1/2,1),
        // (1/2,1/2); triple-jump nodes at the corners.
        return {{1.0, 0, {6}},
                {1.0 / 8, 1, {C, 6}},
                {1.0 / 8, 1, {6, C}},
                {3.0 / 8, 1, {4, C, 2}},
                {3.0 / 8, 1, {2, C, 4}},
                {1.0 / 6, 2, {C, 3, C, 3}},
                {1.0 / 6, 2, {3, C, 3, C}},
                {1.0 / 6, 2, {3, C, C, 3}},
                {1.0 / 24, 3, {C, C, C, 6}},
                {1.0 / 24, 3, {C, C, 6, C}},
                {1.0 / 24, 3, {C, 6, C, C}},
                {1.0 / 24, 3, {6, C, C, C}},
                {1.0 / 24, 4, {C, C, C, C, 6}}};
    }
    throw Error(ErrorKind::domain, "scheme_templates: first order has no mini-trajectory table");
}

void expand(const Template& t, std::size_t pos, int channels, std::vector<BranchOp>& cur,
            double weight, std::vector<Branch>& out) {
    if (pos == t.ops.size()) {
        out.push_back({weight, cur});
        return;
    }
    const int op = t.ops[pos];
    if (op > 0) {
        cur.push_back({false, op, -1});
        expand(t, pos + 1, channels, cur, weight, out);
        cur.pop_back();
        return;
    }
    for (int m = 0; m < channels; ++m) {
        cur.push_back({true, 0, m});
        expand(t, pos + 1, channels, cur, weight, out);
        cur.pop_back();
    }
}

}  // namespace

std::vector<Branch> scheme_branches(Order order, int channels, double dt) {
    std::vector<Branch> out;
    if (order == Order::first) return out;
    for (const auto& t : scheme_templates(order)) {
        std::vector<BranchOp> cur;
        expand(t, 0, channels, cur, t.coeff * std::pow(dt, t.power), out);
    }
    return out;
}

JumpStepper::JumpStepper(const LindbladModel& model, double dt, Order order, double warn_threshold,
                         double error_threshold)
    : model_(model), dt_(dt), order_(order), warn_threshold_(warn_threshold),
      error_threshold_(error_threshold) {
    if (!(dt > 0)) throw Error(ErrorKind::domain, "JumpStepper: dt must be positive");
    heff_ = effective_hamiltonian(model_);
    u_.resize(7);
    u_[0] = identity(model_.dim());
    for (int k = 1; k <= 6; ++k) u_[k] = propagator(heff_, dt * k / 6.0);
    for (const auto& c : model_.collapse_ops) cdc_.push_back(c.adjoint() * c);
    branches_ = scheme_branches(order, model_.channels(), dt);
    states_.assign(branches_.size(), StateVector(model_.dim()));
    probs_.assign(branches_.size(), 0.0);
    tmp_a_.resize(model_.dim());
    tmp_b_.resize(model_.dim());
}

void JumpStepper::apply_branch(const Branch& b, const StateVector& psi, StateVector& out) const {
    out = psi;
    StateVector& tmp = scratch_;
    tmp.resize(psi.size());
    for (const auto& op : b.ops) {
        if (op.jump) tmp.noalias() = model_.collapse_ops[op.channel] * out;
        else tmp.noalias() = u_[op.sixths] * out;
        out.swap(tmp);
    }
}

namespace {

std::vector<JumpEvent> branch_jumps(const Branch& b, double dt) {
    std::vector<JumpEvent> ev;
    int elapsed = 0;
    for (const auto& op : b.ops) {
        if (op.jump) ev.push_back({dt * elapsed / 6.0, op.channel});
        else elapsed += op.sixths;
    }
    return ev;
}

}  // namespace

bool JumpStepper::step(StateVector& psi, double t, double r, std::vector<JumpEvent>& jumps) {
    double total = 0;
    rates_.resize(cdc_.size());
    for (std::size_t m = 0; m < cdc_.size(); ++m) {
        tmp_b_.noalias() = cdc_[m] * psi;
        rates_[m] = dt_ * psi.dot(tmp_b_).real();
        total += rates_[m];
    }
    if (total > error_threshold_) {
        std::ostringstream os;
        os << "jump probability per step " << total << " exceeds " << error_threshold_
           << "; reduce dt";
        throw Error(ErrorKind::numerical, os.str());
    }
    const bool warned = total > warn_threshold_;

    if (order_ == Order::first) {
        if (r < total) {
            double acc = 0;
            int ch = model_.channels() - 1;
            for (int m = 0; m < model_.channels(); ++m) {
                acc += rates_[m];
                if (r < acc) {
                    ch = m;
                    break;
                }
            }
            tmp_a_.noalias() = model_.collapse_ops[ch] * psi;
            psi = tmp_a_ / tmp_a_.norm();
            jumps.push_back({t + dt_, ch});
        } else {
            tmp_a_.noalias() = u_[6] * psi;
            psi = tmp_a_ / tmp_a_.norm();
        }
        return warned;
    }

    double sum = 0;
    for (std::size_t b = 0; b < branches_.size(); ++b) {
        apply_branch(branches_[b], psi, states_[b]);
        probs_[b] = branches_[b].weight * states_[b].squaredNorm();
        sum += probs_[b];
    }
    const double target = r * sum;
    std::size_t pick = branches_.size() - 1;
    double acc = 0;
    for (std::size_t b = 0; b < branches_.size(); ++b) {
        acc += probs_[b];
        if (target < acc && probs_[b] > 0) {
            pick = b;
            break;
        }
    }
    while (probs_[pick] <= 0 && pick > 0) --pick;
    psi = states_[pick] / states_[pick].norm();
    for (const auto& ev : branch_jumps(branches_[pick], dt_)) jumps.push_back({t + ev.t, ev.channel});
    return warned;
}

std::vector<BranchOutcome> JumpStepper::branch_outcomes(const StateVector& psi) const {
    std::vector<BranchOutcome> out;
    if (order_ == Order::first) {
        const JumpProbability jp = jump_probability(model_, psi, dt_, error_threshold_);
        StateVector s = u_[6] * psi;
        out.push_back({0, 1.0 - jp.total, s / s.norm(), {}});
        for (int m = 0; m < model_.channels(); ++m) {
            if (jp.per_channel[m] <= 0) continue;
            StateVector j = model_.collapse_ops[m] * psi;
            out.push_back({m + 1, jp.per_channel[m], j / j.norm(), {{dt_, m}}});
        }
        return out;
    }
    double sum = 0;
    for (std::size_t b = 0; b < branches_.size(); ++b) {
        StateVector s;
        apply_branch(branches_[b], psi, s);
        const double p = branches_[b].weight * s.squaredNorm();
        sum += p;
        if (p > 0)
            out.push_back({static_cast<int>(b), p, s / s.norm(), branch_jumps(branches_[b], dt_)});
    }
    for (auto& o : out) o.probability /= sum;
    return out;
}

// ---------------------------------------------------------------------------

long steps_per_sample(const std::vector<double>& t_grid, double dt) {
    if (t_grid.empty() || t_grid.front() != 0.0)
        throw Error(ErrorKind::config, "time grid must start at 0");
    if (t_grid.size() == 1) return 1;
    const double h = t_grid[1] - t_grid[0];
    const double ratio = h / dt;
    const long n = std::lround(ratio);
    if (n < 1 || std::abs(ratio - n) > 1e-6 * std::max(1.0, ratio))
        throw Error(ErrorKind::config, "sample spacing must be an integer multiple of dt");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (std::abs((t_grid[k] - t_grid[k - 1]) - h) > 1e-9 * std::max(1.0, h))
            throw Error(ErrorKind::config, "sample grid must be uniform");
    return n;
}

namespace {

void sample_into(const StateVector& psi, const std::vector<Operator>& obs, std::size_t k,
                 std::vector<std::vector<double>>& samples, StateVector& scratch) {
    const double nn = psi.squaredNorm();
    for (std::size_t o = 0; o < obs.size(); ++o) {
        scratch.noalias() = obs[o] * psi;
        samples[o][k] = psi.dot(scratch).real() / nn;
    }
}

// Bisection for |exp(-i H s) psi|^2 = r on (0, h].
double bisect_norm(const EffectivePropagator& prop, const StateVector& psi, double h, double r) {
    double lo = 0, hi = h;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double n2 = prop.apply(mid, psi).squaredNorm();
        if (std::abs(n2 - r) <= 1e-8 * r) return mid;
        if (n2 > r) lo = mid;
        else hi = mid;
        if (hi - lo <= 1e-15 * std::max(1.0, h)) break;
    }
    return 0.5 * (lo + hi);
}

int pick_channel(const LindbladModel& model, const StateVector& psi, double u) {
    std::vector<double> rates;
    double total = 0;
    for (const auto& c : model.collapse_ops) {
        rates.push_back((c * psi).squaredNorm());
        total += rates.back();
    }
    if (!(total > 0)) throw Error(ErrorKind::domain, "waiting time: all channel rates vanish");
    double acc = 0;
    for (std::size_t m = 0; m < rates.size(); ++m) {
        acc += rates[m];
        if (u * total < acc) return static_cast<int>(m);
    }
    return static_cast<int>(rates.size()) - 1;
}

}  // namespace

TrajectoryRecord run_trajectory(JumpStepper& stepper, const StateVector& psi0,
                                const std::vector<double>& t_grid, const JumpConfig& config,
                                const std::vector<Operator>& observables, std::uint64_t index) {
    const LindbladModel& model = stepper.model();
    if (psi0.size() != model.dim())
        throw Error(ErrorKind::dimension, "run_trajectory: initial state dimension mismatch");
    const long per = steps_per_sample(t_grid, config.dt);
    TrajectoryRecord rec;
    rec.seed = config.seed;
    rec.index = index;
    rec.dt = config.dt;
    rec.t_grid = t_grid;
    rec.samples.assign(observables.size(), std::vector<double>(t_grid.size(), 0.0));
    Rng rng(config.seed, index);
    StateVector psi = normalize(psi0).first;
    StateVector scratch(psi.size());
    sample_into(psi, observables, 0, rec.samples, scratch);
    const double dt = config.dt;

    if (config.method == JumpMethod::bernoulli) {
        for (std::size_t k = 1; k < t_grid.size(); ++k) {
            for (long s = 0; s < per; ++s) {
                const double t = t_grid[k - 1] + s * dt;
                if (stepper.step(psi, t, rng.uniform(), rec.jumps)) rec.warned = true;
            }
            sample_into(psi, observables, k, rec.samples, scratch);
        }
        return rec;
    }

    // Waiting-time method: psi holds the unnormalized no-jump state.
    const Operator& u = stepper.propagator_full();
    const EffectivePropagator prop(stepper.heff());
    double r = rng.uniform_open0();
    StateVector next(psi.size());
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        for (long s = 0; s < per; ++s) {
            double t = t_grid[k - 1] + s * dt;
            double remaining = dt;
            while (true) {
                if (remaining == dt) next.noalias() = u * psi;
                else next = prop.apply(remaining, psi);
                if (next.squaredNorm() >= r) {
                    psi.swap(next);
                    break;
                }
                const double tau = bisect_norm(prop, psi, remaining, r);
                StateVector at = prop.apply(tau, psi);
                const int ch = pick_channel(model, at, rng.uniform());
                rec.jumps.push_back({t + tau, ch});
                psi = model.collapse_ops[ch] * at;
                psi /= psi.norm();
                r = rng.uniform_open0();
                t += tau;
                remaining -= tau;
                if (remaining <= 0) break;
            }
            // Keep the unnormalized state representable without affecting
            // the threshold comparison: rescale both together.
            const double n2 = psi.squaredNorm();
            if (n2 < 1e-200) {
                psi /= std::sqrt(n2);
                r /= n2;
            }
        }
        sample_into(psi, observables, k, rec.samples, scratch);
    }
    return rec;
}

TrajectoryRecord run_trajectory(const LindbladModel& model, const StateVector& psi0,
                                const std::vector<double>& t_grid, const JumpConfig& config,
                                const std::vector<Operator>& observables, std::uint64_t index) {
    JumpStepper stepper(model, config.dt, config.order, config.warn_threshold,
                        config.error_threshold);
    return run_trajectory(stepper, psi0, t_grid, config, observables, index);
}

WaitingTimeSampler::WaitingTimeSampler(const LindbladModel& model, double lattice_dt)
    : model_(model), lattice_dt_(lattice_dt), prop_(effective_hamiltonian(model)) {
    if (!(lattice_dt > 0)) throw Error(ErrorKind::domain, "waiting time: lattice_dt must be > 0");
    u_ = prop_.matrix(lattice_dt);
}

WaitingTime WaitingTimeSampler::sample(const StateVector& psi_reset, Rng& rng, double t_max) const {
    const double r = rng.uniform_open0();
    StateVector psi = normalize(psi_reset).first;
    StateVector next(psi.size());
    double t = 0;
    while (t < t_max) {
        next.noalias() = u_ * psi;
        if (next.squaredNorm() < r) {
            const double tau = bisect_norm(prop_, psi, lattice_dt_, r);
            StateVector at = prop_.apply(tau, psi);
            const int ch = pick_channel(model_, at, rng.uniform());
            StateVector after = model_.collapse_ops[ch] * at;
            after /= after.norm();
            return {t + tau, ch, false, std::move(after)};
        }
        psi.swap(next);
        t += lattice_dt_;
    }
    return {t_max, -1, true, psi / psi.norm()};
}

WaitingTime waiting_time_sample(const LindbladModel& model, const StateVector& psi_reset, Rng& rng,
                                double t_max, double lattice_dt) {
    return WaitingTimeSampler(model, lattice_dt).sample(psi_reset, rng, t_max);
}

EnsembleResult ensemble_average(const LindbladModel& model, const StateVector& psi0,
                                const std::vector<double>& t_grid, std::size_t n,
                                const JumpConfig& config, const std::vector<Operator>& observables,
                                const std::vector<std::string>& names, int threads) {
    if (n < 1) throw Error(ErrorKind::domain, "ensemble_average: N must be >= 1");
    std::vector<std::string> labels = names;
    for (std::size_t o = labels.size(); o < observables.size(); ++o)
        labels.push_back("obs" + std::to_string(o));
    const JumpStepper proto(model, config.dt, config.order, config.warn_threshold,
                            config.error_threshold);
    std::atomic<bool> warned{false};
    EnsembleResult res = run_ensemble(
        n, threads, t_grid, labels,
        [&](std::size_t i, std::vector<std::vector<double>>& samples) {
            JumpStepper local(proto);
            TrajectoryRecord rec = run_trajectory(local, psi0, t_grid, config, observables, i);
            if (rec.warned) warned.store(true);
            samples = std::move(rec.samples);
            return static_cast<double>(rec.jumps.size());
        });
    res.warned = warned.load();
    return res;
}

// ---------------------------------------------------------------------------

std::vector<double> reset_scheme_expectation(const JumpStepper& stepper,
                                             const StateVector& reset_state,
                                             const Operator& observable, int n_steps) {
    const double dt = stepper.dt();
    const Operator& heff = stepper.heff();
    const StateVector reset = normalize(reset_state).first;

    struct AgeInfo {
        double obs;
        std::vector<std::pair<long, double>> transitions;  // (new age, probability)
    };
    std::map<long, AgeInfo> cache;

    auto state_at = [&](long age) {
        StateVector s = propagator(heff, dt * age / 6.0) * reset;
        return StateVector(s / s.norm());
    };
    auto info = [&](long age) -> const AgeInfo& {
        auto it = cache.find(age);
        if (it != cache.end()) return it->second;
        AgeInfo ai;
        const StateVector psi = state_at(age);
        ai.obs = expectation(observable, psi).real();
        const auto outcomes = stepper.branch_outcomes(psi);
        for (const auto& o : outcomes) {
            long new_age;
            if (stepper.order() == Order::first) {
                new_age = (o.branch == 0) ? age + 6 : 0;
            } else {
                const Branch& b = stepper.branches()[o.branch];
                long after = 0;
                bool jumped = false;
                for (const auto& op : b.ops) {
                    if (op.jump) {
                        jumped = true;
                        after = 0;
                    } else {
                        after += op.sixths;
                    }
                }
                new_age = jumped ? after : age + after;
            }
            if (fidelity(o.state, state_at(new_age)) < 1 - 1e-9)
                throw Error(ErrorKind::domain,
                            "reset_scheme_expectation: jumps do not reset to a fixed state");
            ai.transitions.push_back({new_age, o.probability});
        }
        return cache.emplace(age, std::move(ai)).first->second;
    };

    std::map<long, double> dist{{0, 1.0}};
    std::vector<double> out;
    out.reserve(n_steps + 1);
    for (int n = 0; n <= n_steps; ++n) {
        double e = 0;
        for (const auto& [age, p] : dist) e += p * info(age).obs;
        out.push_back(e);
        if (n == n_steps) break;
        std::map<long, double> next;
        for (const auto& [age, p] : dist)
            for (const auto& [na, q] : info(age).transitions) next[na] += p * q;
        dist.swap(next);
    }
    return out;
}

}  // namespace qtraj
