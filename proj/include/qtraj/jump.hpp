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
#include <optional>
#include <string>
#include <vector>

#include "qtraj/lindblad.hpp"
#include "qtraj/parallel.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

enum class Order { first, second, fourth };
enum class JumpMethod { bernoulli, waiting_time };

struct JumpConfig {
    double dt = 1e-3;
    Order order = Order::first;
    std::uint64_t seed = 0;
    JumpMethod method = JumpMethod::bernoulli;
    double warn_threshold = 0.1;
    double error_threshold = 0.5;
};

struct JumpEvent {
    double t;
    int channel;
};

struct TrajectoryRecord {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    double dt = 0;
    std::vector<JumpEvent> jumps;
    std::vector<double> t_grid;
    /// samples[observable][time index]
    std::vector<std::vector<double>> samples;
    /// Set when some step had dt * sum <C^dag C> above the warning threshold.
    bool warned = false;
};

struct JumpProbability {
    double total = 0;
    std::vector<double> per_channel;
};

/// dP = dt * sum_m <C_m^dag C_m>. Throws ErrorKind::numerical above
/// `error_threshold`.
JumpProbability jump_probability(const LindbladModel& model, const StateVector& psi, double dt,
                                 double error_threshold = 0.5);

/// C_m psi / |C_m psi|. Throws ErrorKind::domain on a zero-probability channel.
StateVector apply_jump(const LindbladModel& model, const StateVector& psi, int channel);

/// exp(-i H_eff dt) psi, optionally renormalized.
StateVector no_jump_step(const LindbladModel& model, const StateVector& psi, double dt,
                         bool renormalize = true);

/// One operation inside a mini-trajectory: either a no-jump propagation over
/// `sixths`/6 of the step, or a collapse through `channel`.
struct BranchOp {
    bool jump;
    int sixths;
    int channel;
};

/// A mini-trajectory with all channel indices fixed. `ops` are listed in
/// application order.
struct Branch {
    double weight;
    std::vector<BranchOp> ops;
};

/// Weighted mini-trajectory probability and resulting normalized state.
struct BranchOutcome {
    int branch;
    double probability;
    StateVector state;
    std::vector<JumpEvent> jumps;  ///< offsets within the step
};

/**
 * Single-step propagation for a fixed model and step size.
 *
 * Propagators exp(-i H_eff k dt/6) are computed once. The second- and
 * fourth-order schemes pick one of their mini-trajectories with
 * probability weight * |K psi|^2, renormalized over all of them.
 */
class JumpStepper {
public:
    JumpStepper(const LindbladModel& model, double dt, Order order,
                double warn_threshold = 0.1, double error_threshold = 0.5);

    const LindbladModel& model() const { return model_; }
    double dt() const { return dt_; }
    Order order() const { return order_; }
    const Operator& heff() const { return heff_; }
    const Operator& propagator_full() const { return u_[6]; }
    const std::vector<Branch>& branches() const { return branches_; }

    /// Advances the normalized state by one step. `r` is a uniform deviate in
    /// [0, 1). Jumps are appended with absolute times t + offset. Returns true
    /// if the warning threshold was exceeded.
    bool step(StateVector& psi, double t, double r, std::vector<JumpEvent>& jumps);

    /// All mini-trajectory outcomes with their normalized probabilities.
    /// For the first-order scheme: no-jump first, then one entry per channel.
    std::vector<BranchOutcome> branch_outcomes(const StateVector& psi) const;

private:
    void apply_branch(const Branch& b, const StateVector& psi, StateVector& out) const;

    LindbladModel model_;
    double dt_;
    Order order_;
    double warn_threshold_;
    double error_threshold_;
    Operator heff_;
    std::vector<Operator> u_;  // index k -> exp(-i H_eff k dt / 6), k = 0..6
    std::vector<Operator> cdc_;
    std::vector<Branch> branches_;
    // scratch for step()
    std::vector<StateVector> states_;
    std::vector<double> probs_;
    std::vector<double> rates_;
    StateVector tmp_a_, tmp_b_;
    mutable StateVector scratch_;
};

/// Builds the expanded mini-trajectory list of a scheme for `channels`
/// collapse operators and step `dt`.
std::vector<Branch> scheme_branches(Order order, int channels, double dt);

/// Trajectory driver. t_grid must be uniform multiples of config.dt starting
/// at 0. Deterministic in (config.seed, index).
TrajectoryRecord run_trajectory(const LindbladModel& model, const StateVector& psi0,
                                const std::vector<double>& t_grid, const JumpConfig& config,
                                const std::vector<Operator>& observables,
                                std::uint64_t index = 0);

/// Same as run_trajectory but reusing a prepared stepper.
TrajectoryRecord run_trajectory(JumpStepper& stepper, const StateVector& psi0,
                                const std::vector<double>& t_grid, const JumpConfig& config,
                                const std::vector<Operator>& observables, std::uint64_t index);

/// Result of a waiting-time draw. `censored` means no jump before t_max.
struct WaitingTime {
    double t;
    int channel;
    bool censored;
    /// Normalized state right after the jump (or at t_max when censored).
    StateVector state;
};

/// Reusable waiting-time sampler for one model and lattice step.
class WaitingTimeSampler {
public:
    WaitingTimeSampler(const LindbladModel& model, double lattice_dt = 1e-2);
    WaitingTime sample(const StateVector& psi_reset, Rng& rng, double t_max) const;

private:
    LindbladModel model_;
    double lattice_dt_;
    EffectivePropagator prop_;
    Operator u_;
};

/**
 * Draws r and propagates the unnormalized state on a lattice of `lattice_dt`
 * until |psi|^2 < r, then bisects inside the bracketing interval. The
 * channel is drawn from the per-channel rates at the jump time.
 */
WaitingTime waiting_time_sample(const LindbladModel& model, const StateVector& psi_reset, Rng& rng,
                                double t_max, double lattice_dt = 1e-2);

/// Mean and standard error over N seeded trajectories (index 0..N-1).
EnsembleResult ensemble_average(const LindbladModel& model, const StateVector& psi0,
                                const std::vector<double>& t_grid, std::size_t n,
                                const JumpConfig& config, const std::vector<Operator>& observables,
                                const std::vector<std::string>& names = {}, int threads = 0);

/// Number of dt steps per grid interval; throws when the grid is not a
/// uniform multiple of dt.
long steps_per_sample(const std::vector<double>& t_grid, double dt);

/**
 * Exact expectation of a stochastic scheme when every jump resets to the
 * same state (e.g. the two-level atom). The state after any branch is
 * determined by the time elapsed since the last reset, tracked on a dt/6
 * lattice, so the probability distribution over this age can be propagated
 * without sampling noise. Returns <obs> after each of n_steps steps
 * (index 0 is the initial value).
 */
std::vector<double> reset_scheme_expectation(const JumpStepper& stepper,
                                             const StateVector& reset_state,
                                             const Operator& observable, int n_steps);

}  // namespace qtraj
