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

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace qtraj {

/// Worker count: explicit request if > 0, else QTRAJ_THREADS, else the
/// hardware concurrency.
int resolve_threads(int requested);

/// Calls fn(i) for i in [0, n) on `threads` workers. The first exception
/// thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/**
 * Per-time sums over trajectories for several observables.
 *
 * Trajectories are grouped into fixed blocks of `kBlock` consecutive
 * indices; each block is summed in index order and blocks are merged in
 * block order, so the floating-point result does not depend on the thread
 * count.
 */
struct Accumulator {
    static constexpr std::size_t kBlock = 32;
    std::size_t n = 0;
    std::vector<std::vector<double>> sum;
    std::vector<std::vector<double>> sum_sq;
    double total_events = 0;

    void resize(std::size_t n_obs, std::size_t n_t);
    void add(const std::vector<std::vector<double>>& samples, double events);
    void merge(const Accumulator& other);
};

/// Mean and standard error curves.
struct EnsembleResult {
    std::vector<double> t_grid;
    std::vector<std::string> names;
    std::vector<std::vector<double>> mean;
    std::vector<std::vector<double>> stderr_;
    std::size_t n = 0;
    double total_jumps = 0;
    bool warned = false;
};

/// Sample-producing callback: fills samples[obs][t] for trajectory `index`
/// and returns its number of events (jumps).
using TrajectoryFn =
    std::function<double(std::size_t index, std::vector<std::vector<double>>& samples)>;

EnsembleResult run_ensemble(std::size_t n_traj, int threads, const std::vector<double>& t_grid,
                            const std::vector<std::string>& names, const TrajectoryFn& fn);

}  // namespace qtraj
