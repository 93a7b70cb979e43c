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

#include "qtraj/parallel.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace qtraj {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QTRAJ_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&]() {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

void Accumulator::resize(std::size_t n_obs, std::size_t n_t) {
    sum.assign(n_obs, std::vector<double>(n_t, 0.0));
    sum_sq.assign(n_obs, std::vector<double>(n_t, 0.0));
    n = 0;
    total_events = 0;
}

void Accumulator::add(const std::vector<std::vector<double>>& samples, double events) {
    for (std::size_t o = 0; o < sum.size(); ++o)
        for (std::size_t k = 0; k < sum[o].size(); ++k) {
            const double x = samples[o][k];
            sum[o][k] += x;
            sum_sq[o][k] += x * x;
        }
    ++n;
    total_events += events;
}

void Accumulator::merge(const Accumulator& other) {
    for (std::size_t o = 0; o < sum.size(); ++o)
        for (std::size_t k = 0; k < sum[o].size(); ++k) {
            sum[o][k] += other.sum[o][k];
            sum_sq[o][k] += other.sum_sq[o][k];
        }
    n += other.n;
    total_events += other.total_events;
}

EnsembleResult run_ensemble(std::size_t n_traj, int threads, const std::vector<double>& t_grid,
                            const std::vector<std::string>& names, const TrajectoryFn& fn) {
    const std::size_t n_obs = names.size();
    const std::size_t n_t = t_grid.size();
    const std::size_t n_blocks = (n_traj + Accumulator::kBlock - 1) / Accumulator::kBlock;
    std::vector<Accumulator> blocks(n_blocks);
    parallel_for(n_blocks, resolve_threads(threads), [&](std::size_t b) {
        Accumulator& acc = blocks[b];
        acc.resize(n_obs, n_t);
        std::vector<std::vector<double>> samples(n_obs, std::vector<double>(n_t, 0.0));
        const std::size_t lo = b * Accumulator::kBlock;
        const std::size_t hi = std::min(n_traj, lo + Accumulator::kBlock);
        for (std::size_t i = lo; i < hi; ++i) {
            const double events = fn(i, samples);
            acc.add(samples, events);
        }
    });
    Accumulator total;
    total.resize(n_obs, n_t);
    for (const auto& b : blocks) total.merge(b);

    EnsembleResult res;
    res.t_grid = t_grid;
    res.names = names;
    res.n = total.n;
    res.total_jumps = total.total_events;
    res.mean.assign(n_obs, std::vector<double>(n_t, 0.0));
    res.stderr_.assign(n_obs, std::vector<double>(n_t, 0.0));
    const double n = static_cast<double>(total.n);
    for (std::size_t o = 0; o < n_obs; ++o)
        for (std::size_t k = 0; k < n_t; ++k) {
            const double m = total.sum[o][k] / n;
            res.mean[o][k] = m;
            if (total.n > 1) {
                const double var = std::max(0.0, (total.sum_sq[o][k] - n * m * m) / (n - 1.0));
                res.stderr_[o][k] = std::sqrt(var / n);
            }
        }
    return res;
}

}  // namespace qtraj
