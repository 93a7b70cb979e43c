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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtraj/core.hpp"
#include "qtraj/photon_stats.hpp"

namespace qtraj {

inline constexpr int kSchemaVersion = 1;

struct SpectrumBlock {
    double burn_in = 10.0;
    double window = 50.0;
    double dt = 0.01;
    double omega_min = 0.0;
    double omega_max = 10.0;
    int points = 81;
    int channel = 0;
    // conditional-spectrum only
    double T0 = 50.0;
    double open_rate = 0.0;
};

struct AnalysisConfig {
    struct Delay {
        double t_max = 10.0;
        int samples = 200;
    };
    struct Periods {
        std::optional<double> T0;  ///< falls back to detector.threshold
        double t_end = 2e4;
        double lattice_dt = 0.05;
    };
    struct G2 {
        double tau_max = 10.0;
        int samples = 200;
        double dt = 1e-3;
    };
    struct Mandel {
        double A1 = 1, A2 = 1e-5, B1W1 = 0.1, B2W2 = 1e-3;
        double tau_max = 5e3;
        int samples = 50000;
    };
    struct Counting {
        std::string mode = "two_state";
        double T = 100.0;
        int n_max = 100;
        double gamma1 = 1, eta = 1, H = 1, I0 = 1, zero_excess = 1.0 / 3.0;
    };
    std::optional<Delay> delay;
    std::optional<Periods> periods;
    std::optional<G2> g2;
    std::optional<SpectrumBlock> spectrum;
    std::optional<SpectrumBlock> conditional_spectrum;
    std::optional<Mandel> mandel;
    std::optional<Counting> counting;
};

struct RunConfig {
    int schema_version = kSchemaVersion;
    std::string name = "run";
    std::string scenario;
    std::map<std::string, double> parameters;
    std::string method = "jump";  ///< master, jump, jump2, jump4, qsd, homodyne
    double dt = 1e-3;
    double t_max = 5.0;
    int samples = 100;
    std::size_t trajectories = 1000;
    std::uint64_t seed = 0;
    std::vector<std::string> observables;  ///< empty: all preset observables
    double homodyne_alpha = 0.0;
    int homodyne_channel = 0;
    std::string qsd_variant = "normalized";
    DetectorConfig detector;
    bool strict_validity = false;
    /// Largest composite Hilbert-space dimension allowed while building the model.
    int dimension_cap = 64;
    AnalysisConfig analysis;
    std::string out_dir = ".";
    bool write_csv = true;
    bool write_summary = true;
    /// Parsed input with defaults filled in.
    nlohmann::ordered_json echo;
};

/// Parses and validates a JSON config. Errors are ErrorKind::config with
/// the path of the offending key.
RunConfig parse_config(const std::string& text);

struct OutputRecord {
    /// file suffix ("csv", "delay.csv", ...) -> contents
    std::map<std::string, std::string> tables;
    nlohmann::ordered_json summary;
    bool flagged = false;  ///< validity warning raised
};

/// Runs the configured scenario. `threads` = 0 uses QTRAJ_THREADS or the
/// hardware concurrency.
OutputRecord run_scenario(const RunConfig& config, int threads = 0);

/// Writes <name>.<suffix> files and <name>.summary.json into `dir`.
std::vector<std::string> write_outputs(const RunConfig& config, const OutputRecord& record,
                                       const std::string& dir);

/// 0 ok, 2 config (and invalid arguments), 3 numerical guard, 4 validity refusal.
int exit_code(ErrorKind kind);

/// "%.17g"
std::string format_double(double v);

}  // namespace qtraj
