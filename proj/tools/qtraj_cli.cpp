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

// qtraj command line: run <config>, presets list, validate <config>.
// QTRAJ_THREADS overrides the worker count when --threads is not given.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qtraj/config.hpp"
#include "qtraj/models.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw qtraj::Error(qtraj::ErrorKind::config, "cannot read " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

int report(const qtraj::Error& e) {
    std::cerr << "qtraj: error: " << e.what() << "\n";
    return qtraj::exit_code(e.kind());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum trajectory simulations of open quantum systems"};
    app.require_subcommand(1);

    std::string run_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trajectories;
    std::string out_dir;
    int threads = 0;
    auto* run = app.add_subcommand("run", "run a scenario from a JSON config");
    run->add_option("config", run_path, "config file")->required();
    run->add_option("--seed", seed, "override the master seed");
    run->add_option("--trajectories", trajectories, "override the trajectory count")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "output directory (default: outputs.dir of the config)");
    run->add_option("--threads", threads, "worker threads (default: QTRAJ_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);

    auto* presets = app.add_subcommand("presets", "scenario presets");
    auto* list = presets->add_subcommand("list", "list presets and their default parameters");
    presets->require_subcommand(1);

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a config without running it");
    validate->add_option("config", validate_path, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const auto& name : qtraj::preset_names()) {
                std::cout << name << "  " << qtraj::preset_description(name) << "\n";
                for (const auto& [k, v] : qtraj::preset_defaults(name))
                    std::cout << "    " << k << " = " << qtraj::format_double(v) << "\n";
            }
            return 0;
        }
        if (validate->parsed()) {
            const qtraj::RunConfig c = qtraj::parse_config(slurp(validate_path));
            std::cout << "ok: " << c.name << " (" << c.scenario << ", " << c.method << ")\n";
            return 0;
        }
        qtraj::RunConfig c = qtraj::parse_config(slurp(run_path));
        if (seed) c.seed = *seed;
        if (trajectories) c.trajectories = *trajectories;
        c.echo["seed"] = c.seed;
        c.echo["trajectories"] = c.trajectories;
        const qtraj::OutputRecord rec = qtraj::run_scenario(c, threads);
        for (const auto& path : qtraj::write_outputs(c, rec, out_dir.empty() ? c.out_dir : out_dir))
            std::cout << path << "\n";
        if (rec.flagged) std::cerr << "qtraj: warning: validity conditions violated, results flagged\n";
        return 0;
    } catch (const qtraj::Error& e) {
        return report(e);
    } catch (const std::exception& e) {
        std::cerr << "qtraj: error: " << e.what() << "\n";
        return 1;
    }
}
