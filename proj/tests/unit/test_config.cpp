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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "qtraj/config.hpp"

using namespace qtraj;

namespace {

std::string config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
        return e.what();
    }
    return "";
}

bool contains(const std::string& s, const std::string& sub) { return s.find(sub) != std::string::npos; }

}  // namespace

TEST_CASE("minimal config fills defaults") {
    const RunConfig c = parse_config(R"({"scenario": "driven_tls"})");
    CHECK(c.name == "run");
    CHECK(c.method == "jump");
    CHECK(c.parameters.at("omega") == 5.0);
    CHECK(c.detector.efficiency == 1.0);
    CHECK(c.echo["parameters"]["gamma"] == 1.0);
    CHECK(c.echo["schema_version"] == kSchemaVersion);
}

TEST_CASE("config errors name the offending key") {
    CHECK(contains(config_error(R"({"scenario": "driven_tls", "detector": {"efficiency": 1.5}})"),
                   "DetectorConfig"));
    CHECK(contains(config_error(R"({"scenario": "driven_tls", "analysis": {"delay": {"tmax": 3}}})"),
                   "analysis.delay.tmax"));
    CHECK(contains(config_error(R"({"scenario": "driven_tls", "parameters": {"omgea": 1}})"), "parameters.omgea"));
    CHECK(contains(config_error(R"({"scenario": "driven_tls", "dt": 0.003, "t_max": 1, "samples": 10})"), "dt"));
    CHECK(contains(config_error(R"({"scenario": "nope"})"), "scenario"));
    CHECK(contains(config_error(R"({})"), "scenario"));
    CHECK(contains(config_error(R"({"scenario": "driven_tls", "schema_version": 2})"), "schema_version"));
    CHECK(contains(config_error(R"({"scenario": "driven_tls", "observables": ["nA"]})"), "observables"));
    CHECK(contains(config_error(R"({"scenario": "driven_tls", "analysis": {"periods": {}}})"), "analysis.periods"));
    CHECK(contains(config_error("{not json"), "invalid JSON"));
}

TEST_CASE("exit codes") {
    CHECK(exit_code(ErrorKind::config) == 2);
    CHECK(exit_code(ErrorKind::domain) == 2);
    CHECK(exit_code(ErrorKind::numerical) == 3);
    CHECK(exit_code(ErrorKind::validity) == 4);
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("small run produces a series with its oracle") {
    const RunConfig c = parse_config(R"({"scenario": "driven_tls", "t_max": 1.0, "samples": 10,
        "trajectories": 64, "seed": 3, "observables": ["rho11"], "analysis": {"delay": {"t_max": 2, "samples": 20}}})");
    const OutputRecord a = run_scenario(c, 1);
    const OutputRecord b = run_scenario(c, 3);
    REQUIRE(a.tables.count("csv"));
    CHECK(a.tables.at("csv").rfind("t,rho11_mean,rho11_stderr,rho11_oracle\n", 0) == 0);
    CHECK(a.tables == b.tables);
    CHECK(a.summary["analytics"]["delay"]["closed_form_sup_error"].get<double>() < 1e-6);
    CHECK_FALSE(a.flagged);
}

TEST_CASE("violated telegraph conditions are flagged or refused") {
    const std::string base = R"({"scenario": "v_system", "parameters": {"omega2": 1.5}, "method": "master",
        "t_max": 1.0, "samples": 10)";
    const OutputRecord r = run_scenario(parse_config(base + "}"), 1);
    CHECK(r.flagged);
    CHECK(r.summary["validity"]["ok"] == false);
    try {
        run_scenario(parse_config(base + R"(, "strict_validity": true})"), 1);
        FAIL("expected a validity error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::validity);
        CHECK(exit_code(e.kind()) == 4);
    }
}

TEST_CASE("dimension cap is configurable") {
    CHECK(contains(config_error(R"({"scenario": "jaynes_cummings"})"), "dimension_cap"));
    const RunConfig c = parse_config(R"({"scenario": "jaynes_cummings", "dimension_cap": 128})");
    CHECK(c.dimension_cap == 128);
    CHECK(default_dimension_cap() == 64);
}
