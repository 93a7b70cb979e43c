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

#include "qtraj/config.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "qtraj/diffusion.hpp"
#include "qtraj/jump.hpp"
#include "qtraj/lindblad.hpp"
#include "qtraj/models.hpp"
#include "qtraj/parallel.hpp"
#include "qtraj/rate_equations.hpp"
#include "qtraj/rng.hpp"
#include "qtraj/spectra.hpp"
#include "qtraj/stats.hpp"

namespace qtraj {

using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::config, path + ": " + what);
}

class ScopedCap {
public:
    explicit ScopedCap(int cap) : old_(default_dimension_cap()) { set_default_dimension_cap(cap); }
    ~ScopedCap() { set_default_dimension_cap(old_); }
    ScopedCap(const ScopedCap&) = delete;
    ScopedCap& operator=(const ScopedCap&) = delete;

private:
    int old_;
};

// Reads keys of one JSON object, remembering which were used so the rest
// can be rejected.
class Reader {
public:
    Reader(const ojson& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    double number(const std::string& key, double def) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_number()) fail(at(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(at(key), "must be finite");
        return d;
    }

    double positive(const std::string& key, double def) {
        const double d = number(key, def);
        if (!(d > 0)) fail(at(key), "must be > 0");
        return d;
    }

    long long integer(const std::string& key, long long def, long long lo) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) fail(at(key), "expected an integer");
        const long long i = v.get<long long>();
        if (i < lo) fail(at(key), "must be >= " + std::to_string(lo));
        return i;
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_number_unsigned()) fail(at(key), "expected a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool def) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) fail(at(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& def) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_string()) fail(at(key), "expected a string");
        return v.get<std::string>();
    }

    const ojson& object(const std::string& key) {
        seen_.insert(key);
        const auto& v = j_.at(key);
        if (!v.is_object()) fail(at(key), "expected an object");
        return v;
    }

    const ojson& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
    }

private:
    const ojson& j_;
    std::string path_;
    std::set<std::string> seen_;
};

SpectrumBlock parse_spectrum(const ojson& j, const std::string& path, bool conditional) {
    Reader r(j, path);
    SpectrumBlock b;
    b.burn_in = r.number("burn_in", b.burn_in);
    if (b.burn_in < 0) fail(r.at("burn_in"), "must be >= 0");
    b.window = r.positive("window", b.window);
    b.dt = r.positive("dt", b.dt);
    b.omega_min = r.number("omega_min", b.omega_min);
    b.omega_max = r.number("omega_max", b.omega_max);
    b.points = static_cast<int>(r.integer("points", b.points, 1));
    b.channel = static_cast<int>(r.integer("channel", b.channel, 0));
    if (b.points > 1 && !(b.omega_max > b.omega_min)) fail(r.at("omega_max"), "must exceed omega_min");
    if (conditional) {
        b.T0 = r.positive("T0", b.T0);
        b.open_rate = r.number("open_rate", b.open_rate);
        GateConfig g{b.T0, b.open_rate};
        try {
            g.validate();
        } catch (const Error& e) {
            fail(path, e.what());
        }
    }
    r.finish();
    return b;
}

std::vector<double> spectrum_grid(const SpectrumBlock& b) {
    std::vector<double> w;
    for (int k = 0; k < b.points; ++k)
        w.push_back(b.points == 1 ? b.omega_min : b.omega_min + (b.omega_max - b.omega_min) * k / (b.points - 1));
    return w;
}

SpectrumConfig spectrum_config(const SpectrumBlock& b, const RunConfig& c, int threads) {
    SpectrumConfig s;
    s.burn_in = b.burn_in;
    s.window = b.window;
    s.dt = b.dt;
    s.trajectories = c.trajectories;
    s.seed = c.seed;
    s.threads = threads;
    s.channel = b.channel;
    return s;
}

class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
    void row(const std::vector<double>& values) { rows_.push_back(values); }
    std::string str() const {
        std::string out;
        for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
        out += "\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_double(r[i]);
            out += "\n";
        }
        return out;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

Order order_of(const std::string& method) {
    if (method == "jump2") return Order::second;
    if (method == "jump4") return Order::fourth;
    return Order::first;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::numerical: return 3;
        case ErrorKind::validity: return 4;
        default: return 2;
    }
}

RunConfig parse_config(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::config, std::string("<root>: invalid JSON: ") + e.what());
    }
    Reader r(j, "");
    RunConfig c;
    c.schema_version = static_cast<int>(r.integer("schema_version", kSchemaVersion, 1));
    if (c.schema_version != kSchemaVersion)
        fail("schema_version", "unsupported version " + std::to_string(c.schema_version) + " (expected " +
                                   std::to_string(kSchemaVersion) + ")");
    c.name = r.string("name", c.name);
    if (c.name.empty() || c.name.find('/') != std::string::npos) fail("name", "must be a plain file stem");
    if (!r.has("scenario")) fail("scenario", "required key missing");
    c.scenario = r.string("scenario", "");
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), c.scenario) == names.end())
        fail("scenario", "unknown scenario '" + c.scenario + "'");
    c.parameters = preset_defaults(c.scenario);
    if (r.has("parameters")) {
        const ojson& p = r.object("parameters");
        for (auto it = p.begin(); it != p.end(); ++it) {
            const std::string path = "parameters." + it.key();
            if (!c.parameters.count(it.key())) fail(path, "unknown parameter for " + c.scenario);
            if (!it.value().is_number()) fail(path, "expected a number");
            c.parameters[it.key()] = it.value().get<double>();
        }
    }
    c.method = r.string("method", c.method);
    static const std::set<std::string> methods{"master", "jump", "jump2", "jump4", "qsd", "homodyne"};
    if (!methods.count(c.method)) fail("method", "must be one of master, jump, jump2, jump4, qsd, homodyne");
    c.dt = r.positive("dt", c.dt);
    c.t_max = r.positive("t_max", c.t_max);
    c.samples = static_cast<int>(r.integer("samples", c.samples, 1));
    c.trajectories = static_cast<std::size_t>(r.integer("trajectories", static_cast<long long>(c.trajectories), 1));
    c.seed = r.unsigned_integer("seed", c.seed);
    if (r.has("observables")) {
        const ojson& o = r.raw("observables");
        if (!o.is_array()) fail("observables", "expected a list of names");
        for (std::size_t i = 0; i < o.size(); ++i) {
            if (!o[i].is_string()) fail("observables[" + std::to_string(i) + "]", "expected a string");
            c.observables.push_back(o[i].get<std::string>());
        }
    }
    if (r.has("homodyne")) {
        Reader h(r.object("homodyne"), "homodyne");
        c.homodyne_alpha = h.number("alpha", c.homodyne_alpha);
        c.homodyne_channel = static_cast<int>(h.integer("channel", c.homodyne_channel, 0));
        h.finish();
    }
    if (r.has("qsd")) {
        Reader q(r.object("qsd"), "qsd");
        c.qsd_variant = q.string("variant", c.qsd_variant);
        if (c.qsd_variant != "normalized" && c.qsd_variant != "linear")
            fail("qsd.variant", "must be normalized or linear");
        q.finish();
    }
    if (r.has("detector")) {
        Reader d(r.object("detector"), "detector");
        c.detector.efficiency = d.number("efficiency", c.detector.efficiency);
        c.detector.threshold = d.number("threshold", c.detector.threshold);
        d.finish();
        try {
            c.detector.validate();
        } catch (const Error& e) {
            fail("detector", std::string("violates DetectorConfig invariant: ") + e.what());
        }
    }
    c.strict_validity = r.boolean("strict_validity", c.strict_validity);
    c.dimension_cap = static_cast<int>(r.integer("dimension_cap", c.dimension_cap, 2));
    if (r.has("analysis")) {
        Reader a(r.object("analysis"), "analysis");
        AnalysisConfig& an = c.analysis;
        if (a.has("delay")) {
            Reader d(a.object("delay"), "analysis.delay");
            AnalysisConfig::Delay b;
            b.t_max = d.positive("t_max", b.t_max);
            b.samples = static_cast<int>(d.integer("samples", b.samples, 2));
            d.finish();
            an.delay = b;
        }
        if (a.has("periods")) {
            Reader d(a.object("periods"), "analysis.periods");
            AnalysisConfig::Periods b;
            if (d.has("T0")) b.T0 = d.positive("T0", 1.0);
            b.t_end = d.positive("t_end", b.t_end);
            b.lattice_dt = d.positive("lattice_dt", b.lattice_dt);
            d.finish();
            if (c.scenario != "v_system") fail("analysis.periods", "requires scenario v_system");
            an.periods = b;
        }
        if (a.has("g2")) {
            Reader d(a.object("g2"), "analysis.g2");
            AnalysisConfig::G2 b;
            b.tau_max = d.positive("tau_max", b.tau_max);
            b.samples = static_cast<int>(d.integer("samples", b.samples, 1));
            b.dt = d.positive("dt", b.dt);
            d.finish();
            an.g2 = b;
        }
        if (a.has("spectrum")) an.spectrum = parse_spectrum(a.object("spectrum"), "analysis.spectrum", false);
        if (a.has("conditional-spectrum"))
            an.conditional_spectrum =
                parse_spectrum(a.object("conditional-spectrum"), "analysis.conditional-spectrum", true);
        if (a.has("mandel")) {
            Reader d(a.object("mandel"), "analysis.mandel");
            AnalysisConfig::Mandel b;
            b.A1 = d.number("A1", b.A1);
            b.A2 = d.number("A2", b.A2);
            b.B1W1 = d.number("B1W1", b.B1W1);
            b.B2W2 = d.number("B2W2", b.B2W2);
            b.tau_max = d.positive("tau_max", b.tau_max);
            b.samples = static_cast<int>(d.integer("samples", b.samples, 2));
            d.finish();
            try {
                EinsteinParams{b.A1, b.A2, b.B1W1, b.B2W2}.validate();
            } catch (const Error& e) {
                fail("analysis.mandel", e.what());
            }
            an.mandel = b;
        }
        if (a.has("counting")) {
            Reader d(a.object("counting"), "analysis.counting");
            AnalysisConfig::Counting b;
            b.mode = d.string("mode", b.mode);
            if (b.mode != "two_state" && b.mode != "poisson_zero_excess")
                fail("analysis.counting.mode", "must be two_state or poisson_zero_excess");
            b.T = d.positive("T", b.T);
            b.n_max = static_cast<int>(d.integer("n_max", b.n_max, 0));
            b.gamma1 = d.number("gamma1", b.gamma1);
            b.eta = d.number("eta", b.eta);
            b.H = d.number("H", b.H);
            b.I0 = d.number("I0", b.I0);
            b.zero_excess = d.number("zero_excess", b.zero_excess);
            if (!(b.zero_excess >= 0 && b.zero_excess <= 1))
                fail("analysis.counting.zero_excess", "must lie in [0, 1]");
            d.finish();
            an.counting = b;
        }
        a.finish();
    }
    if (r.has("outputs")) {
        Reader o(r.object("outputs"), "outputs");
        c.out_dir = o.string("dir", c.out_dir);
        c.write_csv = o.boolean("csv", c.write_csv);
        c.write_summary = o.boolean("summary", c.write_summary);
        o.finish();
    }
    r.finish();

    // Build once so parameter errors surface as config errors.
    const ScopedCap cap(c.dimension_cap);
    ModelSpec spec;
    try {
        spec = build_preset(c.scenario, c.parameters);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::validity) throw;
        if (e.kind() == ErrorKind::dimension) fail("dimension_cap", e.what());
        fail("parameters", e.what());
    }
    for (const auto& o : c.observables)
        if (!spec.observables.count(o)) fail("observables", "unknown observable '" + o + "' for " + c.scenario);
    if (c.method == "homodyne" && c.homodyne_channel >= spec.model.channels())
        fail("homodyne.channel", "out of range");
    const long steps = std::lround(c.t_max / c.samples / c.dt);
    if (steps < 1 || std::abs(c.t_max / c.samples / c.dt - steps) > 1e-6 * steps)
        fail("dt", "t_max / samples must be an integer multiple of dt");

    c.echo = j;
    c.echo["schema_version"] = c.schema_version;
    c.echo["name"] = c.name;
    c.echo["method"] = c.method;
    c.echo["dt"] = c.dt;
    c.echo["t_max"] = c.t_max;
    c.echo["samples"] = c.samples;
    c.echo["trajectories"] = c.trajectories;
    c.echo["seed"] = c.seed;
    c.echo["dimension_cap"] = c.dimension_cap;
    ojson params = ojson::object();
    for (const auto& [k, v] : c.parameters) params[k] = v;
    c.echo["parameters"] = params;
    return c;
}

// ---------------------------------------------------------------------------

OutputRecord run_scenario(const RunConfig& c, int threads) {
    threads = resolve_threads(threads);
    const ScopedCap cap(c.dimension_cap);
    const auto wall0 = std::chrono::steady_clock::now();
    const ModelSpec spec = build_preset(c.scenario, c.parameters);
    OutputRecord out;
    ojson& sum = out.summary;
    sum["config"] = c.echo;
    sum["seed"] = c.seed;
    ojson analytics = ojson::object();

    // validity of the telegraph approximations
    std::optional<VSystemParams> vp;
    if (c.scenario == "v_system") {
        const auto& p = c.parameters;
        vp = VSystemParams{p.at("omega1"), p.at("omega2"), p.at("delta1"),
                           p.at("delta2"), p.at("gamma11"), p.at("gamma22")};
        const ValidityResult v = validity_check(*vp);
        sum["validity"] = {{"ok", v.ok}, {"margin_drive", v.margin_drive}, {"margin_decay", v.margin_decay},
                           {"threshold", 0.1}};
        if (!v.ok) {
            if (c.strict_validity)
                throw Error(ErrorKind::validity, "v_system: weak-drive conditions violated (drive margin " +
                                                     format_double(v.margin_drive) + ", decay margin " +
                                                     format_double(v.margin_decay) + ")");
            out.flagged = true;
            sum["warnings"].push_back("telegraph approximation outside its validity range; analytic values flagged");
        }
    }

    // time series
    std::vector<std::string> names = c.observables;
    if (names.empty())
        for (const auto& [k, v] : spec.observables) names.push_back(k);
    std::vector<Operator> ops;
    for (const auto& n : names) ops.push_back(spec.observables.at(n));
    const std::vector<double> grid = uniform_grid(c.t_max, c.samples);
    const DensityMatrix rho0 = projector(normalize(spec.initial).first);
    const auto rhos = master_evolve(spec.model, rho0, grid, std::min(c.dt, 1e-3));
    std::vector<std::vector<double>> oracle(ops.size());
    for (std::size_t o = 0; o < ops.size(); ++o)
        for (const auto& rho : rhos) oracle[o].push_back(expect_rho(ops[o], rho));

    std::vector<std::string> header{"t"};
    for (const auto& n : names) {
        header.push_back(n + "_mean");
        header.push_back(n + "_stderr");
        header.push_back(n + "_oracle");
    }
    Table series(header);
    if (c.method == "master") {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            std::vector<double> row{grid[k]};
            for (std::size_t o = 0; o < ops.size(); ++o) row.insert(row.end(), {oracle[o][k], 0.0, oracle[o][k]});
            series.row(row);
        }
    } else {
        EnsembleResult res;
        if (c.method == "qsd") {
            QsdConfig q;
            q.dt = c.dt;
            q.seed = c.seed;
            q.variant = c.qsd_variant == "linear" ? QsdVariant::linear : QsdVariant::normalized;
            res = qsd_ensemble(spec.model, spec.initial, grid, c.trajectories, q, ops, names, threads);
        } else {
            JumpConfig jc;
            jc.dt = c.dt;
            jc.seed = c.seed;
            jc.order = order_of(c.method);
            const LindbladModel model =
                c.method == "homodyne" ? homodyne_model(spec.model, c.homodyne_alpha, c.homodyne_channel)
                                       : spec.model;
            res = ensemble_average(model, spec.initial, grid, c.trajectories, jc, ops, names, threads);
            if (res.warned) sum["warnings"].push_back("jump probability per step exceeded 0.1; reduce dt");
            sum["mean_jumps"] = res.total_jumps / static_cast<double>(res.n);
        }
        ojson rms = ojson::object();
        for (std::size_t o = 0; o < ops.size(); ++o) rms[names[o]] = rms_diff(res.mean[o], oracle[o]);
        sum["oracle_rms"] = rms;
        sum["oracle_rms_bound"] = 3.0 / std::sqrt(static_cast<double>(c.trajectories));
        for (std::size_t k = 0; k < grid.size(); ++k) {
            std::vector<double> row{grid[k]};
            for (std::size_t o = 0; o < ops.size(); ++o)
                row.insert(row.end(), {res.mean[o][k], res.stderr_[o][k], oracle[o][k]});
            series.row(row);
        }
    }
    out.tables["csv"] = series.str();

    const AnalysisConfig& an = c.analysis;
    const bool atom = c.scenario == "driven_tls";
    auto tls = [&](const char* k) { return c.parameters.at(k); };

    if (an.delay) {
        const auto tg = uniform_grid(an.delay->t_max, an.delay->samples);
        const DelayCurve curve = delay_function(spec.model, spec.initial, tg);
        std::vector<double> i1;
        try {
            i1 = next_photon_density(curve);
        } catch (const Error&) {
            i1.assign(tg.size(), std::nan(""));
        }
        std::vector<std::string> h{"t", "P0", "I1"};
        if (atom) h.push_back("P0_closed_form");
        const bool beta = c.detector.efficiency < 1.0;
        BetaEvolution be;
        if (beta) {
            h.insert(h.end(), {"survival_beta", "rate_beta"});
            be = conditional_beta_evolution(spec.model, rho0, c.detector.efficiency, tg);
        }
        Table t(h);
        double sup = 0;
        for (std::size_t k = 0; k < tg.size(); ++k) {
            std::vector<double> row{tg[k], curve.p0[k], i1[k]};
            if (atom) {
                const double cf = tls_delay_closed_form(tls("omega"), tls("delta"), tls("gamma"), tg[k]);
                sup = std::max(sup, std::abs(cf - curve.p0[k]));
                row.push_back(cf);
            }
            if (beta) row.insert(row.end(), {be.survival[k], be.rate[k]});
            t.row(row);
        }
        out.tables["delay.csv"] = t.str();
        ojson d = {{"samples", tg.size()}};
        if (atom) d["closed_form_sup_error"] = sup;
        analytics["delay"] = d;
    }

    if (an.periods) {
        const double T0 = an.periods->T0.value_or(c.detector.threshold);
        const std::size_t n = c.trajectories;
        std::vector<std::vector<Period>> per(n);
        parallel_for(n, threads, [&](std::size_t i) {
            Rng rng(c.seed, i);
            const auto jumps = sample_jump_record(spec.model, spec.initial, an.periods->t_end, rng,
                                                  an.periods->lattice_dt);
            per[i] = classify_periods(jumps, T0);
        });
        std::vector<Period> all;
        Table t({"trajectory", "dark", "start", "length"});
        for (std::size_t i = 0; i < n; ++i)
            for (const auto& p : per[i]) {
                all.push_back(p);
                t.row({static_cast<double>(i), p.kind == PeriodKind::dark ? 1.0 : 0.0, p.start, p.length});
            }
        out.tables["periods.csv"] = t.str();
        const PeriodSummary s = summarize_periods(all, T0);
        const PeriodStats a = vsystem_periods(*vp, out.flagged ? std::numeric_limits<double>::infinity() : 0.1);
        analytics["periods"] = {{"T0", T0},
                                {"n_dark", s.n_dark},
                                {"n_bright", s.n_bright},
                                {"T_D_analytic", a.T_D},
                                {"T_L_analytic", a.T_L},
                                {"T_D_empirical", s.T_D},
                                {"T_L_empirical", s.T_L},
                                {"T_D_ratio", s.T_D / a.T_D},
                                {"T_L_ratio", s.T_L / a.T_L},
                                {"flagged", out.flagged}};
    }

    if (an.g2) {
        const auto tg = uniform_grid(an.g2->tau_max, an.g2->samples);
        const auto g = master_g2(spec.model, tg, an.g2->dt);
        std::vector<std::string> h{"tau", "g2"};
        if (atom && tls("delta") == 0.0) h.push_back("g2_closed_form");
        Table t(h);
        double sup = 0;
        for (std::size_t k = 0; k < tg.size(); ++k) {
            std::vector<double> row{tg[k], g[k]};
            if (h.size() == 3) {
                const double cf = tls_g2_closed_form(tls("omega"), tls("gamma"), tg[k]);
                sup = std::max(sup, std::abs(cf - g[k]));
                row.push_back(cf);
            }
            t.row(row);
        }
        out.tables["g2.csv"] = t.str();
        ojson d = {{"g2_0", g.front()}};
        if (h.size() == 3) d["closed_form_sup_error"] = sup;
        analytics["g2"] = d;
    }

    if (an.spectrum) {
        const auto w = spectrum_grid(*an.spectrum);
        const SpectrumConfig sc = spectrum_config(*an.spectrum, c, threads);
        const SpectrumCurve s = spectrum_estimate(spec.model, spec.initial, w, sc);
        const auto coh = coherent_spectrum_part(spec.model, spec.initial, w, sc);
        Table t({"omega", "S", "S_stderr", "S_coherent"});
        for (std::size_t k = 0; k < w.size(); ++k) t.row({w[k], s.values[k], s.stderr_[k], coh[k]});
        out.tables["spectrum.csv"] = t.str();
        ojson d = {{"resolution", s.resolution}, {"resolution_over_2pi", 1.0 / sc.window}, {"flux", s.flux}};
        if (atom) {
            const TlsSpectrum a{tls("omega"), tls("delta"), tls("gamma")};
            d["coherent_weight_analytic"] = a.coherent_weight();
        }
        analytics["spectrum"] = d;
    }

    if (an.conditional_spectrum) {
        const auto w = spectrum_grid(*an.conditional_spectrum);
        const SpectrumConfig sc = spectrum_config(*an.conditional_spectrum, c, threads);
        const GateConfig gate{an.conditional_spectrum->T0, an.conditional_spectrum->open_rate};
        const ConditionalSpectrum s = conditional_spectrum(spec.model, spec.initial, gate, w, sc);
        Table t({"omega", "S", "S_stderr", "S_conditional", "S_conditional_stderr"});
        for (std::size_t k = 0; k < w.size(); ++k)
            t.row({w[k], s.unconditional.values[k], s.unconditional.stderr_[k], s.conditional.values[k],
                   s.conditional.stderr_[k]});
        out.tables["conditional_spectrum.csv"] = t.str();
        analytics["conditional_spectrum"] = {{"T0", gate.T0},
                                             {"open_fraction", s.open_fraction},
                                             {"flux", s.unconditional.flux},
                                             {"flux_conditional", s.conditional.flux},
                                             {"resolution", s.unconditional.resolution}};
        if (vp) {
            const VSystemSpectrum a =
                vsystem_analytic_spectrum(*vp, out.flagged ? std::numeric_limits<double>::infinity() : 0.1);
            analytics["conditional_spectrum"]["Gamma_p_analytic"] = a.Gamma_p;
            analytics["conditional_spectrum"]["A_p_analytic"] = a.A_p;
        }
    }

    if (an.mandel) {
        const auto& m = *an.mandel;
        const EinsteinParams p{m.A1, m.A2, m.B1W1, m.B2W2};
        const auto tg = uniform_grid(m.tau_max, m.samples);
        const double h = tg[1] - tg[0];
        const auto g = g2_rate_regression(p, tg, std::min(h, 1e-2));
        const double intensity = m.A1 * rate_steady_state(p).p1;
        const auto q = mandel_q(g, h, intensity);
        Table t({"tau", "g2", "Q"});
        for (std::size_t k = 0; k < tg.size(); ++k) t.row({tg[k], g[k], q[k]});
        out.tables["mandel.csv"] = t.str();
        const double qi = mandel_q_infinity(g, h, intensity);
        ojson d = {{"Q_infinity", qi}, {"intensity", intensity}, {"shelving_regime", p.shelving()}};
        try {
            const TelegraphEstimates e = telegraph_estimates(p);
            const double pred = e.T_D * e.T_D / e.T_B * intensity;
            d["T_B"] = e.T_B;
            d["T_D"] = e.T_D;
            d["Q_prediction"] = pred;
            d["Q_ratio"] = qi / pred;
        } catch (const Error&) {
            d["Q_prediction"] = nullptr;
        }
        analytics["mandel"] = d;
    }

    if (an.counting) {
        const auto& b = *an.counting;
        CountingModel m;
        m.mode = b.mode == "two_state" ? CountingMode::two_state : CountingMode::poisson_zero_excess;
        m.gamma1 = b.gamma1;
        m.eta = b.eta;
        m.H = b.H;
        m.I0 = b.I0;
        m.zero_excess = b.zero_excess;
        Table t({"n", "P"});
        double total = 0;
        for (int n = 0; n <= b.n_max; ++n) {
            const double pn = counting_distribution(n, b.T, m);
            total += pn;
            t.row({static_cast<double>(n), pn});
        }
        out.tables["counting.csv"] = t.str();
        analytics["counting"] = {{"mean", m.mean(b.T)}, {"mass_up_to_n_max", total}};
    }

    sum["analytics"] = analytics;
    sum["flagged"] = out.flagged;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    sum["timing"] = {{"wall_seconds", wall}, {"threads", threads}};
    return out;
}

std::vector<std::string> write_outputs(const RunConfig& c, const OutputRecord& rec, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    auto put = [&](const std::string& file, const std::string& body) {
        const std::string path = (std::filesystem::path(dir) / file).string();
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error(ErrorKind::config, "cannot write " + path);
        f << body;
        written.push_back(path);
    };
    if (c.write_csv)
        for (const auto& [suffix, body] : rec.tables) put(c.name + "." + suffix, body);
    if (c.write_summary) put(c.name + ".summary.json", rec.summary.dump(2) + "\n");
    return written;
}

}  // namespace qtraj
