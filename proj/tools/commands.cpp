#include "commands.hpp"

#include "manifest.hpp"
#include "memstate/errors.hpp"
#include "memstate/fit/state_fit.hpp"
#include "memstate/io.hpp"
#include "memstate/signal_prep.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>

namespace memstate::cli {

using nlohmann::ordered_json;

namespace {

void emit(const std::optional<std::filesystem::path>& path, const std::string& text) {
    if (path) {
        io::write_file(*path, text);
    } else {
        std::cout << text;
        std::cout.flush();
    }
}

std::string pretty(const ordered_json& j) { return j.dump(2) + "\n"; }

// Capture CSVs go through the full pipeline; trace CSVs are taken as
// already prepared.
Trace load_any(const std::filesystem::path& p) {
    if (io::is_trace_csv(p)) return io::load_trace(p);
    Trace t = prep::preprocess(io::load_capture(p)).trace;
    if (t.meta.label.empty()) t.meta.label = p.stem().string();
    return t;
}

fit::FitResult load_fit(const std::filesystem::path& p) {
    try {
        return io::fit_result_from_json(nlohmann::json::parse(io::read_file(p)));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("fit result: " + std::string(e.what()));
    }
}

struct EstimateInputs {
    std::vector<std::filesystem::path> paths;
    std::vector<Trace> traces;
    estimate::NoiseModel noise;
    estimate::EstimateConfig cfg;
};

EstimateInputs gather(const EstimateArgs& a, ModelKind kind) {
    EstimateInputs in;
    in.cfg.kind = kind;
    if (a.manifest) {
        const Manifest m = load_manifest(*a.manifest);
        in.paths = m.traces;
        if (m.has_noise) in.noise = m.noise;
        in.cfg.exclusion_fraction = m.exclusion_fraction;
        in.cfg.weighting = m.weighting;
    }
    in.paths.insert(in.paths.end(), a.traces.begin(), a.traces.end());
    if (in.paths.empty()) throw ValidationError("no trace files given");
    if (a.sigma_n) in.noise.sigma_n = *a.sigma_n;
    if (a.r_series) in.noise.r_series = *a.r_series;
    if (a.exclusion) in.cfg.exclusion_fraction = *a.exclusion;
    if (a.weighting) in.cfg.weighting = parse_weighting(*a.weighting);
    if (!(in.cfg.exclusion_fraction >= 0.0 && in.cfg.exclusion_fraction < 1.0)) {
        throw ValidationError("exclusion fraction must lie in [0, 1)");
    }
    in.noise.validate();
    for (const auto& p : in.paths) in.traces.push_back(load_any(p));
    return in;
}

// The series resistance recorded with a trace wins over the configured one.
estimate::NoiseModel noise_for(const Trace& t, estimate::NoiseModel noise, bool cli_override) {
    if (!cli_override && t.meta.r_series) noise.r_series = *t.meta.r_series;
    return noise;
}

double weight_entropy(const std::vector<double>& w) {
    double h = 0.0;
    for (double m : w) {
        if (m > 0.0) h -= m * std::log(m);
    }
    return h;
}

} // namespace

void run_synth(const SynthArgs& a) {
    const SynthFile sf = parse_synth_config(io::read_file(a.config));
    std::filesystem::create_directories(a.out_dir);
    Manifest m;
    m.kind = sf.config.kind;
    m.noise = sf.config.noise;
    m.has_noise = true;
    for (const auto& entry : sf.config.state_schedule) {
        const auto sim = synth::simulate_capture(sf.config, sf.waveform, entry.index);
        char name[64];
        std::snprintf(name, sizeof(name), "_%03zu.csv", entry.index);
        const std::filesystem::path csv = a.out_dir / (a.prefix + name);
        io::save_capture(csv, sim.capture);
        m.traces.push_back(csv);
    }
    if (a.manifest) {
        const std::filesystem::path base = a.manifest->parent_path();
        io::write_file(*a.manifest, pretty(manifest_to_json(m, base.empty() ? "." : base)));
    }
}

void run_preprocess(const PreprocessArgs& a) {
    prep::PrepResult r;
    if (io::is_trace_csv(a.input)) {
        r = prep::preprocess(io::load_trace(a.input));
    } else {
        r = prep::preprocess(io::load_capture(a.input));
    }
    io::save_trace(a.output, r.trace);
}

void run_fit(const FitArgs& a) {
    const Manifest m = load_manifest(a.manifest);
    std::vector<Trace> traces;
    for (const auto& p : m.traces) traces.push_back(load_any(p));
    const fit::FitResult r = fit::grid_search(traces, m.kind, m.grid, m.loss);
    emit(a.output ? a.output : m.output, pretty(io::fit_result_to_json(r)));
}

void run_estimate(const EstimateArgs& a) {
    const fit::FitResult f = load_fit(a.fit);
    const EstimateInputs in = gather(a, f.kind);
    ordered_json out;
    out["schema_version"] = io::kSchemaVersion;
    out["kind"] = std::string(to_string(f.kind));
    ordered_json list = ordered_json::array();
    for (std::size_t t = 0; t < in.traces.size(); ++t) {
        const auto noise = noise_for(in.traces[t], in.noise, a.r_series.has_value());
        const auto est = estimate::estimate_state(in.traces[t], f.params, noise, in.cfg);
        ordered_json e;
        e["trace"] = in.paths[t].filename().string();
        e["x_hat"] = est.x_hat;
        if (est.x_hat > 0.0) {
            e["inv_x_hat"] = 1.0 / est.x_hat;
        } else {
            e["inv_x_hat"] = nullptr;
        }
        e["std_estimate"] = est.std_estimate;
        const auto [lo, hi] = std::minmax_element(est.weights.begin(), est.weights.end());
        e["weights"] = {{"count", est.weights.size()},
                        {"min", *lo},
                        {"max", *hi},
                        {"entropy", weight_entropy(est.weights)}};
        e["excluded"] = est.excluded;
        list.push_back(e);
    }
    out["estimates"] = list;
    emit(a.output, pretty(out));
}

void run_eval(const EvalArgs& a) {
    const fit::FitResult f = load_fit(a.fit);
    const Trace trace = load_any(a.trace);
    double x;
    std::string source;
    if (a.index) {
        if (*a.index >= f.states.size()) throw ValidationError("trace index out of range");
        x = f.states[*a.index];
        source = "fit_result";
    } else {
        x = fit::fit_state(f.kind, f.params, trace).value();
        source = "refit";
    }
    const std::vector<Trace> one{trace};
    const double states[] = {x};
    const fit::Metrics metrics = fit::dataset_metrics(one, f.kind, f.params, states, {});
    ordered_json out;
    out["schema_version"] = io::kSchemaVersion;
    out["kind"] = std::string(to_string(f.kind));
    out["trace"] = a.trace.filename().string();
    out["state"] = x;
    out["state_source"] = source;
    ordered_json mj = ordered_json::object();
    for (const char* name : {"mse", "mae", "mre", "mrse"}) mj[name] = metrics.at(name);
    out["metrics"] = mj;
    emit(a.output, pretty(out));
}

void run_drift(const EstimateArgs& a) {
    const fit::FitResult f = load_fit(a.fit);
    const EstimateInputs in = gather(a, f.kind);
    // One noise model for the series; take R from the first trace that has it.
    estimate::NoiseModel noise = in.noise;
    if (!a.r_series) {
        for (const auto& t : in.traces) {
            if (t.meta.r_series) {
                noise.r_series = *t.meta.r_series;
                break;
            }
        }
    }
    const auto points = estimate::drift_series_estimate(in.traces, f.params, noise, in.cfg);
    std::string csv = "t,x_hat,inv_x_hat\n";
    for (const auto& p : points) {
        csv += io::format_double(p.t);
        csv += ',';
        if (p.estimate) {
            csv += io::format_double(p.x_hat());
            csv += ',';
            csv += io::format_double(p.inverse_x_hat());
        } else {
            csv += "nan,nan";
        }
        csv += '\n';
    }
    emit(a.output, csv);
}

} // namespace memstate::cli
