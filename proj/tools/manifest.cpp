#include "manifest.hpp"

#include "memstate/errors.hpp"
#include "memstate/io.hpp"

#include <cmath>
#include <string>

namespace memstate::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json parse(std::string_view text, std::string_view what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string(what) + ": " + e.what());
    }
}

template <typename T>
T field(const json& j, const char* key, std::string_view what) {
    const auto it = j.find(key);
    if (it == j.end()) throw ValidationError(std::string(what) + ": missing " + key);
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ValidationError(std::string(what) + ": bad type for " + key);
    }
}

template <typename T>
void maybe(const json& j, const char* key, T& out, std::string_view what) {
    if (j.contains(key)) out = field<T>(j, key, what);
}

const json& object(const json& j, const char* key, std::string_view what) {
    const json& o = j.at(key);
    if (!o.is_object()) throw ValidationError(std::string(what) + ": " + key + " must be an object");
    return o;
}

// A bound is one number for every parameter or an array of five.
std::array<double, ModelParams::size> bounds(const json& j, const char* key) {
    std::array<double, ModelParams::size> out{};
    if (j.at(key).is_number()) {
        out.fill(field<double>(j, key, "grid"));
        return out;
    }
    const auto v = field<std::vector<double>>(j, key, "grid");
    if (v.size() != ModelParams::size) {
        throw ValidationError(std::string("grid: ") + key + " needs 5 entries");
    }
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

std::size_t count(const json& j, const char* key, std::string_view what) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number_unsigned()) {
        throw ValidationError(std::string(what) + ": " + key + " must be a non-negative integer");
    }
    return it->get<std::size_t>();
}

void parse_grid(const json& g, fit::GridSearchConfig& cfg) {
    io::check_keys(g,
                   {"n_points", "n_iters", "lower", "upper", "shrink_factor", "hold_at_edge",
                    "gauge_centre", "threads"},
                   "grid");
    if (g.contains("n_points")) cfg.n_points = count(g, "n_points", "grid");
    if (g.contains("n_iters")) cfg.n_iters = count(g, "n_iters", "grid");
    if (g.contains("lower")) cfg.lower = bounds(g, "lower");
    if (g.contains("upper")) cfg.upper = bounds(g, "upper");
    maybe(g, "shrink_factor", cfg.shrink_factor, "grid");
    maybe(g, "hold_at_edge", cfg.hold_at_edge, "grid");
    maybe(g, "gauge_centre", cfg.gauge_centre, "grid");
    if (g.contains("threads")) cfg.threads = static_cast<unsigned>(count(g, "threads", "grid"));
    cfg.validate();
}

void parse_loss(const json& l, fit::LossConfig& cfg) {
    io::check_keys(l, {"k_regions", "shaping", "epsilon1", "epsilon2"}, "loss");
    if (l.contains("k_regions")) cfg.k_regions = count(l, "k_regions", "loss");
    if (l.contains("shaping")) cfg.shaping = fit::parse_shaping(field<std::string>(l, "shaping", "loss"));
    maybe(l, "epsilon1", cfg.epsilon1, "loss");
    maybe(l, "epsilon2", cfg.epsilon2, "loss");
    cfg.validate();
}

estimate::NoiseModel parse_noise(const json& n) {
    io::check_keys(n, {"sigma_n", "r_series"}, "noise");
    estimate::NoiseModel out;
    maybe(n, "sigma_n", out.sigma_n, "noise");
    maybe(n, "r_series", out.r_series, "noise");
    out.validate();
    return out;
}

} // namespace

estimate::Weighting parse_weighting(std::string_view name) {
    if (name == "min_variance") return estimate::Weighting::MinVariance;
    if (name == "uniform") return estimate::Weighting::Uniform;
    throw ValidationError("unknown weighting '" + std::string(name) + "'");
}

std::string_view to_string(estimate::Weighting w) {
    return w == estimate::Weighting::Uniform ? "uniform" : "min_variance";
}

Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
    const json j = parse(text, "manifest");
    io::check_schema(j, true);
    io::check_keys(j, {"schema_version", "traces", "kind", "grid", "loss", "noise", "exclusion", "output"},
                   "manifest");
    Manifest m;
    const auto traces = field<std::vector<std::string>>(j, "traces", "manifest");
    if (traces.empty()) throw ValidationError("manifest: traces must not be empty");
    for (const auto& t : traces) {
        const std::filesystem::path p = base_dir / t;
        if (!std::filesystem::is_regular_file(p)) {
            throw ValidationError("manifest: trace file not found: " + p.string());
        }
        m.traces.push_back(p);
    }
    if (j.contains("kind")) m.kind = parse_model_kind(field<std::string>(j, "kind", "manifest"));
    if (j.contains("grid")) parse_grid(object(j, "grid", "manifest"), m.grid);
    if (j.contains("loss")) parse_loss(object(j, "loss", "manifest"), m.loss);
    if (j.contains("noise")) {
        m.noise = parse_noise(object(j, "noise", "manifest"));
        m.has_noise = true;
    }
    if (j.contains("exclusion")) {
        const json& e = object(j, "exclusion", "manifest");
        io::check_keys(e, {"fraction", "weighting"}, "exclusion");
        maybe(e, "fraction", m.exclusion_fraction, "exclusion");
        if (!(m.exclusion_fraction >= 0.0 && m.exclusion_fraction < 1.0)) {
            throw ValidationError("exclusion: fraction must lie in [0, 1)");
        }
        if (e.contains("weighting")) {
            m.weighting = parse_weighting(field<std::string>(e, "weighting", "exclusion"));
        }
    }
    if (j.contains("output")) m.output = base_dir / field<std::string>(j, "output", "manifest");
    return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
    return parse_manifest(io::read_file(path), path.parent_path());
}

ordered_json manifest_to_json(const Manifest& m, const std::filesystem::path& base_dir) {
    ordered_json j;
    j["schema_version"] = io::kSchemaVersion;
    ordered_json traces = ordered_json::array();
    for (const auto& t : m.traces) traces.push_back(t.lexically_relative(base_dir).generic_string());
    j["traces"] = traces;
    j["kind"] = std::string(to_string(m.kind));
    if (m.has_noise) {
        j["noise"] = {{"sigma_n", m.noise.sigma_n}, {"r_series", m.noise.r_series}};
    }
    if (m.output) j["output"] = m.output->lexically_relative(base_dir).generic_string();
    return j;
}

SynthFile parse_synth_config(std::string_view text) {
    const json j = parse(text, "synth config");
    io::check_schema(j, true);
    io::check_keys(j,
                   {"schema_version", "kind", "params", "waveform", "state_schedule", "noise",
                    "generator_seed", "v_offset_inject", "i_offset_inject", "lead_samples"},
                   "synth config");
    SynthFile out;
    synth::SynthConfig& c = out.config;
    if (j.contains("kind")) c.kind = parse_model_kind(field<std::string>(j, "kind", "synth config"));
    switch (c.kind) {
    case ModelKind::Proposed: c.params = reference::kProposed; break;
    case ModelKind::ModifiedGmss: c.params = reference::kModifiedGmss; break;
    case ModelKind::Gmss:
        // The published GMSS fit has alpha1 != alpha2, which breaks the
        // zero crossing; require explicit parameters instead.
        if (!j.contains("params")) throw ValidationError("synth config: gmss needs explicit params");
        break;
    }
    if (j.contains("params")) c.params = io::params_from_json(j.at("params"));

    if (j.contains("waveform")) {
        const json& w = object(j, "waveform", "synth config");
        io::check_keys(w, {"amplitude", "period", "n_cycles", "samples_per_period"}, "waveform");
        maybe(w, "amplitude", out.waveform.amplitude, "waveform");
        maybe(w, "period", out.waveform.period, "waveform");
        if (w.contains("n_cycles")) out.waveform.n_cycles = count(w, "n_cycles", "waveform");
        if (w.contains("samples_per_period")) {
            out.waveform.samples_per_period = count(w, "samples_per_period", "waveform");
        }
    }
    out.waveform.validate();

    const json& sched = j.at("state_schedule");
    if (!sched.is_array() || sched.empty()) {
        throw ValidationError("synth config: state_schedule must be a non-empty array");
    }
    for (std::size_t k = 0; k < sched.size(); ++k) {
        const json& e = sched[k];
        if (!e.is_object()) throw ValidationError("synth config: schedule entries must be objects");
        io::check_keys(e, {"index", "x", "amplitude", "t_start"}, "schedule entry");
        synth::ScheduleEntry s;
        s.index = e.contains("index") ? count(e, "index", "schedule entry") : k;
        s.x = field<double>(e, "x", "schedule entry");
        if (e.contains("amplitude")) s.amplitude = field<double>(e, "amplitude", "schedule entry");
        if (e.contains("t_start")) s.t_start = field<double>(e, "t_start", "schedule entry");
        for (const auto& prev : c.state_schedule) {
            if (prev.index == s.index) throw ValidationError("synth config: duplicate schedule index");
        }
        c.state_schedule.push_back(s);
    }
    if (j.contains("noise")) c.noise = parse_noise(object(j, "noise", "synth config"));
    if (j.contains("generator_seed")) c.generator_seed = count(j, "generator_seed", "synth config");
    maybe(j, "v_offset_inject", c.v_offset_inject, "synth config");
    maybe(j, "i_offset_inject", c.i_offset_inject, "synth config");
    if (j.contains("lead_samples")) c.lead_samples = count(j, "lead_samples", "synth config");
    c.validate();
    return out;
}

} // namespace memstate::cli
