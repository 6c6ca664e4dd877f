#include "memstate/synth.hpp"

#include "memstate/errors.hpp"
#include "memstate/signal_prep.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace memstate::synth {

std::string_view to_string(WaveformKind k) {
    switch (k) {
    case WaveformKind::Read: return "read";
    case WaveformKind::Set: return "set";
    case WaveformKind::Reset: return "reset";
    }
    return "unknown";
}

WaveformKind parse_waveform_kind(std::string_view name) {
    if (name == "read") return WaveformKind::Read;
    if (name == "set") return WaveformKind::Set;
    if (name == "reset") return WaveformKind::Reset;
    throw ValidationError("unknown waveform kind '" + std::string(name) + "'");
}

WaveformSpec WaveformSpec::read(double amplitude, std::size_t n_cycles) {
    WaveformSpec s;
    s.amplitude = amplitude;
    s.n_cycles = n_cycles;
    return s;
}

WaveformSpec WaveformSpec::set(double amplitude) {
    WaveformSpec s;
    s.kind = WaveformKind::Set;
    s.amplitude = amplitude;
    s.edge_fraction = 0.09;
    s.n_cycles = 1;
    return s;
}

WaveformSpec WaveformSpec::reset(double amplitude) {
    WaveformSpec s;
    s.kind = WaveformKind::Reset;
    s.amplitude = amplitude;
    s.edge_fraction = 0.16;
    s.n_cycles = 1;
    return s;
}

void WaveformSpec::validate() const {
    if (amplitude == 0.0 || !std::isfinite(amplitude)) {
        throw ValidationError("waveform amplitude must be non-zero");
    }
    if (!(period > 0.0)) throw ValidationError("waveform period must be positive");
    if (!(edge_fraction >= 0.0 && edge_fraction < 0.5)) {
        throw ValidationError("edge_fraction must lie in [0, 0.5)");
    }
    if (samples_per_period < 8) throw ValidationError("samples_per_period must be at least 8");
    if (n_cycles < 1) throw ValidationError("n_cycles must be at least 1");
}

std::vector<double> gen_waveform(const WaveformSpec& spec) {
    spec.validate();
    const std::size_t n = spec.samples_per_period;
    std::vector<double> one(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double phase = static_cast<double>(k) / static_cast<double>(n);
        double shape;
        if (spec.kind == WaveformKind::Read) {
            if (phase < 0.25) shape = 4.0 * phase;
            else if (phase < 0.75) shape = 2.0 - 4.0 * phase;
            else shape = 4.0 * phase - 4.0;
        } else {
            const double e = spec.edge_fraction;
            if (e > 0.0 && phase < e) shape = phase / e;
            else if (e > 0.0 && phase > 1.0 - e) shape = (1.0 - phase) / e;
            else shape = 1.0;
        }
        one[k] = spec.amplitude * shape;
    }
    std::vector<double> out;
    out.reserve(n * spec.n_cycles);
    for (std::size_t c = 0; c < spec.n_cycles; ++c) out.insert(out.end(), one.begin(), one.end());
    return out;
}

void SynthConfig::validate() const {
    validate_for(kind, params);
    noise.validate();
    for (const auto& e : state_schedule) {
        if (!std::isfinite(e.x) || e.x < 0.0) throw ValidationError("schedule states must be >= 0");
    }
}

std::uint64_t trace_seed(std::uint64_t seed, std::size_t trace_index) {
    // splitmix64 finaliser over the combined key.
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(trace_index) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

CircuitPoint solve_series_circuit(ModelKind kind, const ModelParams& p, double x, double r_series,
                                  double v_applied) {
    const StateValue state(x);
    auto residual = [&](double v) {
        return v + r_series * forward_current(kind, p, state, v) - v_applied;
    };
    double lo = -std::abs(v_applied);
    double hi = std::abs(v_applied);
    double f_lo = residual(lo);
    double f_hi = residual(hi);
    if (f_lo > 0.0 || f_hi < 0.0) throw NumericalError("circuit solve failed");

    // Bisect until the bracket is two adjacent doubles.
    for (int it = 0; it < 2200; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        const double f_mid = residual(mid);
        if (f_mid == 0.0) {
            lo = hi = mid;
            f_lo = f_hi = 0.0;
            break;
        }
        if (f_mid < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    const double v = std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
    return {v, forward_current(kind, p, state, v)};
}

namespace {

const ScheduleEntry& find_entry(const SynthConfig& cfg, std::size_t trace_index) {
    for (const auto& e : cfg.state_schedule) {
        if (e.index == trace_index) return e;
    }
    throw ValidationError("no schedule entry for trace " + std::to_string(trace_index));
}

} // namespace

SimulatedCapture simulate_capture(const SynthConfig& cfg, const WaveformSpec& spec,
                                  std::size_t trace_index) {
    cfg.validate();
    if (spec.kind != WaveformKind::Read) {
        throw ValidationError("captures are simulated for READ waveforms only");
    }
    const ScheduleEntry& entry = find_entry(cfg, trace_index);
    WaveformSpec ws = spec;
    if (entry.amplitude) ws.amplitude = *entry.amplitude;
    const std::vector<double> wave = gen_waveform(ws);
    const std::size_t n = ws.samples_per_period;
    const double r = cfg.noise.r_series;

    std::mt19937_64 rng(trace_seed(cfg.generator_seed, trace_index));
    std::normal_distribution<double> gauss(0.0, 1.0);

    SimulatedCapture out;
    out.capture.r_series = r;
    out.capture.n_period = n;
    out.capture.sample_rate = static_cast<double>(n) / ws.period;
    out.capture.samples.reserve(wave.size());
    out.v_mem.reserve(wave.size());
    out.i_mem.reserve(wave.size());

    const double t0 = entry.t_start.value_or(0.0);
    const std::size_t lead = cfg.lead_samples % n;
    for (std::size_t k = 0; k < wave.size(); ++k) {
        const double v_applied = wave[(k + wave.size() - lead) % wave.size()];
        const CircuitPoint pt = solve_series_circuit(cfg.kind, cfg.params, entry.x, r, v_applied);
        const double noise = cfg.noise.sigma_n > 0.0 ? cfg.noise.sigma_n * gauss(rng) : 0.0;
        const double series_offset = cfg.i_offset_inject * r;
        CaptureSample s;
        s.t = t0 + static_cast<double>(k) / out.capture.sample_rate;
        s.v_total = v_applied + cfg.v_offset_inject + series_offset + noise;
        s.v_series = r * pt.i + series_offset + noise;
        out.capture.samples.push_back(s);
        out.v_mem.push_back(pt.v_mem);
        out.i_mem.push_back(pt.i);
    }
    return out;
}

std::vector<SimulatedCapture> simulate_schedule(const SynthConfig& cfg, const WaveformSpec& spec) {
    std::vector<SimulatedCapture> out;
    out.reserve(cfg.state_schedule.size());
    for (const auto& e : cfg.state_schedule) out.push_back(simulate_capture(cfg, spec, e.index));
    return out;
}

Trace heldout_trace(ModelKind kind, const ModelParams& p, double x, double amplitude,
                    std::size_t samples) {
    Trace tr;
    tr.n_period = samples;
    const StateValue state(x);
    for (std::size_t k = 0; k < samples; ++k) {
        const double phase = (static_cast<double>(k) + 0.5) / static_cast<double>(samples);
        double shape;
        if (phase < 0.25) shape = 4.0 * phase;
        else if (phase < 0.75) shape = 2.0 - 4.0 * phase;
        else shape = 4.0 * phase - 4.0;
        const double v = amplitude * shape;
        tr.v.push_back(v);
        tr.i.push_back(forward_current(kind, p, state, v));
    }
    return tr;
}

RecoveryReport recovery_benchmark(const SynthConfig& cfg, const WaveformSpec& spec,
                                  const fit::GridSearchConfig& grid, const fit::LossConfig& loss) {
    if (cfg.state_schedule.size() < 2) {
        throw ValidationError("recovery benchmark needs at least two scheduled states");
    }
    RecoveryReport report;
    std::vector<Trace> traces;
    for (const auto& sim : simulate_schedule(cfg, spec)) {
        traces.push_back(prep::preprocess(sim.capture).trace);
    }
    for (const auto& e : cfg.state_schedule) report.true_states.push_back(e.x);

    report.fit = fit::grid_search(traces, cfg.kind, grid, loss);

    const auto truth = cfg.params.as_array();
    const auto got = report.fit.params.as_array();
    for (std::size_t d = 0; d < ModelParams::size; ++d) {
        report.param_rel_error.push_back(std::abs(got[d] - truth[d]) / truth[d]);
    }

    std::vector<Trace> heldout;
    for (std::size_t t = 0; t < traces.size(); ++t) {
        double v_max = 0.0;
        for (double v : traces[t].v) v_max = std::max(v_max, std::abs(v));
        heldout.push_back(heldout_trace(cfg.kind, cfg.params, report.true_states[t], 0.9 * v_max));
    }
    report.heldout_metrics =
        fit::dataset_metrics(heldout, cfg.kind, report.fit.params, report.fit.states, loss);
    report.heldout_mre = report.heldout_metrics.at("mre");

    estimate::EstimateConfig ecfg;
    ecfg.kind = cfg.kind;
    for (std::size_t t = 0; t < traces.size(); ++t) {
        const auto est = estimate::estimate_state(traces[t], cfg.params, cfg.noise, ecfg);
        report.estimated_states.push_back(est.x_hat);
        report.estimate_std.push_back(est.std_estimate);
        report.state_abs_error.push_back(std::abs(est.x_hat - report.true_states[t]));
    }
    return report;
}

} // namespace memstate::synth
