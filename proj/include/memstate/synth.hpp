#pragma once

// Synthetic READ captures from known ground truth: waveform generation,
// series-circuit solve, correlated channel noise and injected offsets.

#include "memstate/estimator.hpp"
#include "memstate/fit/grid_search.hpp"
#include "memstate/model.hpp"
#include "memstate/trace.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace memstate::synth {

enum class WaveformKind { Read, Set, Reset };

std::string_view to_string(WaveformKind k);
WaveformKind parse_waveform_kind(std::string_view name);

struct WaveformSpec {
    WaveformKind kind = WaveformKind::Read;
    double amplitude = 0.2;             // volts
    double period = 1e-3;               // seconds
    double edge_fraction = 0.0;         // rise and fall each; square pulses only
    std::size_t n_cycles = 4;
    std::size_t samples_per_period = 160;

    static WaveformSpec read(double amplitude, std::size_t n_cycles = 4);
    static WaveformSpec set(double amplitude);     // edge_fraction 0.09
    static WaveformSpec reset(double amplitude);   // edge_fraction 0.16

    void validate() const;
};

// Read: zero-mean triangle starting at 0 on the rising edge, peak at a
// quarter period. Set/Reset: plateau at `amplitude` with linear ramps over
// the first and last edge_fraction of each period.
std::vector<double> gen_waveform(const WaveformSpec& spec);

struct ScheduleEntry {
    std::size_t index = 0;
    double x = 0.0;
    std::optional<double> amplitude;   // overrides the waveform amplitude
    std::optional<double> t_start;     // seconds, capture start time
};

struct SynthConfig {
    ModelParams params = reference::kProposed;
    ModelKind kind = ModelKind::Proposed;
    std::vector<ScheduleEntry> state_schedule;
    estimate::NoiseModel noise;
    std::uint64_t generator_seed = 1;
    double v_offset_inject = 0.0;   // added to the memristor voltage
    double i_offset_inject = 0.0;   // added to the memristor current
    std::size_t lead_samples = 0;   // trigger misalignment, samples of the previous cycle

    void validate() const;
};

// Seed for one trace, derived from the generator seed and trace index.
std::uint64_t trace_seed(std::uint64_t seed, std::size_t trace_index);

struct CircuitPoint {
    double v_mem = 0.0;
    double i = 0.0;
};

// Solves v_applied = v_mem + R * i(v_mem) by bisection on v_mem to full
// double resolution. Throws NumericalError("circuit solve failed") if the
// bracket does not contain a root.
CircuitPoint solve_series_circuit(ModelKind kind, const ModelParams& p, double x, double r_series,
                                  double v_applied);

struct SimulatedCapture {
    RawCapture capture;
    std::vector<double> v_mem;   // noiseless generating pairs, same sample order
    std::vector<double> i_mem;
};

// Read waveforms only. Noise: one draw N per timestep added to both
// channels.
SimulatedCapture simulate_capture(const SynthConfig& cfg, const WaveformSpec& spec,
                                  std::size_t trace_index);

// All schedule entries in order.
std::vector<SimulatedCapture> simulate_schedule(const SynthConfig& cfg, const WaveformSpec& spec);

struct RecoveryReport {
    fit::FitResult fit;
    std::vector<double> true_states;
    std::vector<double> param_rel_error;     // |fitted - true| / true, per parameter
    double heldout_mre = 0.0;
    fit::Metrics heldout_metrics;
    // Estimator with the generating parameters.
    std::vector<double> estimated_states;
    std::vector<double> estimate_std;
    std::vector<double> state_abs_error;
};

// simulate -> preprocess -> grid_search -> estimate_state, scored on
// noiseless held-out sweeps at the same states.
RecoveryReport recovery_benchmark(const SynthConfig& cfg, const WaveformSpec& spec,
                                  const fit::GridSearchConfig& grid, const fit::LossConfig& loss);

// Noiseless held-out trace for one state: a triangle sweep at `amplitude`
// applied directly to the memristor, offset by half a sample.
Trace heldout_trace(ModelKind kind, const ModelParams& p, double x, double amplitude,
                    std::size_t samples = 160);

} // namespace memstate::synth
