#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace memstate {

struct CaptureSample {
    double t = 0.0;
    double v_total = 0.0;
    double v_series = 0.0;

    friend bool operator==(const CaptureSample&, const CaptureSample&) = default;
};

// Two-channel capture of the memristor + series-resistor circuit.
struct RawCapture {
    std::vector<CaptureSample> samples;
    double r_series = 0.0;      // ohms
    std::size_t n_period = 0;   // samples per waveform period
    double sample_rate = 0.0;   // samples per second

    // Throws ValidationError: r_series > 0, n_period >= 8, len >= n_period,
    // timestamps strictly increasing and uniform to 1 part in 1e6.
    void validate() const;
};

struct TraceMeta {
    std::optional<double> r_series;      // ohms; enables the mean-voltage offset step
    std::optional<double> sample_rate;   // Hz
    std::optional<double> amplitude;     // volts, applied READ amplitude
    std::optional<double> t_start;       // seconds, for drift series
    std::optional<std::size_t> n_discard;
    std::string label;

    friend bool operator==(const TraceMeta&, const TraceMeta&) = default;
};

// Memristor voltage/current pairs for one device state, stored as parallel
// arrays so the kernels can stream them.
struct Trace {
    std::vector<double> v;  // volts
    std::vector<double> i;  // amperes
    std::size_t n_period = 0;
    TraceMeta meta;

    std::size_t size() const { return v.size(); }
    bool empty() const { return v.empty(); }

    // Throws ValidationError on length mismatch or non-finite values.
    void validate() const;
};

} // namespace memstate
