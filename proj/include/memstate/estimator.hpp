#pragma once

// Minimum-variance state estimation from noisy READ measurements.
//
// With correlated channel noise N ~ Normal(0, sigma_n^2) on both scope
// channels, the memristor voltage is noise-free and the current carries
// N / R_series. Each sample inverts to x_k = g(v_k, i_k); to first order its
// variance is proportional to g_i(v_k)^2, and the convex weights that
// minimise sum m_k^2 g_i(v_k)^2 are m_k proportional to 1 / g_i(v_k)^2.

#include "memstate/model.hpp"
#include "memstate/trace.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace memstate::estimate {

struct NoiseModel {
    double sigma_n = 0.0;    // volts
    double r_series = 1.0;   // ohms

    void validate() const;
};

enum class Weighting { MinVariance, Uniform };

struct EstimateConfig {
    ModelKind kind = ModelKind::Proposed;
    double exclusion_fraction = 0.3;
    Weighting weighting = Weighting::MinVariance;
    double denominator_floor = kDefaultDenominatorFloor;
};

struct StateEstimate {
    double x_hat = 0.0;
    std::vector<double> weights;               // aligned with included
    std::vector<std::size_t> included;         // sample indices kept after exclusion
    std::vector<double> per_sample;            // x_k, aligned with included
    double variance_proxy = 0.0;               // sum m_k^2 g_i(v_k)^2
    // (sigma_n / R) * sqrt(variance_proxy); proportional, not calibrated.
    double std_estimate = 0.0;
    std::size_t excluded = 0;
};

// d x / d i at v for the given model: 1 / (G_m v + Id(v)) for Proposed,
// 1 / (G_m v) for the GMSS variants.
double current_sensitivity(ModelKind kind, const ModelParams& p, double v,
                           double floor = kDefaultDenominatorFloor);

// g_i(v)^2 (common sigma_n^2 / R^2 factor dropped).
double variance_proxy(const ModelParams& p, double v, ModelKind kind = ModelKind::Proposed);

// m_k = (1/proxy_k) / sum_l (1/proxy_l). Throws ValidationError on an empty,
// non-finite or non-positive proxy set.
std::vector<double> min_variance_weights(std::span<const double> proxies);

// Indices with |v| >= f*max|v| and |i| >= f*max|i| (whole-trace maxima).
std::vector<std::size_t> usable_samples(const Trace& trace, double exclusion_fraction);

// Throws ValidationError("no usable measurements") when exclusion leaves
// nothing.
StateEstimate estimate_state(const Trace& trace, const ModelParams& p, const NoiseModel& noise,
                             const EstimateConfig& cfg = {});

struct DriftPoint {
    double t = 0.0;
    std::optional<StateEstimate> estimate;
    std::string error;   // set when the estimate failed for this entry

    double x_hat() const { return estimate ? estimate->x_hat : 0.0; }
    // Ohm-like readout 1/x_hat.
    double inverse_x_hat() const;
};

// Maps estimate_state over a time-ordered series; failures are recorded per
// entry. t comes from meta.t_start when present, else the series index.
std::vector<DriftPoint> drift_series_estimate(std::span<const Trace> traces, const ModelParams& p,
                                              const NoiseModel& noise,
                                              const EstimateConfig& cfg = {});

} // namespace memstate::estimate
