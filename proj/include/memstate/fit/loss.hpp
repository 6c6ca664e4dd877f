#pragma once

// Region-weighted fitting error: within each current region the absolute
// residual is divided by the region centroid magnitude, shaped by l, and
// averaged; regions are then averaged with equal weight.

#include "memstate/fit/clustering.hpp"

#include <map>
#include <span>
#include <string>
#include <string_view>

namespace memstate::fit {

enum class Shaping { Mse, Mae, Mre, Mrse, Square };

std::string_view to_string(Shaping s);
Shaping parse_shaping(std::string_view name);

struct LossConfig {
    std::size_t k_regions = 8;
    Shaping shaping = Shaping::Square;
    double epsilon1 = 1e-3;   // MRE pedestal
    double epsilon2 = 1e-6;   // MRSE pedestal

    void validate() const;
};

inline constexpr double kCentroidFloor = 1e-15;

// l applied to one scaled sample. `scaled_error` is |pred - obs| / |C|,
// `scaled_ref` is obs / |C|.
double shape(Shaping s, double scaled_error, double scaled_ref, const LossConfig& cfg);

// Mean over non-empty regions of the per-region mean of l. Throws
// NumericalError("degenerate region") when a used centroid is below the floor.
double region_loss(std::span<const double> predicted, std::span<const double> observed,
                   const RegionPartition& part, const LossConfig& cfg);

// Mean of per-trace losses.
double dataset_loss(std::span<const double> per_trace_losses);

// "mse", "mae", "mre", "mrse", each region-scaled.
using Metrics = std::map<std::string, double>;
Metrics eval_metrics(std::span<const double> predicted, std::span<const double> observed,
                     const RegionPartition& part, const LossConfig& cfg);

} // namespace memstate::fit
