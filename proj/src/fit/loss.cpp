#include "memstate/fit/loss.hpp"

#include "memstate/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace memstate::fit {

std::string_view to_string(Shaping s) {
    switch (s) {
    case Shaping::Mse: return "mse";
    case Shaping::Mae: return "mae";
    case Shaping::Mre: return "mre";
    case Shaping::Mrse: return "mrse";
    case Shaping::Square: return "square";
    }
    return "unknown";
}

Shaping parse_shaping(std::string_view name) {
    if (name == "mse") return Shaping::Mse;
    if (name == "mae") return Shaping::Mae;
    if (name == "mre") return Shaping::Mre;
    if (name == "mrse") return Shaping::Mrse;
    if (name == "square") return Shaping::Square;
    throw ValidationError("unknown loss shaping '" + std::string(name) + "'");
}

void LossConfig::validate() const {
    if (k_regions < 1) throw ValidationError("k_regions must be at least 1");
    if (!(epsilon1 > 0.0) || !(epsilon2 > 0.0)) {
        throw ValidationError("loss pedestals must be positive");
    }
}

double shape(Shaping s, double scaled_error, double scaled_ref, const LossConfig& cfg) {
    switch (s) {
    case Shaping::Mse:
    case Shaping::Square: return scaled_error * scaled_error;
    case Shaping::Mae: return scaled_error;
    case Shaping::Mre: return scaled_error / (std::abs(scaled_ref) + cfg.epsilon1);
    case Shaping::Mrse:
        return scaled_error * scaled_error / (scaled_ref * scaled_ref + cfg.epsilon2);
    }
    return 0.0;
}

namespace {

void check_inputs(std::span<const double> predicted, std::span<const double> observed,
                  const RegionPartition& part) {
    if (predicted.size() != observed.size()) {
        throw ValidationError("predicted and observed lengths differ");
    }
    if (part.labels.size() != observed.size()) {
        throw ValidationError("partition does not cover the samples");
    }
}

} // namespace

double region_loss(std::span<const double> predicted, std::span<const double> observed,
                   const RegionPartition& part, const LossConfig& cfg) {
    check_inputs(predicted, observed, part);
    double total = 0.0;
    std::size_t used = 0;
    for (const Region& region : part.regions) {
        if (region.members.empty()) continue;
        const double c = std::abs(region.centroid);
        if (!(c >= kCentroidFloor)) throw NumericalError("degenerate region");
        double sum = 0.0;
        for (std::size_t s : region.members) {
            sum += shape(cfg.shaping, std::abs(predicted[s] - observed[s]) / c, observed[s] / c, cfg);
        }
        total += sum / static_cast<double>(region.members.size());
        ++used;
    }
    if (used == 0) throw ValidationError("partition has no members");
    return total / static_cast<double>(used);
}

double dataset_loss(std::span<const double> per_trace_losses) {
    if (per_trace_losses.empty()) throw ValidationError("dataset loss needs at least one trace");
    return std::accumulate(per_trace_losses.begin(), per_trace_losses.end(), 0.0) /
           static_cast<double>(per_trace_losses.size());
}

Metrics eval_metrics(std::span<const double> predicted, std::span<const double> observed,
                     const RegionPartition& part, const LossConfig& cfg) {
    Metrics out;
    for (Shaping s : {Shaping::Mse, Shaping::Mae, Shaping::Mre, Shaping::Mrse}) {
        LossConfig c = cfg;
        c.shaping = s;
        out[std::string(to_string(s))] = region_loss(predicted, observed, part, c);
    }
    return out;
}

} // namespace memstate::fit
