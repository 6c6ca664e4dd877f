#pragma once

// Iterative logarithmic grid search over the five model parameters. Each
// iteration scores every grid point (per-trace states fitted in closed form),
// recentres the per-parameter log window on the best point, shrinks it, and
// keeps it inside the global bounds. The incumbent is never replaced by a
// worse point, so the loss history is non-increasing.

#include "memstate/fit/clustering.hpp"
#include "memstate/fit/loss.hpp"
#include "memstate/model.hpp"
#include "memstate/trace.hpp"

#include <array>
#include <span>
#include <vector>

namespace memstate::fit {

struct GridSearchConfig {
    std::size_t n_points = 7;
    std::size_t n_iters = 10;
    std::array<double, ModelParams::size> lower{1e-6, 1e-6, 1e-6, 1e-6, 1e-6};
    std::array<double, ModelParams::size> upper{1e2, 1e2, 1e2, 1e2, 1e2};
    double shrink_factor = 0.6;
    // Keep a window's width when its best value sits on an edge that is not
    // a global bound, so the search can walk out of a poor first window.
    bool hold_at_edge = true;
    // Slide the incumbent along the scale direction the state absorbs.
    bool gauge_centre = true;
    unsigned threads = 0;  // 0 = MEMSTATE_THREADS or hardware concurrency

    void validate() const;
};

// log-spaced candidate values, both ends included; n == 1 gives the
// geometric midpoint.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

struct FitResult {
    ModelKind kind = ModelKind::Proposed;
    ModelParams params;
    std::vector<double> states;
    std::vector<double> loss_history;
    Metrics metrics;
    double loss = 0.0;
};

// Traces grouped by current region for streaming through the kernels.
class RegionedDataset {
public:
    RegionedDataset(std::span<const Trace> traces, const RegionPartition& part);

    std::size_t trace_count() const { return traces_.size(); }
    std::size_t region_count() const { return centroids_.size(); }

    struct Segment {
        std::size_t region;
        std::vector<double> v;
        std::vector<double> i;
    };
    const std::vector<Segment>& segments(std::size_t trace) const { return traces_[trace]; }
    double centroid(std::size_t region) const { return centroids_[region]; }

private:
    std::vector<std::vector<Segment>> traces_;
    std::vector<double> centroids_;
};

struct CandidateScore {
    double loss = 0.0;
    std::vector<double> states;
};

// Dataset loss of one parameter point; non-finite when any model
// evaluation saturates or overflows.
CandidateScore score_candidate(ModelKind kind, const ModelParams& p, const RegionedDataset& data,
                               const LossConfig& loss);

// Clusters all observed currents once, then searches.
FitResult grid_search(std::span<const Trace> dataset, ModelKind kind,
                      const GridSearchConfig& cfg = {}, const LossConfig& loss = {});

// Per-trace predictions with fitted states; metrics averaged over traces
// using a partition clustered on the given traces' observed currents.
Metrics dataset_metrics(std::span<const Trace> dataset, ModelKind kind, const ModelParams& p,
                        std::span<const double> states, const LossConfig& loss);

std::vector<double> predict(ModelKind kind, const ModelParams& p, double x,
                            std::span<const double> v);

} // namespace memstate::fit
