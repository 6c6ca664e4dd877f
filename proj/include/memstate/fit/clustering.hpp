#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace memstate::fit {

struct Region {
    double centroid = 0.0;                 // amperes
    std::vector<std::size_t> members;      // indices into the clustered sample set
};

// Current-magnitude regions, ordered by strictly increasing centroid.
struct RegionPartition {
    std::vector<Region> regions;
    std::vector<std::size_t> labels;       // region index per sample
    std::size_t requested_k = 0;
    bool k_reduced = false;                // fewer distinct magnitudes than requested_k

    std::size_t k() const { return regions.size(); }
    // Region whose centroid is nearest to |current|; ties go to the lower region.
    std::size_t assign(double current) const;
    // Re-labels an arbitrary sample set against these centroids.
    RegionPartition relabel(std::span<const double> currents) const;
};

// Optimal 1-D k-means over |currents| (minimum within-cluster sum of
// squares). Equal magnitudes always share a region. When there are fewer
// distinct magnitudes than k, k is reduced and k_reduced is set.
// Throws ValidationError if currents.size() < k or k == 0.
RegionPartition cluster_currents(std::span<const double> currents, std::size_t k);

// Within-cluster sum of squares of |currents| under a partition.
double within_cluster_ss(std::span<const double> currents, const RegionPartition& part);

} // namespace memstate::fit
