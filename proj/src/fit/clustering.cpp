#include "memstate/fit/clustering.hpp"

#include "memstate/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace memstate::fit {

namespace {

// Prefix sums over weighted, sorted, distinct values. Values are shifted by
// their median before summing to limit cancellation in the variance form.
class WeightedPrefix {
public:
    WeightedPrefix(const std::vector<double>& values, const std::vector<double>& weights) {
        const std::size_t m = values.size();
        shift_ = values[m / 2];
        w_.assign(m + 1, 0.0);
        s1_.assign(m + 1, 0.0);
        s2_.assign(m + 1, 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            const double d = values[k] - shift_;
            w_[k + 1] = w_[k] + weights[k];
            s1_[k + 1] = s1_[k] + weights[k] * d;
            s2_[k + 1] = s2_[k] + weights[k] * d * d;
        }
    }

    // Sum of squared deviations for distinct values [a, b] inclusive.
    double cost(std::size_t a, std::size_t b) const {
        const double w = w_[b + 1] - w_[a];
        const double s1 = s1_[b + 1] - s1_[a];
        const double s2 = s2_[b + 1] - s2_[a];
        return std::max(0.0, s2 - s1 * s1 / w);
    }

private:
    double shift_ = 0.0;
    std::vector<double> w_, s1_, s2_;
};

// Optimal contiguous k-partition of the sorted distinct values. Layer c uses
// divide and conquer on the monotone split point (the interval cost is
// Monge), O(k m log m).
std::vector<std::size_t> optimal_starts(const WeightedPrefix& prefix, std::size_t m,
                                        std::size_t k) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> cost(k, std::vector<double>(m, inf));
    std::vector<std::vector<std::size_t>> split(k, std::vector<std::size_t>(m, 0));
    for (std::size_t j = 0; j < m; ++j) cost[0][j] = prefix.cost(0, j);

    for (std::size_t c = 1; c < k; ++c) {
        auto solve = [&](auto&& self, std::size_t jlo, std::size_t jhi, std::size_t olo,
                         std::size_t ohi) -> void {
            if (jlo > jhi) return;
            const std::size_t j = jlo + (jhi - jlo) / 2;
            double best = inf;
            std::size_t arg = std::max(olo, c);
            for (std::size_t s = std::max(olo, c); s <= std::min(ohi, j); ++s) {
                const double v = cost[c - 1][s - 1] + prefix.cost(s, j);
                if (v < best) {
                    best = v;
                    arg = s;
                }
            }
            cost[c][j] = best;
            split[c][j] = arg;
            if (j > jlo) self(self, jlo, j - 1, olo, arg);
            self(self, j + 1, jhi, arg, ohi);
        };
        solve(solve, c, m - 1, c, m - 1);
    }

    std::vector<std::size_t> starts(k, 0);
    std::size_t end = m - 1;
    for (std::size_t c = k; c-- > 1;) {
        starts[c] = split[c][end];
        end = starts[c] - 1;
    }
    return starts;
}

} // namespace

std::size_t RegionPartition::assign(double current) const {
    const double mag = std::abs(current);
    std::size_t best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < regions.size(); ++r) {
        const double d = std::abs(mag - regions[r].centroid);
        if (d < dist) {
            dist = d;
            best = r;
        }
    }
    return best;
}

RegionPartition RegionPartition::relabel(std::span<const double> currents) const {
    RegionPartition out;
    out.requested_k = requested_k;
    out.k_reduced = k_reduced;
    out.regions.resize(regions.size());
    for (std::size_t r = 0; r < regions.size(); ++r) out.regions[r].centroid = regions[r].centroid;
    out.labels.resize(currents.size());
    for (std::size_t s = 0; s < currents.size(); ++s) {
        out.labels[s] = assign(currents[s]);
        out.regions[out.labels[s]].members.push_back(s);
    }
    return out;
}

RegionPartition cluster_currents(std::span<const double> currents, std::size_t k) {
    if (k == 0) throw ValidationError("k must be at least 1");
    if (currents.size() < k) throw ValidationError("fewer samples than regions");

    std::vector<std::size_t> order(currents.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> mags(currents.size());
    for (std::size_t s = 0; s < currents.size(); ++s) {
        mags[s] = std::abs(currents[s]);
        if (!std::isfinite(mags[s])) throw ValidationError("non-finite current");
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return mags[a] < mags[b]; });

    std::vector<double> values;
    std::vector<double> weights;
    std::vector<std::size_t> distinct_of(currents.size());
    for (std::size_t idx : order) {
        if (values.empty() || mags[idx] != values.back()) {
            values.push_back(mags[idx]);
            weights.push_back(0.0);
        }
        weights.back() += 1.0;
        distinct_of[idx] = values.size() - 1;
    }

    RegionPartition part;
    part.requested_k = k;
    if (values.size() < k) {
        k = values.size();
        part.k_reduced = true;
    }

    const WeightedPrefix prefix(values, weights);
    const std::vector<std::size_t> starts = optimal_starts(prefix, values.size(), k);

    std::vector<std::size_t> region_of_distinct(values.size());
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t end = c + 1 < k ? starts[c + 1] : values.size();
        for (std::size_t d = starts[c]; d < end; ++d) region_of_distinct[d] = c;
    }

    part.regions.resize(k);
    part.labels.resize(currents.size());
    std::vector<double> sums(k, 0.0);
    for (std::size_t s = 0; s < currents.size(); ++s) {
        const std::size_t r = region_of_distinct[distinct_of[s]];
        part.labels[s] = r;
        part.regions[r].members.push_back(s);
        sums[r] += mags[s];
    }
    for (std::size_t r = 0; r < k; ++r) {
        part.regions[r].centroid = sums[r] / static_cast<double>(part.regions[r].members.size());
    }
    return part;
}

double within_cluster_ss(std::span<const double> currents, const RegionPartition& part) {
    double total = 0.0;
    for (const Region& region : part.regions) {
        double mean = 0.0;
        for (std::size_t s : region.members) mean += std::abs(currents[s]);
        mean /= static_cast<double>(region.members.size());
        for (std::size_t s : region.members) {
            const double d = std::abs(currents[s]) - mean;
            total += d * d;
        }
    }
    return total;
}

} // namespace memstate::fit
