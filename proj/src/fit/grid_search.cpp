#include "memstate/fit/grid_search.hpp"

#include "memstate/errors.hpp"
#include "memstate/fit/state_fit.hpp"
#include "memstate/kernels.hpp"
#include "memstate/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace memstate::fit {

void GridSearchConfig::validate() const {
    if (n_points < 1) throw ValidationError("n_points must be at least 1");
    if (n_iters < 1) throw ValidationError("n_iters must be at least 1");
    if (!(shrink_factor > 0.0 && shrink_factor <= 1.0)) {
        throw ValidationError("shrink_factor must lie in (0, 1]");
    }
    for (std::size_t d = 0; d < ModelParams::size; ++d) {
        if (!(lower[d] > 0.0) || !(upper[d] > lower[d]) || !std::isfinite(upper[d])) {
            throw ValidationError("grid bounds must satisfy 0 < lower < upper");
        }
    }
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    if (n == 1) return {std::pow(10.0, 0.5 * (a + b))};
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(n - 1);
        out[k] = std::pow(10.0, a + t * (b - a));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

RegionedDataset::RegionedDataset(std::span<const Trace> traces, const RegionPartition& part) {
    centroids_.reserve(part.k());
    for (const Region& r : part.regions) centroids_.push_back(r.centroid);

    std::size_t offset = 0;
    traces_.resize(traces.size());
    for (std::size_t t = 0; t < traces.size(); ++t) {
        const Trace& tr = traces[t];
        std::vector<Segment> segs(part.k());
        for (std::size_t r = 0; r < part.k(); ++r) segs[r].region = r;
        for (std::size_t s = 0; s < tr.size(); ++s) {
            Segment& seg = segs[part.labels.at(offset + s)];
            seg.v.push_back(tr.v[s]);
            seg.i.push_back(tr.i[s]);
        }
        offset += tr.size();
        for (auto& seg : segs) {
            if (!seg.v.empty()) traces_[t].push_back(std::move(seg));
        }
    }
    if (offset != part.labels.size()) {
        throw ValidationError("partition does not match the dataset");
    }
}

namespace {

bool quadratic(Shaping s) { return s == Shaping::Square || s == Shaping::Mse; }

} // namespace

CandidateScore score_candidate(ModelKind kind, const ModelParams& p, const RegionedDataset& data,
                               const LossConfig& loss) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    CandidateScore out;
    out.states.resize(data.trace_count());
    std::vector<kernels::Moments> moments;
    std::vector<double> coef;
    std::vector<double> offset;
    double total = 0.0;

    for (std::size_t t = 0; t < data.trace_count(); ++t) {
        const auto& segs = data.segments(t);
        moments.resize(segs.size());
        double saa = 0.0;
        double sar = 0.0;
        for (std::size_t s = 0; s < segs.size(); ++s) {
            moments[s] = kernels::basis_moments(kind, p, segs[s].v, segs[s].i);
            if (moments[s].saturated > 0) {
                out.loss = inf;
                return out;
            }
            saa += moments[s].saa;
            sar += moments[s].sar;
        }
        const double x = closed_form_state(saa, sar);
        out.states[t] = x;

        double trace_loss = 0.0;
        for (std::size_t s = 0; s < segs.size(); ++s) {
            const double c = std::abs(data.centroid(segs[s].region));
            if (!(c >= kCentroidFloor)) throw NumericalError("degenerate region");
            const double n = static_cast<double>(segs[s].v.size());
            if (quadratic(loss.shaping)) {
                // sum (x a - r)^2 expanded through the moments.
                const auto& m = moments[s];
                const double sse = std::max(0.0, x * x * m.saa - 2.0 * x * m.sar + m.srr);
                trace_loss += sse / (n * c * c);
            } else {
                coef.resize(segs[s].v.size());
                offset.resize(segs[s].v.size());
                kernels::evaluate_basis(kind, p, segs[s].v, coef, offset);
                double sum = 0.0;
                for (std::size_t k = 0; k < coef.size(); ++k) {
                    const double pred = x * coef[k] + offset[k];
                    sum += shape(loss.shaping, std::abs(pred - segs[s].i[k]) / c, segs[s].i[k] / c,
                                 loss);
                }
                trace_loss += sum / n;
            }
        }
        total += trace_loss / static_cast<double>(segs.size());
    }
    out.loss = total / static_cast<double>(data.trace_count());
    if (!std::isfinite(out.loss)) out.loss = inf;
    return out;
}

namespace {

// Free axes of the search; Gmss ties alpha2 to alpha1.
std::vector<std::size_t> free_axes(ModelKind kind) {
    if (kind == ModelKind::Gmss) return {0, 1, 3, 4};
    return {0, 1, 2, 3, 4};
}

std::vector<double> all_currents(std::span<const Trace> dataset) {
    std::vector<double> out;
    for (const Trace& t : dataset) out.insert(out.end(), t.i.begin(), t.i.end());
    return out;
}

using LogPoint = std::array<double, ModelParams::size>;

// The state absorbs a common scale of the parameters that multiply it
// (G_m alone for the GMSS forms, G_m and both alphas for the proposed form),
// so every point on that ray scores the same up to rounding. Slide the
// incumbent along the ray to the middle of its feasible span so the next
// window is not squeezed against a bound for no reason.
void centre_gauge(ModelKind kind, LogPoint& incumbent, const LogPoint& glo, const LogPoint& ghi) {
    const std::size_t scaled = kind == ModelKind::Proposed ? 3 : 1;
    double c_lo = -std::numeric_limits<double>::infinity();
    double c_hi = std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < scaled; ++d) {
        const double l = std::log10(incumbent[d]);
        c_lo = std::max(c_lo, glo[d] - l);
        c_hi = std::min(c_hi, ghi[d] - l);
    }
    const double c = 0.5 * (c_lo + c_hi);
    if (!(c_lo <= c_hi) || c == 0.0) return;
    const double scale = std::pow(10.0, c);
    for (std::size_t d = 0; d < scaled; ++d) {
        incumbent[d] = std::clamp(incumbent[d] * scale, std::pow(10.0, glo[d]), std::pow(10.0, ghi[d]));
    }
}

// True when the best value sits on the outermost grid line of a window edge
// that is not a global bound: the optimum probably lies beyond it.
bool pinned_to_inner_edge(double centre, double lo, double hi, double glo, double ghi,
                          std::size_t n) {
    if (n < 2) return false;
    const double half_step = 0.5 * (hi - lo) / static_cast<double>(n - 1);
    const double slack = 1e-12 * std::max(1.0, ghi - glo);
    const bool at_lo = centre < lo + half_step && lo > glo + slack;
    const bool at_hi = centre > hi - half_step && hi < ghi - slack;
    return at_lo || at_hi;
}

} // namespace

FitResult grid_search(std::span<const Trace> dataset, ModelKind kind, const GridSearchConfig& cfg,
                      const LossConfig& loss) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    cfg.validate();
    loss.validate();
    if (dataset.empty()) throw ValidationError("grid search needs at least one trace");
    for (const Trace& t : dataset) {
        t.validate();
        if (t.empty()) throw ValidationError("grid search traces must be non-empty");
    }

    const std::vector<double> currents = all_currents(dataset);
    const RegionPartition part = cluster_currents(currents, std::min(loss.k_regions, currents.size()));
    const RegionedDataset data(dataset, part);

    const std::vector<std::size_t> axes = free_axes(kind);
    std::array<double, ModelParams::size> lo{};
    std::array<double, ModelParams::size> hi{};
    for (std::size_t d = 0; d < ModelParams::size; ++d) {
        lo[d] = std::log10(cfg.lower[d]);
        hi[d] = std::log10(cfg.upper[d]);
    }
    const auto global_lo = lo;
    const auto global_hi = hi;

    std::size_t total = 1;
    for (std::size_t a = 0; a < axes.size(); ++a) total *= cfg.n_points;
    const unsigned threads = resolve_threads(cfg.threads);

    FitResult result;
    result.kind = kind;
    std::array<double, ModelParams::size> incumbent{};
    double incumbent_loss = inf;
    bool have_incumbent = false;
    std::vector<double> losses(total);

    for (std::size_t it = 0; it < cfg.n_iters; ++it) {
        std::vector<std::vector<double>> grids(ModelParams::size);
        for (std::size_t d : axes) {
            grids[d] = log_grid(std::pow(10.0, lo[d]), std::pow(10.0, hi[d]), cfg.n_points);
        }

        // Index digits run over the free axes, first axis most significant,
        // so the lowest index is the lexicographically smallest point.
        auto point = [&](std::size_t idx) {
            std::array<double, ModelParams::size> v{};
            for (std::size_t a = axes.size(); a-- > 0;) {
                v[axes[a]] = grids[axes[a]][idx % cfg.n_points];
                idx /= cfg.n_points;
            }
            if (kind == ModelKind::Gmss) v[2] = v[1];
            return v;
        };

        parallel_for(total, threads, [&](std::size_t idx) {
            const double l = score_candidate(kind, ModelParams::from_array(point(idx)), data, loss).loss;
            losses[idx] = std::isfinite(l) ? l : inf;
        });

        std::size_t best = 0;
        for (std::size_t idx = 1; idx < total; ++idx) {
            if (losses[idx] < losses[best]) best = idx;
        }
        if (losses[best] < incumbent_loss) {
            incumbent = point(best);
            incumbent_loss = losses[best];
            have_incumbent = true;
        }
        if (!have_incumbent) throw NumericalError("search collapsed");
        result.loss_history.push_back(incumbent_loss);
        if (cfg.gauge_centre && it + 1 < cfg.n_iters) centre_gauge(kind, incumbent, global_lo, global_hi);

        for (std::size_t d : axes) {
            const double centre = std::log10(incumbent[d]);
            const bool hold = cfg.hold_at_edge && pinned_to_inner_edge(centre, lo[d], hi[d], global_lo[d],
                                                                       global_hi[d], cfg.n_points);
            const double width = (hi[d] - lo[d]) * (hold ? 1.0 : cfg.shrink_factor);
            double a = centre - 0.5 * width;
            double b = centre + 0.5 * width;
            if (a < global_lo[d]) {
                b += global_lo[d] - a;
                a = global_lo[d];
            }
            if (b > global_hi[d]) {
                a -= b - global_hi[d];
                b = global_hi[d];
            }
            lo[d] = std::max(a, global_lo[d]);
            hi[d] = b;
        }
    }

    result.params = ModelParams::from_array(incumbent);
    const CandidateScore final_score = score_candidate(kind, result.params, data, loss);
    result.states = final_score.states;
    result.loss = final_score.loss;
    result.metrics = dataset_metrics(dataset, kind, result.params, result.states, loss);
    return result;
}

std::vector<double> predict(ModelKind kind, const ModelParams& p, double x,
                            std::span<const double> v) {
    std::vector<double> coef(v.size());
    std::vector<double> offset(v.size());
    if (kernels::evaluate_basis(kind, p, v, coef, offset) > 0) {
        throw NumericalError("exponent overflow during prediction");
    }
    for (std::size_t k = 0; k < v.size(); ++k) coef[k] = x * coef[k] + offset[k];
    return coef;
}

Metrics dataset_metrics(std::span<const Trace> dataset, ModelKind kind, const ModelParams& p,
                        std::span<const double> states, const LossConfig& loss) {
    if (dataset.empty()) throw ValidationError("metrics need at least one trace");
    if (states.size() != dataset.size()) throw ValidationError("one state per trace required");
    const std::vector<double> currents = all_currents(dataset);
    const RegionPartition part = cluster_currents(currents, std::min(loss.k_regions, currents.size()));

    Metrics sum;
    std::size_t offset = 0;
    for (std::size_t t = 0; t < dataset.size(); ++t) {
        const Trace& tr = dataset[t];
        const std::vector<double> pred = predict(kind, p, states[t], tr.v);
        RegionPartition local;
        local.regions.resize(part.k());
        local.labels.resize(tr.size());
        for (std::size_t r = 0; r < part.k(); ++r) local.regions[r].centroid = part.regions[r].centroid;
        for (std::size_t s = 0; s < tr.size(); ++s) {
            local.labels[s] = part.labels[offset + s];
            local.regions[local.labels[s]].members.push_back(s);
        }
        offset += tr.size();
        for (const auto& [name, value] : eval_metrics(pred, tr.i, local, loss)) sum[name] += value;
    }
    for (auto& [name, value] : sum) value /= static_cast<double>(dataset.size());
    return sum;
}

} // namespace memstate::fit
