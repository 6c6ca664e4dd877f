#include "memstate/signal_prep.hpp"

#include "memstate/errors.hpp"
#include "nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace memstate::prep {

Trace derive_signals(const RawCapture& capture) {
    capture.validate();
    Trace out;
    out.n_period = capture.n_period;
    out.v.reserve(capture.samples.size());
    out.i.reserve(capture.samples.size());
    for (const auto& s : capture.samples) {
        out.v.push_back(s.v_total - s.v_series);
        out.i.push_back(s.v_series / capture.r_series);
    }
    out.meta.r_series = capture.r_series;
    out.meta.sample_rate = capture.sample_rate;
    if (!capture.samples.empty()) out.meta.t_start = capture.samples.front().t;
    return out;
}

double implied_resistance(double v_total, double v_series, double r_series) {
    if (v_series == 0.0) throw NumericalError("degenerate operating point");
    return r_series * (v_total / v_series - 1.0);
}

Trace align_periods(const Trace& trace, const AlignConfig& cfg) {
    trace.validate();
    const std::size_t n = trace.n_period;
    if (n < 2 || trace.size() < n) throw ValidationError("alignment needs a full period");
    double amplitude = 0.0;
    for (double v : trace.v) amplitude = std::max(amplitude, std::abs(v));
    const double threshold = cfg.min_abs_fraction * amplitude;

    // Candidates must leave at least one whole period behind them, which also
    // makes an already aligned single period map to itself.
    const std::size_t last = std::min(n, trace.size() - n + 1);
    std::size_t start = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < last && k + 1 < trace.size(); ++k) {
        const double mag = std::abs(trace.v[k]);
        if (mag > threshold || trace.v[k + 1] <= trace.v[k]) continue;
        if (mag < best) {
            best = mag;
            start = k;
        }
    }
    if (start == n) throw ValidationError("alignment failed");

    const std::size_t cycles = (trace.size() - start) / n;
    const std::size_t len = cycles * n;
    Trace out;
    out.n_period = n;
    out.meta = trace.meta;
    out.meta.n_discard = start;
    out.v.assign(trace.v.begin() + static_cast<std::ptrdiff_t>(start),
                 trace.v.begin() + static_cast<std::ptrdiff_t>(start + len));
    out.i.assign(trace.i.begin() + static_cast<std::ptrdiff_t>(start),
                 trace.i.begin() + static_cast<std::ptrdiff_t>(start + len));
    return out;
}

double quadrant_objective(const Trace& trace, double v_offset, double i_offset) {
    double sum = 0.0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const double prod = (trace.v[k] - v_offset) * (trace.i[k] - i_offset);
        if (prod < 0.0) sum -= prod;
    }
    return sum;
}

std::size_t quadrant_count(const Trace& trace, double v_offset, double i_offset) {
    std::size_t count = 0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        if ((trace.v[k] - v_offset) * (trace.i[k] - i_offset) < 0.0) ++count;
    }
    return count;
}

std::pair<Trace, OffsetCorrection> remove_offsets(const Trace& trace, const OffsetConfig& cfg) {
    trace.validate();
    OffsetCorrection corr;
    if (trace.empty()) {
        corr.identity = true;
        return {trace, corr};
    }

    double v_scale = 0.0;
    double i_scale = 0.0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        v_scale = std::max(v_scale, std::abs(trace.v[k]));
        i_scale = std::max(i_scale, std::abs(trace.i[k]));
    }
    if (v_scale == 0.0 || i_scale == 0.0) {
        corr.identity = true;
        return {trace, corr};
    }

    // Mean applied voltage over whole periods; a symmetric READ excitation
    // averages to zero, so any residual is a systematic offset.
    const std::optional<double> r_series = trace.meta.r_series;
    const std::size_t whole = trace.n_period > 0
                                  ? trace.size() / trace.n_period * trace.n_period
                                  : trace.size();
    double mean_applied = 0.0;
    if (whole > 0) {
        for (std::size_t k = 0; k < whole; ++k) {
            mean_applied += trace.v[k] + (r_series ? *r_series * trace.i[k] : 0.0);
        }
        mean_applied /= static_cast<double>(whole);
    }

    const double norm = static_cast<double>(trace.size()) * v_scale * i_scale;
    auto objective = [&](double vo, double io) {
        if (std::abs(vo) > cfg.max_v_offset) return std::numeric_limits<double>::infinity();
        double j = quadrant_objective(trace, vo, io) / norm;
        if (r_series) {
            const double gap = (vo + *r_series * io - mean_applied) / v_scale;
            j += gap * gap;
        }
        return j;
    };

    // Search in amplitude-normalized coordinates.
    auto scaled = [&](const std::array<double, 2>& u) {
        return objective(u[0] * v_scale, u[1] * i_scale);
    };
    const double start_v = std::clamp(mean_applied, -cfg.max_v_offset, cfg.max_v_offset);
    const auto res = detail::nelder_mead<2>(scaled, {start_v / v_scale, 0.0}, 1e-2,
                                            cfg.tolerance, cfg.max_iterations);

    const double at_zero = objective(0.0, 0.0);
    if (!(res.value < at_zero - cfg.tolerance)) {
        corr.identity = true;
        corr.residual = at_zero;
        return {trace, corr};
    }

    corr.v_offset = res.x[0] * v_scale;
    corr.i_offset = res.x[1] * i_scale;
    corr.residual = res.value;

    Trace out = trace;
    for (std::size_t k = 0; k < out.size(); ++k) {
        out.v[k] -= corr.v_offset;
        out.i[k] -= corr.i_offset;
    }
    return {std::move(out), corr};
}

PrepResult preprocess(const Trace& trace, const PrepConfig& cfg) {
    auto [corrected, corr] = remove_offsets(align_periods(trace, cfg.align), cfg.offsets);
    return {std::move(corrected), corr};
}

PrepResult preprocess(const RawCapture& capture, const PrepConfig& cfg) {
    return preprocess(derive_signals(capture), cfg);
}

} // namespace memstate::prep
