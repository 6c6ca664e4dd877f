#include "memstate/estimator.hpp"

#include "memstate/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace memstate::estimate {

void NoiseModel::validate() const {
    if (!(sigma_n >= 0.0) || !std::isfinite(sigma_n)) {
        throw ValidationError("sigma_n must be finite and non-negative");
    }
    if (!(r_series > 0.0) || !std::isfinite(r_series)) {
        throw ValidationError("r_series must be positive");
    }
}

double current_sensitivity(ModelKind kind, const ModelParams& p, double v, double floor) {
    if (kind == ModelKind::Proposed) return partial_current_sensitivity(p, v, floor);
    const double den = p.g_m * v;
    if (!(std::abs(den) >= floor)) throw NumericalError("degenerate operating point");
    return 1.0 / den;
}

double variance_proxy(const ModelParams& p, double v, ModelKind kind) {
    const double g = current_sensitivity(kind, p, v);
    return g * g;
}

std::vector<double> min_variance_weights(std::span<const double> proxies) {
    if (proxies.empty()) throw ValidationError("no measurements to weight");
    std::vector<double> w(proxies.size());
    double total = 0.0;
    for (std::size_t k = 0; k < proxies.size(); ++k) {
        if (!std::isfinite(proxies[k]) || !(proxies[k] > 0.0)) {
            throw ValidationError("variance proxies must be finite and positive");
        }
        w[k] = 1.0 / proxies[k];
        total += w[k];
    }
    if (!std::isfinite(total)) throw ValidationError("variance proxies underflow");
    for (double& m : w) m /= total;
    return w;
}

std::vector<std::size_t> usable_samples(const Trace& trace, double exclusion_fraction) {
    double v_max = 0.0;
    double i_max = 0.0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        v_max = std::max(v_max, std::abs(trace.v[k]));
        i_max = std::max(i_max, std::abs(trace.i[k]));
    }
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        if (std::abs(trace.v[k]) < exclusion_fraction * v_max) continue;
        if (std::abs(trace.i[k]) < exclusion_fraction * i_max) continue;
        if (trace.v[k] == 0.0) continue;
        keep.push_back(k);
    }
    return keep;
}

StateEstimate estimate_state(const Trace& trace, const ModelParams& p, const NoiseModel& noise,
                             const EstimateConfig& cfg) {
    trace.validate();
    noise.validate();
    validate_for(cfg.kind, p);
    if (!(cfg.exclusion_fraction >= 0.0 && cfg.exclusion_fraction < 1.0)) {
        throw ValidationError("exclusion_fraction must lie in [0, 1)");
    }

    StateEstimate est;
    est.included = usable_samples(trace, cfg.exclusion_fraction);
    est.excluded = trace.size() - est.included.size();
    if (est.included.empty()) throw ValidationError("no usable measurements");

    std::vector<double> proxies(est.included.size());
    est.per_sample.resize(est.included.size());
    for (std::size_t n = 0; n < est.included.size(); ++n) {
        const std::size_t k = est.included[n];
        const double g = current_sensitivity(cfg.kind, p, trace.v[k], cfg.denominator_floor);
        proxies[n] = g * g;
        if (cfg.kind == ModelKind::Proposed) {
            est.per_sample[n] = trace.i[k] * g;
        } else {
            est.per_sample[n] = (trace.i[k] - diode_current(cfg.kind, p, trace.v[k])) * g;
        }
    }

    if (cfg.weighting == Weighting::Uniform) {
        est.weights.assign(proxies.size(), 1.0 / static_cast<double>(proxies.size()));
    } else {
        est.weights = min_variance_weights(proxies);
    }

    for (std::size_t n = 0; n < proxies.size(); ++n) {
        est.x_hat += est.weights[n] * est.per_sample[n];
        est.variance_proxy += est.weights[n] * est.weights[n] * proxies[n];
    }
    est.std_estimate = noise.sigma_n / noise.r_series * std::sqrt(est.variance_proxy);
    return est;
}

double DriftPoint::inverse_x_hat() const {
    const double x = x_hat();
    return x != 0.0 ? 1.0 / x : std::numeric_limits<double>::infinity();
}

std::vector<DriftPoint> drift_series_estimate(std::span<const Trace> traces, const ModelParams& p,
                                              const NoiseModel& noise,
                                              const EstimateConfig& cfg) {
    std::vector<DriftPoint> out;
    out.reserve(traces.size());
    for (std::size_t n = 0; n < traces.size(); ++n) {
        DriftPoint pt;
        pt.t = traces[n].meta.t_start.value_or(static_cast<double>(n));
        try {
            pt.estimate = estimate_state(traces[n], p, noise, cfg);
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
        out.push_back(std::move(pt));
    }
    return out;
}

} // namespace memstate::estimate
