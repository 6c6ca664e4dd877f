#include "memstate/trace.hpp"

#include "memstate/errors.hpp"

#include <cmath>
#include <string>

namespace memstate {

void RawCapture::validate() const {
    if (!(r_series > 0.0) || !std::isfinite(r_series)) {
        throw ValidationError("r_series must be positive");
    }
    if (n_period < 8) throw ValidationError("n_period must be at least 8");
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
        throw ValidationError("sample_rate must be positive");
    }
    if (samples.size() < n_period) {
        throw ValidationError("capture shorter than one period");
    }
    for (const auto& s : samples) {
        if (!std::isfinite(s.t) || !std::isfinite(s.v_total) || !std::isfinite(s.v_series)) {
            throw ValidationError("capture contains non-finite values");
        }
    }
    if (samples.size() < 2) return;
    const double dt = (samples.back().t - samples.front().t) /
                      static_cast<double>(samples.size() - 1);
    if (!(dt > 0.0)) throw ValidationError("timestamps must be strictly increasing");
    for (std::size_t k = 1; k < samples.size(); ++k) {
        const double step = samples[k].t - samples[k - 1].t;
        if (!(step > 0.0)) throw ValidationError("timestamps must be strictly increasing");
        const double expected = samples.front().t + dt * static_cast<double>(k);
        if (std::abs(samples[k].t - expected) > 1e-6 * dt) {
            throw ValidationError("timestamps not uniformly spaced at row " + std::to_string(k));
        }
    }
}

void Trace::validate() const {
    if (v.size() != i.size()) throw ValidationError("trace voltage/current length mismatch");
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!std::isfinite(v[k]) || !std::isfinite(i[k])) {
            throw ValidationError("trace contains non-finite values");
        }
    }
}

} // namespace memstate
