#include "memstate/fit/state_fit.hpp"

#include "memstate/kernels.hpp"

#include <cmath>
#include <vector>

namespace memstate::fit {

double closed_form_state(double saa, double sar) {
    if (!(saa > 0.0)) return 0.0;
    const double x = sar / saa;
    return x > 0.0 ? x : 0.0;
}

StateFit fit_state_lm(ModelKind kind, const ModelParams& p, const Trace& trace,
                      const LmOptions& opts) {
    trace.validate();
    if (trace.empty()) throw ValidationError("state fit needs a non-empty trace");

    // The basis does not depend on x, so evaluate it once.
    std::vector<double> a(trace.size());
    std::vector<double> b(trace.size());
    if (kernels::evaluate_basis(kind, p, trace.v, a, b) > 0) {
        throw NumericalError("exponent overflow during state fit");
    }

    auto cost = [&](double x) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double r = x * a[k] + b[k] - trace.i[k];
            s += r * r;
        }
        return s;
    };

    double jtj = 0.0;
    for (double ak : a) jtj += ak * ak;
    if (jtj == 0.0) return {0.0, 0};

    double x = 0.0;
    double current = cost(x);
    double lambda = opts.initial_damping;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        double jtr = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) jtr += a[k] * (x * a[k] + b[k] - trace.i[k]);

        // Marquardt scaling: damping proportional to the curvature.
        const double step = -jtr / (jtj * (1.0 + lambda));
        const double next = std::max(0.0, x + step);
        const double moved = next - x;
        if (std::abs(moved) <= opts.step_tolerance * std::abs(x) || moved == 0.0) {
            return {x, it};
        }
        const double trial = cost(next);
        if (trial <= current) {
            x = next;
            current = trial;
            lambda *= 0.1;
        } else {
            lambda *= 10.0;
        }
        if (!std::isfinite(x)) throw StateFitDiverged(x);
    }
    throw StateFitDiverged(x);
}

StateValue fit_state(ModelKind kind, const ModelParams& p, const Trace& trace,
                     const LmOptions& opts) {
    return StateValue(fit_state_lm(kind, p, trace, opts).x);
}

} // namespace memstate::fit
