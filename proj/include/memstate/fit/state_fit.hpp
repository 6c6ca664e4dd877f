#pragma once

#include "memstate/errors.hpp"
#include "memstate/model.hpp"
#include "memstate/trace.hpp"

namespace memstate::fit {

struct LmOptions {
    int max_iterations = 100;
    double initial_damping = 1e-3;
    double step_tolerance = 1e-14;   // relative to |x|
};

struct StateFit {
    double x = 0.0;
    int iterations = 0;
};

class StateFitDiverged : public NumericalError {
public:
    explicit StateFitDiverged(double last) : NumericalError("state fit diverged"), last_x(last) {}
    double last_x;
};

// Levenberg-Marquardt on sum_k (f(x, v_k) - i_k)^2 with x projected onto
// x >= 0. Throws StateFitDiverged after max_iterations.
StateFit fit_state_lm(ModelKind kind, const ModelParams& p, const Trace& trace,
                      const LmOptions& opts = {});

StateValue fit_state(ModelKind kind, const ModelParams& p, const Trace& trace,
                     const LmOptions& opts = {});

// Closed-form least squares, x = max(0, sum a(i - b) / sum a^2), from
// precomputed moments.
double closed_form_state(double saa, double sar);

} // namespace memstate::fit
