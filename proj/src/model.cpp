#include "memstate/model.hpp"

#include "memstate/errors.hpp"

#include <cmath>
#include <string>

namespace memstate {

std::string_view to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::Gmss: return "gmss";
    case ModelKind::ModifiedGmss: return "modified_gmss";
    case ModelKind::Proposed: return "proposed";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "gmss") return ModelKind::Gmss;
    if (name == "modified_gmss") return ModelKind::ModifiedGmss;
    if (name == "proposed") return ModelKind::Proposed;
    throw ValidationError("unknown model kind '" + std::string(name) + "'");
}

bool ModelParams::valid() const {
    for (double f : as_array()) {
        if (!std::isfinite(f) || f <= 0.0) return false;
    }
    return true;
}

void ModelParams::validate() const {
    static constexpr const char* names[] = {"g_m", "alpha1", "alpha2", "beta1", "beta2"};
    const auto a = as_array();
    for (std::size_t k = 0; k < size; ++k) {
        if (!std::isfinite(a[k]) || a[k] <= 0.0) {
            throw ValidationError(std::string("model parameter ") + names[k] +
                                  " must be finite and strictly positive");
        }
    }
}

void validate_for(ModelKind kind, const ModelParams& p) {
    p.validate();
    if (kind == ModelKind::Gmss && p.alpha1 != p.alpha2) {
        throw ValidationError("gmss requires alpha1 == alpha2 for zero crossing");
    }
}

StateValue::StateValue(double x) : x_(x) {
    if (!std::isfinite(x) || x < 0.0) {
        throw ValidationError("state value must be finite and non-negative");
    }
}

namespace {

double check_exponent(double arg, const char* term) {
    if (!(std::abs(arg) <= kMaxExponent)) {
        throw NumericalError(std::string("exponent overflow in ") + term);
    }
    return arg;
}

double guarded_exp(double arg, const char* term) { return std::exp(check_exponent(arg, term)); }

// expm1 keeps small |v| accurate; both terms vanish at v = 0.
double schottky(const ModelParams& p, double v) {
    const double fwd = check_exponent(p.beta1 * v, "alpha1*exp(beta1*v) term");
    const double rev = check_exponent(-p.beta2 * v, "alpha2*exp(-beta2*v) term");
    return p.alpha1 * std::expm1(fwd) - p.alpha2 * std::expm1(rev);
}

} // namespace

double diode_current(ModelKind kind, const ModelParams& p, double v) {
    if (kind == ModelKind::Gmss) {
        return p.alpha1 * guarded_exp(p.beta1 * v, "alpha1*exp(beta1*v) term") -
               p.alpha2 * guarded_exp(-p.beta2 * v, "alpha2*exp(-beta2*v) term");
    }
    return schottky(p, v);
}

StateBasis state_basis(ModelKind kind, const ModelParams& p, double v) {
    if (kind == ModelKind::Proposed) {
        return {p.g_m * v + diode_current(kind, p, v), 0.0};
    }
    return {p.g_m * v, diode_current(kind, p, v)};
}

double forward_current(ModelKind kind, const ModelParams& p, StateValue x, double v) {
    const StateBasis b = state_basis(kind, p, v);
    return x.value() * b.coef + b.offset;
}

double inversion_denominator(const ModelParams& p, double v) {
    return p.g_m * v + schottky(p, v);
}

double invert_state_raw(const ModelParams& p, double v, double i, double floor) {
    const double den = inversion_denominator(p, v);
    if (!(std::abs(den) >= floor)) {
        throw NumericalError("degenerate operating point");
    }
    return i / den;
}

StateValue invert_state(const ModelParams& p, double v, double i, double floor) {
    const double x = invert_state_raw(p, v, i, floor);
    return StateValue(x > 0.0 ? x : 0.0);
}

StateValue invert_state(ModelKind kind, const ModelParams& p, double v, double i,
                        double floor) {
    if (kind == ModelKind::Proposed) return invert_state(p, v, i, floor);
    const double den = p.g_m * v;
    if (!(std::abs(den) >= floor)) {
        throw NumericalError("degenerate operating point");
    }
    const double x = (i - diode_current(kind, p, v)) / den;
    return StateValue(x > 0.0 ? x : 0.0);
}

double partial_current_sensitivity(const ModelParams& p, double v, double floor) {
    const double den = inversion_denominator(p, v);
    if (!(std::abs(den) >= floor)) {
        throw NumericalError("degenerate operating point");
    }
    return 1.0 / den;
}

} // namespace memstate
