#pragma once

// Conduction models for self-directed-channel memristors.
//
// All three variants share the parameter vector [G_m, alpha1, alpha2,
// beta1, beta2]:
//
//   Gmss          i = x*G_m*v + alpha1*exp(beta1*v) - alpha2*exp(-beta2*v)
//   ModifiedGmss  i = x*G_m*v + Id(v)
//   Proposed      i = x*(G_m*v + Id(v))
//
// with the zero-crossing Schottky form
//   Id(v) = alpha1*(exp(beta1*v) - 1) + alpha2*(1 - exp(-beta2*v)).
//
// Every model is linear in the state x, i = x*a(v) + b(v); the kernels and
// the state fit rely on that split.

#include <array>
#include <string>
#include <string_view>

namespace memstate {

enum class ModelKind { Gmss, ModifiedGmss, Proposed };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct ModelParams {
    double g_m = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;

    static constexpr std::size_t size = 5;

    std::array<double, size> as_array() const { return {g_m, alpha1, alpha2, beta1, beta2}; }
    static ModelParams from_array(const std::array<double, size>& a) {
        return {a[0], a[1], a[2], a[3], a[4]};
    }

    // Strictly positive and finite in every field.
    bool valid() const;
    // Throws ValidationError naming the first bad field.
    void validate() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Validates p for the given kind; Gmss additionally requires alpha1 == alpha2.
void validate_for(ModelKind kind, const ModelParams& p);

// Fitted values for the measured device.
namespace reference {
inline constexpr ModelParams kGmss{4.207, 2.730e-3, 1.313e-7, 1.392e1, 2.327e-6};
inline constexpr ModelParams kModifiedGmss{3.160, 1.063e-2, 3.869e-7, 9.397, 6.666e-9};
inline constexpr ModelParams kProposed{8.679, 2.622e-1, 6.597e-2, 1.370e1, 1.005e1};
} // namespace reference

// Dimensionless resistive state, x >= 0.
class StateValue {
public:
    StateValue() = default;
    explicit StateValue(double x);
    double value() const { return x_; }
    friend bool operator==(StateValue, StateValue) = default;

private:
    double x_ = 0.0;
};

// Largest |beta*v| passed to exp(); larger arguments saturate.
inline constexpr double kMaxExponent = 700.0;
inline constexpr double kDefaultDenominatorFloor = 1e-15;

// Diode component. Throws NumericalError("exponent overflow ...") when an
// exponent argument exceeds kMaxExponent in magnitude.
double diode_current(ModelKind kind, const ModelParams& p, double v);

// Full model current.
double forward_current(ModelKind kind, const ModelParams& p, StateValue x, double v);

// State-linear split of the model: i = x*coef + offset.
struct StateBasis {
    double coef = 0.0;
    double offset = 0.0;
};
StateBasis state_basis(ModelKind kind, const ModelParams& p, double v);

// Denominator of the Proposed-model state inversion, G_m*v + Id(v).
double inversion_denominator(const ModelParams& p, double v);

// x = i / (G_m*v + Id(v)). Throws NumericalError("degenerate operating
// point") when |denominator| < floor. Negative results (i of opposite sign
// to v) are clamped to 0.
StateValue invert_state(const ModelParams& p, double v, double i,
                        double floor = kDefaultDenominatorFloor);

// Unclamped Proposed-model inversion; used where a noisy per-sample
// estimate must stay linear in the current.
double invert_state_raw(const ModelParams& p, double v, double i,
                        double floor = kDefaultDenominatorFloor);

// Kind-selected inversion: Proposed as above, Gmss/ModifiedGmss use
// x = (i - Id(v)) / (G_m*v).
StateValue invert_state(ModelKind kind, const ModelParams& p, double v, double i,
                        double floor = kDefaultDenominatorFloor);

// d x / d i for the Proposed inversion, 1 / (G_m*v + Id(v)). Depends on v only.
double partial_current_sensitivity(const ModelParams& p, double v,
                                   double floor = kDefaultDenominatorFloor);

} // namespace memstate
