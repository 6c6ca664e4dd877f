#include "memstate/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace memstate::kernels::scalar {

namespace {

struct Clamped {
    double value;
    bool saturated;
};

Clamped clamp_exponent(double arg) {
    if (arg > kMaxExponent) return {kMaxExponent, true};
    if (arg < -kMaxExponent) return {-kMaxExponent, true};
    return {arg, false};
}

// Basis at one sample; returns true when an exponent saturated.
bool basis_at(ModelKind kind, const ModelParams& p, double v, double& coef, double& offset) {
    const Clamped fwd = clamp_exponent(p.beta1 * v);
    const Clamped rev = clamp_exponent(-p.beta2 * v);
    double diode;
    if (kind == ModelKind::Gmss) {
        diode = p.alpha1 * std::exp(fwd.value) - p.alpha2 * std::exp(rev.value);
    } else {
        diode = p.alpha1 * std::expm1(fwd.value) - p.alpha2 * std::expm1(rev.value);
    }
    if (kind == ModelKind::Proposed) {
        coef = p.g_m * v + diode;
        offset = 0.0;
    } else {
        coef = p.g_m * v;
        offset = diode;
    }
    return fwd.saturated || rev.saturated;
}

} // namespace

Moments basis_moments(ModelKind kind, const ModelParams& p, std::span<const double> v,
                      std::span<const double> i) {
    Moments m;
    const std::size_t n = std::min(v.size(), i.size());
    for (std::size_t k = 0; k < n; ++k) {
        double a, b;
        if (basis_at(kind, p, v[k], a, b)) ++m.saturated;
        const double r = i[k] - b;
        m.saa += a * a;
        m.sar += a * r;
        m.srr += r * r;
    }
    m.count = n;
    return m;
}

std::size_t evaluate_basis(ModelKind kind, const ModelParams& p, std::span<const double> v,
                           std::span<double> coef, std::span<double> offset) {
    std::size_t saturated = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (basis_at(kind, p, v[k], coef[k], offset[k])) ++saturated;
    }
    return saturated;
}

void exp(std::span<const double> x, std::span<double> out) {
    std::transform(x.begin(), x.end(), out.begin(), [](double a) { return std::exp(a); });
}

void expm1(std::span<const double> x, std::span<double> out) {
    std::transform(x.begin(), x.end(), out.begin(), [](double a) { return std::expm1(a); });
}

} // namespace memstate::kernels::scalar
