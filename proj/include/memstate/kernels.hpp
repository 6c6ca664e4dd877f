#pragma once

// Data-parallel inner loops over sample arrays. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2+FMA variant selected at
// runtime. The variants agree to a few ulp; the scalar path is the oracle.

#include "memstate/model.hpp"

#include <cstddef>
#include <span>

namespace memstate::kernels {

enum class Isa { Scalar, Avx2 };

const char* to_string(Isa isa);

// True when the CPU and the build both support the AVX2 path.
bool avx2_supported();

// ISA used by the dispatching entry points. Defaults to the best supported
// one; MEMSTATE_SIMD=scalar in the environment forces the reference path.
Isa active_isa();
void set_active_isa(Isa isa);

// Sums used by the closed-form state fit and the quadratic region loss.
// With a, b the state basis at v (i = x*a + b) and r = i - b:
struct Moments {
    double saa = 0.0;
    double sar = 0.0;
    double srr = 0.0;
    std::size_t count = 0;
    std::size_t saturated = 0; // samples whose exponent argument was clamped
};

// Exponent arguments are clamped to +-kMaxExponent; clamped samples are
// counted in Moments::saturated instead of raising.
Moments basis_moments(ModelKind kind, const ModelParams& p, std::span<const double> v,
                      std::span<const double> i);

// coef[k], offset[k] = state basis at v[k]. Returns the saturated count.
std::size_t evaluate_basis(ModelKind kind, const ModelParams& p, std::span<const double> v,
                           std::span<double> coef, std::span<double> offset);

// out[k] = exp(x[k]) and out[k] = expm1(x[k]); arguments must already lie in
// [-kMaxExponent, kMaxExponent].
void exp(std::span<const double> x, std::span<double> out);
void expm1(std::span<const double> x, std::span<double> out);

namespace scalar {
Moments basis_moments(ModelKind kind, const ModelParams& p, std::span<const double> v,
                      std::span<const double> i);
std::size_t evaluate_basis(ModelKind kind, const ModelParams& p, std::span<const double> v,
                           std::span<double> coef, std::span<double> offset);
void exp(std::span<const double> x, std::span<double> out);
void expm1(std::span<const double> x, std::span<double> out);
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define MEMSTATE_HAVE_AVX2_KERNELS 1
namespace avx2 {
Moments basis_moments(ModelKind kind, const ModelParams& p, std::span<const double> v,
                      std::span<const double> i);
std::size_t evaluate_basis(ModelKind kind, const ModelParams& p, std::span<const double> v,
                           std::span<double> coef, std::span<double> offset);
void exp(std::span<const double> x, std::span<double> out);
void expm1(std::span<const double> x, std::span<double> out);
} // namespace avx2
#else
#define MEMSTATE_HAVE_AVX2_KERNELS 0
#endif

} // namespace memstate::kernels
