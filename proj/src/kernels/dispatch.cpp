#include "memstate/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace memstate::kernels {

const char* to_string(Isa isa) {
    return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool avx2_supported() {
#if MEMSTATE_HAVE_AVX2_KERNELS && (defined(__GNUC__) || defined(__clang__))
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported;
#else
    return false;
#endif
}

namespace {

Isa initial_isa() {
    if (const char* env = std::getenv("MEMSTATE_SIMD")) {
        if (std::string_view(env) == "scalar") return Isa::Scalar;
    }
    return avx2_supported() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& isa_slot() {
    static std::atomic<Isa> slot{initial_isa()};
    return slot;
}

} // namespace

Isa active_isa() { return isa_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    isa_slot().store(isa == Isa::Avx2 && !avx2_supported() ? Isa::Scalar : isa,
                     std::memory_order_relaxed);
}

#if MEMSTATE_HAVE_AVX2_KERNELS
#define MEMSTATE_DISPATCH(call)                                                               \
    return active_isa() == Isa::Avx2 ? avx2::call : scalar::call
#else
#define MEMSTATE_DISPATCH(call) return scalar::call
#endif

Moments basis_moments(ModelKind kind, const ModelParams& p, std::span<const double> v,
                      std::span<const double> i) {
    MEMSTATE_DISPATCH(basis_moments(kind, p, v, i));
}

std::size_t evaluate_basis(ModelKind kind, const ModelParams& p, std::span<const double> v,
                           std::span<double> coef, std::span<double> offset) {
    MEMSTATE_DISPATCH(evaluate_basis(kind, p, v, coef, offset));
}

void exp(std::span<const double> x, std::span<double> out) { MEMSTATE_DISPATCH(exp(x, out)); }

void expm1(std::span<const double> x, std::span<double> out) { MEMSTATE_DISPATCH(expm1(x, out)); }

} // namespace memstate::kernels
