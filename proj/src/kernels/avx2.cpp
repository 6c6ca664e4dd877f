#include "memstate/kernels.hpp"

#if MEMSTATE_HAVE_AVX2_KERNELS

#include <immintrin.h>

#include <algorithm>
#include <bit>

#define MEMSTATE_AVX2 __attribute__((target("avx2,fma")))

namespace memstate::kernels::avx2 {

namespace {

constexpr double kLog2e = 1.4426950408889634074;
constexpr double kLn2Hi = 0.693145751953125;
constexpr double kLn2Lo = 1.42860682030941723212e-6;

// Taylor coefficients of (e^r - 1) / r, highest order first.
constexpr double kEm1Coeffs[] = {
    1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
    1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,      1.0 / 720.0,
    1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,         1.0 / 2.0,
    1.0,
};

// x = n*ln2 + r with |r| <= ln2/2; returns e^r - 1 and sets scale = 2^n.
MEMSTATE_AVX2 inline __m256d reduced_em1(__m256d x, __m256d& scale) {
    const __m256d n =
        _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kLog2e)),
                        _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Hi), x);
    r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Lo), r);

    __m256d q = _mm256_set1_pd(kEm1Coeffs[0]);
    for (std::size_t c = 1; c < std::size(kEm1Coeffs); ++c) {
        q = _mm256_fmadd_pd(q, r, _mm256_set1_pd(kEm1Coeffs[c]));
    }

    const __m256i bits = _mm256_slli_epi64(
        _mm256_add_epi64(_mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n)), _mm256_set1_epi64x(1023)),
        52);
    scale = _mm256_castsi256_pd(bits);
    return _mm256_mul_pd(q, r);
}

MEMSTATE_AVX2 inline __m256d vexp(__m256d x) {
    __m256d scale;
    const __m256d em1 = reduced_em1(x, scale);
    return _mm256_fmadd_pd(scale, em1, scale);
}

MEMSTATE_AVX2 inline __m256d vexpm1(__m256d x) {
    __m256d scale;
    const __m256d em1 = reduced_em1(x, scale);
    return _mm256_fmadd_pd(scale, em1, _mm256_sub_pd(scale, _mm256_set1_pd(1.0)));
}

struct Lanes {
    __m256d coef;
    __m256d offset;
    int saturated_mask;
};

MEMSTATE_AVX2 inline __m256d clamp_exponent(__m256d arg, int& saturated_mask) {
    const __m256d hi = _mm256_set1_pd(kMaxExponent);
    const __m256d lo = _mm256_set1_pd(-kMaxExponent);
    const __m256d out = _mm256_or_pd(_mm256_cmp_pd(arg, hi, _CMP_GT_OQ),
                                     _mm256_cmp_pd(arg, lo, _CMP_LT_OQ));
    saturated_mask |= _mm256_movemask_pd(out);
    return _mm256_max_pd(_mm256_min_pd(arg, hi), lo);
}

MEMSTATE_AVX2 inline Lanes basis_lanes(ModelKind kind, const ModelParams& p, __m256d v) {
    int sat = 0;
    const __m256d fwd = clamp_exponent(_mm256_mul_pd(_mm256_set1_pd(p.beta1), v), sat);
    const __m256d rev = clamp_exponent(_mm256_mul_pd(_mm256_set1_pd(-p.beta2), v), sat);
    const __m256d a1 = _mm256_set1_pd(p.alpha1);
    const __m256d a2 = _mm256_set1_pd(p.alpha2);
    __m256d diode;
    if (kind == ModelKind::Gmss) {
        diode = _mm256_fmsub_pd(a1, vexp(fwd), _mm256_mul_pd(a2, vexp(rev)));
    } else {
        diode = _mm256_fmsub_pd(a1, vexpm1(fwd), _mm256_mul_pd(a2, vexpm1(rev)));
    }
    const __m256d ohmic = _mm256_mul_pd(_mm256_set1_pd(p.g_m), v);
    if (kind == ModelKind::Proposed) {
        return {_mm256_add_pd(ohmic, diode), _mm256_setzero_pd(), sat};
    }
    return {ohmic, diode, sat};
}

MEMSTATE_AVX2 inline double hsum(__m256d x) {
    const __m128d lo = _mm256_castpd256_pd128(x);
    const __m128d hi = _mm256_extractf128_pd(x, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

MEMSTATE_AVX2 inline __m256d tail_mask(std::size_t remaining) {
    alignas(32) double m[4];
    for (std::size_t l = 0; l < 4; ++l) {
        m[l] = l < remaining ? std::bit_cast<double>(~0ULL) : 0.0;
    }
    return _mm256_load_pd(m);
}

} // namespace

MEMSTATE_AVX2 Moments basis_moments(ModelKind kind, const ModelParams& p,
                                    std::span<const double> v, std::span<const double> i) {
    const std::size_t n = std::min(v.size(), i.size());
    __m256d saa = _mm256_setzero_pd();
    __m256d sar = _mm256_setzero_pd();
    __m256d srr = _mm256_setzero_pd();
    std::size_t saturated = 0;

    auto accumulate = [&](__m256d vv, __m256d ii, __m256d mask, int lane_mask)
                          MEMSTATE_AVX2 {
        const Lanes b = basis_lanes(kind, p, vv);
        const __m256d a = _mm256_and_pd(b.coef, mask);
        const __m256d r = _mm256_and_pd(_mm256_sub_pd(ii, b.offset), mask);
        saa = _mm256_fmadd_pd(a, a, saa);
        sar = _mm256_fmadd_pd(a, r, sar);
        srr = _mm256_fmadd_pd(r, r, srr);
        saturated += static_cast<std::size_t>(std::popcount(
            static_cast<unsigned>(b.saturated_mask & lane_mask)));
    };

    const __m256d all = tail_mask(4);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        accumulate(_mm256_loadu_pd(&v[k]), _mm256_loadu_pd(&i[k]), all, 0xF);
    }
    if (k < n) {
        alignas(32) double vb[4] = {0.0, 0.0, 0.0, 0.0};
        alignas(32) double ib[4] = {0.0, 0.0, 0.0, 0.0};
        const std::size_t rem = n - k;
        std::copy_n(&v[k], rem, vb);
        std::copy_n(&i[k], rem, ib);
        accumulate(_mm256_load_pd(vb), _mm256_load_pd(ib), tail_mask(rem),
                   (1 << rem) - 1);
    }

    Moments m;
    m.saa = hsum(saa);
    m.sar = hsum(sar);
    m.srr = hsum(srr);
    m.count = n;
    m.saturated = saturated;
    return m;
}

MEMSTATE_AVX2 std::size_t evaluate_basis(ModelKind kind, const ModelParams& p,
                                         std::span<const double> v, std::span<double> coef,
                                         std::span<double> offset) {
    const std::size_t n = v.size();
    std::size_t saturated = 0;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const Lanes b = basis_lanes(kind, p, _mm256_loadu_pd(&v[k]));
        _mm256_storeu_pd(&coef[k], b.coef);
        _mm256_storeu_pd(&offset[k], b.offset);
        saturated += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(b.saturated_mask)));
    }
    if (k < n) {
        alignas(32) double vb[4] = {0.0, 0.0, 0.0, 0.0};
        alignas(32) double cb[4];
        alignas(32) double ob[4];
        const std::size_t rem = n - k;
        std::copy_n(&v[k], rem, vb);
        const Lanes b = basis_lanes(kind, p, _mm256_load_pd(vb));
        _mm256_store_pd(cb, b.coef);
        _mm256_store_pd(ob, b.offset);
        std::copy_n(cb, rem, &coef[k]);
        std::copy_n(ob, rem, &offset[k]);
        saturated += static_cast<std::size_t>(
            std::popcount(static_cast<unsigned>(b.saturated_mask & ((1 << rem) - 1))));
    }
    return saturated;
}

namespace {

MEMSTATE_AVX2 inline __m256d apply(bool minus_one, __m256d a) {
    return minus_one ? vexpm1(a) : vexp(a);
}

MEMSTATE_AVX2 void map_lanes(std::span<const double> x, std::span<double> out, bool minus_one) {
    const std::size_t n = x.size();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        _mm256_storeu_pd(&out[k], apply(minus_one, _mm256_loadu_pd(&x[k])));
    }
    if (k < n) {
        alignas(32) double xb[4] = {0.0, 0.0, 0.0, 0.0};
        alignas(32) double ob[4];
        std::copy_n(&x[k], n - k, xb);
        _mm256_store_pd(ob, apply(minus_one, _mm256_load_pd(xb)));
        std::copy_n(ob, n - k, &out[k]);
    }
}

} // namespace

MEMSTATE_AVX2 void exp(std::span<const double> x, std::span<double> out) {
    map_lanes(x, out, false);
}

MEMSTATE_AVX2 void expm1(std::span<const double> x, std::span<double> out) {
    map_lanes(x, out, true);
}

} // namespace memstate::kernels::avx2

#endif
