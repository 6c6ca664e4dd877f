#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace memstate::detail {

template <std::size_t N>
struct SimplexResult {
    std::array<double, N> x{};
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2). Stops when the spread of simplex values falls below ftol.
template <std::size_t N, typename F>
SimplexResult<N> nelder_mead(F&& f, std::array<double, N> start, double step, double ftol,
                             int max_iterations) {
    using Point = std::array<double, N>;
    std::array<Point, N + 1> pts;
    std::array<double, N + 1> vals;
    pts[0] = start;
    for (std::size_t d = 0; d < N; ++d) {
        pts[d + 1] = start;
        pts[d + 1][d] += step;
    }
    for (std::size_t k = 0; k <= N; ++k) vals[k] = f(pts[k]);

    auto lerp = [](const Point& a, const Point& b, double t) {
        Point out;
        for (std::size_t d = 0; d < N; ++d) out[d] = a[d] + t * (b[d] - a[d]);
        return out;
    };

    SimplexResult<N> res;
    std::array<std::size_t, N + 1> order;
    for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
        for (std::size_t k = 0; k <= N; ++k) order[k] = k;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order[0];
        const std::size_t worst = order[N];
        const std::size_t second = order[N - 1];
        if (std::abs(vals[worst] - vals[best]) <= ftol) {
            res.converged = true;
            break;
        }

        Point centroid{};
        for (std::size_t k = 0; k <= N; ++k) {
            if (k == worst) continue;
            for (std::size_t d = 0; d < N; ++d) centroid[d] += pts[k][d] / N;
        }

        const Point reflected = lerp(centroid, pts[worst], -1.0);
        const double fr = f(reflected);
        if (fr < vals[best]) {
            const Point expanded = lerp(centroid, pts[worst], -2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                pts[worst] = expanded;
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = reflected;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        const Point contracted = lerp(centroid, outside ? reflected : pts[worst], 0.5);
        const double fc = f(contracted);
        if (fc < (outside ? fr : vals[worst])) {
            pts[worst] = contracted;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t k = 0; k <= N; ++k) {
            if (k == best) continue;
            pts[k] = lerp(pts[best], pts[k], 0.5);
            vals[k] = f(pts[k]);
        }
    }

    const auto it = std::min_element(vals.begin(), vals.end());
    res.x = pts[static_cast<std::size_t>(it - vals.begin())];
    res.value = *it;
    return res;
}

} // namespace memstate::detail
