#pragma once

#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

namespace sdr {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0; // estimated absolute error
    long evaluations = 0;
    bool converged = false;
};

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights on [-1, 1].
inline constexpr double kGk15Nodes[8] = {
    0.0,
    0.207784955007898468,
    0.405845151377397167,
    0.586087235467691130,
    0.741531185599394440,
    0.864864423359769073,
    0.949107912342758525,
    0.991455371120812639,
};
inline constexpr double kGk15Weights[8] = {
    0.209482141084727828,
    0.204432940075298892,
    0.190350578064785410,
    0.169004726639267903,
    0.140653259715525919,
    0.104790010322250184,
    0.063092092629978553,
    0.022935322010529225,
};
inline constexpr double kG7Weights[4] = {
    0.417959183673469388, // node 0
    0.381830050505118945, // node 2
    0.279705391489276668, // node 4
    0.129484966168869693, // node 6
};

template <typename F>
void gk15(F&& f, double a, double b, double& value, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(mid);
    double k15 = kGk15Weights[0] * f0;
    double g7 = kG7Weights[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kGk15Nodes[i];
        const double fsum = f(mid - dx) + f(mid + dx);
        k15 += kGk15Weights[i] * fsum;
        if (i % 2 == 0) g7 += kG7Weights[i / 2] * fsum;
    }
    value = k15 * half;
    // raw Gauss-Kronrod difference, no sharpening
    err = std::abs((k15 - g7) * half);
    if (!std::isfinite(err)) err = std::abs(value);
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration over a panelled interval.
/// Panels are refined worst-error-first until the summed error estimate
/// drops below max(abs_tol, rel_tol * |value|) or the panel budget runs out.
template <typename F>
QuadratureResult integrate_adaptive(F&& f, const std::vector<double>& breakpoints,
                                    double rel_tol, double abs_tol, int max_panels = 200000) {
    struct Panel {
        double a, b, value, error;
        bool operator<(const Panel& o) const { return error < o.error; }
    };

    QuadratureResult res;
    std::priority_queue<Panel> heap;
    double total = 0.0, total_err = 0.0;

    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        Panel p{breakpoints[i], breakpoints[i + 1], 0.0, 0.0};
        detail::gk15(f, p.a, p.b, p.value, p.error);
        res.evaluations += 15;
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }

    int panels = static_cast<int>(breakpoints.size()) - 1;
    while (!heap.empty() && panels < max_panels) {
        if (total_err <= std::max(abs_tol, rel_tol * std::abs(total))) break;
        Panel worst = heap.top();
        if (worst.error <= 0.0) break;
        heap.pop();
        total -= worst.value;
        total_err -= worst.error;

        const double mid = 0.5 * (worst.a + worst.b);
        Panel left{worst.a, mid, 0.0, 0.0}, right{mid, worst.b, 0.0, 0.0};
        detail::gk15(f, left.a, left.b, left.value, left.error);
        detail::gk15(f, right.a, right.b, right.value, right.error);
        res.evaluations += 30;
        total += left.value + right.value;
        total_err += left.error + right.error;
        heap.push(left);
        heap.push(right);
        ++panels;
    }

    res.value = total;
    res.error = total_err;
    res.converged = total_err <= std::max(abs_tol, rel_tol * std::abs(total));
    return res;
}

}  // namespace sdr
