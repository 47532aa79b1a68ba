#include "sdr/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sdr/errors.hpp"

namespace sdr {

namespace {

constexpr double kPi = std::numbers::pi;

// Positive roots of the radial derivative condition for the modes that
// couple to a coordinate: J1'(a) = 0 for the disc, j1'(a) = 0 for the ball.
// Scanned with a fixed grid plus bisection; k stays small (<= a few dozen).
double bisect(double lo, double hi, double (*fn)(double)) {
    double flo = fn(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = fn(mid);
        if (fm == 0.0) return mid;
        if ((flo < 0) == (fm < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double disc_condition(double x) {
    return std::cyl_bessel_j(0, x) - std::cyl_bessel_j(1, x) / x;
}

double ball_condition(double x) {
    return (x * x - 2.0) * std::sin(x) + 2.0 * x * std::cos(x);
}

std::vector<double> scan_roots(double (*fn)(double), int count) {
    std::vector<double> roots;
    double prev_x = 0.5;
    double prev_f = fn(prev_x);
    for (double x = 0.52; roots.size() < static_cast<std::size_t>(count); x += 0.02) {
        const double fx = fn(x);
        if ((prev_f < 0) != (fx < 0)) roots.push_back(bisect(prev_x, x, fn));
        prev_x = x;
        prev_f = fx;
    }
    return roots;
}

}  // namespace

const char* to_string(GeometryKind kind) {
    switch (kind) {
        case GeometryKind::free_space: return "free";
        case GeometryKind::slab: return "slab";
        case GeometryKind::cylinder: return "cylinder";
        case GeometryKind::sphere: return "sphere";
    }
    return "?";
}

int Geometry::walk_dimensions() const {
    switch (kind) {
        case GeometryKind::free_space: return 1;
        case GeometryKind::slab: return 1;
        case GeometryKind::cylinder: return 2;
        case GeometryKind::sphere: return 3;
    }
    return 1;
}

Geometry Geometry::free_space(double d0) { return {GeometryKind::free_space, 0.0, d0}; }
Geometry Geometry::slab(double width, double d0) { return {GeometryKind::slab, width, d0}; }
Geometry Geometry::cylinder(double diameter, double d0) {
    return {GeometryKind::cylinder, diameter, d0};
}
Geometry Geometry::sphere(double diameter, double d0) {
    return {GeometryKind::sphere, diameter, d0};
}

double NoiseSpectrum::min_tau() const {
    double m = components.empty() ? 0.0 : components.front().tau;
    for (const auto& c : components) m = std::min(m, c.tau);
    return m;
}

double correlation_time(const Geometry& geom) {
    if (!geom.restricted())
        throw NoCorrelationTimeError("free diffusion has no confinement correlation time");
    if (!(geom.size_d > 0.0) || !(geom.d0 > 0.0))
        throw Error("geometry requires positive size and diffusion coefficient");
    double coef = 0.0;
    switch (geom.kind) {
        case GeometryKind::slab: coef = tau_coef::slab; break;
        case GeometryKind::cylinder: coef = tau_coef::cylinder; break;
        case GeometryKind::sphere: coef = tau_coef::sphere; break;
        case GeometryKind::free_space: break;
    }
    return coef * geom.size_d * geom.size_d / geom.d0;
}

double restriction_length(double tau_c, double d0) { return std::sqrt(2.0 * d0 * tau_c); }

std::vector<DiffusionMode> diffusion_modes(const Geometry& geom, int k) {
    if (!geom.restricted())
        throw NoSpectrumError("free diffusion has no discrete mode expansion");
    if (k < 1) throw Error("mode count must be >= 1");

    std::vector<DiffusionMode> modes;
    modes.reserve(static_cast<std::size_t>(k));
    const double d = geom.size_d;

    switch (geom.kind) {
        case GeometryKind::slab: {
            // interval of width d: odd cosine modes,
            // variance_m = 8 d^2 / (pi^4 m^4), tau_m = d^2 / (m^2 pi^2 D0)
            for (int i = 0; i < k; ++i) {
                const double m = 2.0 * i + 1.0;
                modes.push_back({8.0 * d * d / (kPi * kPi * kPi * kPi * m * m * m * m),
                                 d * d / (m * m * kPi * kPi * geom.d0)});
            }
            break;
        }
        case GeometryKind::cylinder: {
            // disc of radius a = d/2: variance_m = 2 a^2 / (al^2 (al^2 - 1)),
            // tau_m = a^2 / (al^2 D0), al the roots of J1'
            const double a = d / 2.0;
            const auto roots = scan_roots(&disc_condition, k);
            for (double al : roots) {
                const double al2 = al * al;
                modes.push_back({2.0 * a * a / (al2 * (al2 - 1.0)), a * a / (al2 * geom.d0)});
            }
            break;
        }
        case GeometryKind::sphere: {
            // ball of radius a = d/2: variance_m = 2 a^2 / (al^2 (al^2 - 2)),
            // tau_m = a^2 / (al^2 D0), al the roots of j1'
            const double a = d / 2.0;
            const auto roots = scan_roots(&ball_condition, k);
            for (double al : roots) {
                const double al2 = al * al;
                modes.push_back({2.0 * a * a / (al2 * (al2 - 2.0)), a * a / (al2 * geom.d0)});
            }
            break;
        }
        case GeometryKind::free_space: break;
    }
    return modes;
}

NoiseSpectrum build_spectrum(const Geometry& geom, const AcquisitionParams& acq,
                             SpectrumMode mode) {
    if (!geom.restricted())
        throw NoSpectrumError("free diffusion has no Lorentzian spectrum");
    if (acq.gradient < 0.0 || !(acq.gamma > 0.0))
        throw Error("acquisition requires gamma > 0 and gradient >= 0");
    if (mode.n_components < 1) throw Error("spectrum mode requires >= 1 component");

    const double gg = acq.gamma * acq.gradient;
    NoiseSpectrum spec;

    if (mode.n_components == 1) {
        const double tau_c = correlation_time(geom);
        spec.components.push_back({1.0, tau_c});
        spec.delta_omega_sq = gg * gg * geom.d0 * tau_c;
        return spec;
    }

    const auto modes = diffusion_modes(geom, mode.n_components);
    double var_sum = 0.0;
    for (const auto& m : modes) var_sum += m.variance;
    spec.delta_omega_sq = gg * gg * var_sum;
    for (const auto& m : modes)
        spec.components.push_back({m.variance / var_sum, m.tau});
    return spec;
}

double g_of_tau(const NoiseSpectrum& spec, double tau) {
    double g = 0.0;
    for (const auto& c : spec.components) g += c.weight * std::exp(-tau / c.tau);
    return spec.delta_omega_sq * g;
}

double s_of_omega(const NoiseSpectrum& spec, double omega) {
    double s = 0.0;
    for (const auto& c : spec.components)
        s += c.weight * c.tau / (kPi * (1.0 + omega * omega * c.tau * c.tau));
    return s;
}

}  // namespace sdr
