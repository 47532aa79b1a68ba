#pragma once

#include <vector>

#include "sdr/constants.hpp"

namespace sdr {

enum class GeometryKind { free_space, slab, cylinder, sphere };

const char* to_string(GeometryKind kind);

/// Restriction descriptor: a pore of characteristic size d (slab width,
/// cylinder diameter, sphere diameter) plus the free diffusion coefficient.
struct Geometry {
    GeometryKind kind = GeometryKind::free_space;
    double size_d = 0.0; // m, unused for free_space
    double d0 = 0.0;     // m^2/s

    bool restricted() const { return kind != GeometryKind::free_space; }

    /// Dimensionality of the random walk: slab 1, cylinder (disc cross
    /// section) 2, sphere 3. Free diffusion only needs the gradient axis.
    int walk_dimensions() const;

    static Geometry free_space(double d0);
    static Geometry slab(double width, double d0);
    static Geometry cylinder(double diameter, double d0);
    static Geometry sphere(double diameter, double d0);
};

struct AcquisitionParams {
    double gamma = constants::gamma_h1; // rad/(s T)
    double gradient = 0.0;              // T/m
    double t2 = 0.0;                    // s; uniform exp(-TE/T2) factor, 0 disables
};

/// Frequency-noise model: g(tau) = delta_omega_sq * sum_k c_k exp(-tau/tau_k),
/// S(omega) = sum_k c_k tau_k / (pi (1 + omega^2 tau_k^2)). The weights c_k
/// are positive and sum to one; all of the variance lives in delta_omega_sq.
struct NoiseSpectrum {
    struct Component {
        double weight = 1.0; // c_k
        double tau = 0.0;    // s
    };
    std::vector<Component> components;
    double delta_omega_sq = 0.0; // rad^2/s^2

    double min_tau() const;
};

struct SpectrumMode {
    int n_components = 1;
    static SpectrumMode single() { return {1}; }
    static SpectrumMode multi(int k) { return {k}; }
};

/// Correlation-time coefficients tau_c = coef * d^2 / D0 per geometry.
/// The cylinder value is the conventional single-Lorentzian compromise;
/// slab and sphere use the integral timescale of the position
/// autocorrelation (see tools/tau_calibration for the Monte Carlo
/// cross-check of all three).
namespace tau_coef {
inline constexpr double cylinder = 0.26 * 0.26;
inline constexpr double slab = 1.0 / 10.0;
inline constexpr double sphere = 2.0 / 35.0;
}  // namespace tau_coef

/// tau_c of a restricted geometry. Throws NoCorrelationTimeError for free
/// diffusion.
double correlation_time(const Geometry& geom);

/// Einstein relation l_c = sqrt(2 D0 tau_c).
double restriction_length(double tau_c, double d0);

/// One diffusion eigenmode of the position autocorrelation:
/// <dx(0) dx(t)> = sum_m variance_m exp(-t/tau_m) along the gradient axis.
struct DiffusionMode {
    double variance = 0.0; // m^2
    double tau = 0.0;      // s
};

/// First k eigenmodes for a restricted geometry (reflecting walls, uniform
/// initial positions). The variances sum to the uniform-distribution
/// coordinate variance: d^2/12 (slab), d^2/16 (cylinder disc), d^2/20
/// (sphere).
std::vector<DiffusionMode> diffusion_modes(const Geometry& geom, int k);

/// Noise spectrum for a restricted geometry under a gradient:
/// single mode uses one Lorentzian with tau = tau_c and
/// delta_omega_sq = gamma^2 G^2 D0 tau_c; multi(k) uses the first k
/// eigenmodes with delta_omega_sq = gamma^2 G^2 * (their summed variance).
/// Throws NoSpectrumError for free geometry.
NoiseSpectrum build_spectrum(const Geometry& geom, const AcquisitionParams& acq,
                             SpectrumMode mode = SpectrumMode::single());

/// Autocorrelation g(tau), rad^2/s^2.
double g_of_tau(const NoiseSpectrum& spec, double tau);

/// Normalized spectral density S(omega), seconds; even in omega and of unit
/// area per component weighting.
double s_of_omega(const NoiseSpectrum& spec, double omega);

}  // namespace sdr
