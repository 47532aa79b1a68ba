#pragma once

#include <vector>

#include "sdr/decay.hpp"
#include "sdr/noise.hpp"

namespace sdr {

struct FitOptions {
    double d_min = 0.1e-6;  // m
    double d_max = 100e-6;  // m
    int multistarts = 8;
    bool fit_amplitude = true;
    bool fit_d0 = false;    // joint (d, D0) fitting; partially degenerate, off by default
    SpectrumMode mode = SpectrumMode::single();
    int max_iterations = 200;
    double gradient_tol = 1e-10; // max-norm of the scaled objective gradient
    double step_tol = 1e-12;     // relative parameter step
};

struct FitResult {
    double diameter = 0.0;   // m
    double amplitude = 1.0;
    double d0 = 0.0;         // m^2/s
    bool d0_fitted = false;
    double residual_rms = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> covariance_diag; // natural units (d in m, A, D0 in m^2/s)
    double objective = 0.0;  // final sum of squared residuals
};

/// Divide the signal by its first sample (the standard same-scan
/// normalization). Throws NormalizationError when the first sample is not
/// positive.
DecayCurve normalize_first_point(const DecayCurve& curve);

/// Pointwise model - data for the forward model A * M_SDR(x; d) with the
/// given spectrum mode.
std::vector<double> residuals(const DecayCurve& curve, GeometryKind kind, double diameter,
                              double amplitude, double d0, SpectrumMode mode);

/// Recover the restriction diameter (and amplitude, optionally D0) from a
/// fixed-(TE, N, G) scan: multi-start over a log-spaced diameter grid, then
/// damped least squares with a central-difference Jacobian. Ties between
/// equal minima break toward the smaller diameter.
FitResult fit_diameter(const DecayCurve& curve, GeometryKind kind, double d0,
                       const FitOptions& options = {});

}  // namespace sdr
