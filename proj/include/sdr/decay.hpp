#pragma once

#include <vector>

#include "sdr/noise.hpp"
#include "sdr/sequence.hpp"

namespace sdr {

/// Half the phase variance and the resulting Gaussian-phase magnetization
/// M = exp(-variance_half).
struct DecayResult {
    double variance_half = 0.0;
    double magnetization = 1.0;

    static DecayResult from_variance(double v);
};

/// Exact phase variance by closed-form double integration of the
/// exponential correlation over all segment pairs of the modulation
/// function. Reference path for everything else.
DecayResult variance_exact(const PulseSequence& seq, const NoiseSpectrum& spec);
DecayResult variance_exact(const ModulationFunction& f, const NoiseSpectrum& spec);

/// Same quantity through the spectral route: the overlap integral of
/// S(omega) with |F(omega)|^2, by adaptive Gauss-Kronrod quadrature with an
/// analytic Lorentzian tail. Throws QuadratureError (with the achieved
/// bound) if the requested relative accuracy cannot be certified.
DecayResult variance_quadrature(const PulseSequence& seq, const NoiseSpectrum& spec,
                                double rel_tol = 1e-7);

/// Long-time restricted-regime approximation
///   variance_half ~ dw2 tau_c (TE - (1 + 2N) tau_c),
/// valid for x, y >> tau_c. Requires a single-component spectrum.
struct AsymptoteResult {
    DecayResult decay;
    double shift_term = 0.0;      // (1 + 2N) dw2 tau_c^2
    bool within_validity = true;  // x >= 5 tau_c and y >= 5 tau_c
};
AsymptoteResult restricted_asymptote(const PulseSequence& seq, const NoiseSpectrum& spec);

/// Fixed-TE contrast between the CPMG and Hahn endpoints:
///   dM/M_Hahn = exp(2 (N-1) dw2 tau_c^2) - 1,
/// reported both in closed form and numerically from variance_exact.
/// exponent = ln(ratio + 1) = 2 (N-1) dw2 tau_c^2 is the size-sensitive
/// shift term. Requires a single-component spectrum.
struct DeltaMSdr {
    double ratio_closed_form = 0.0;
    double ratio_numeric = 0.0;
    double exponent = 0.0;
};
DeltaMSdr delta_m_sdr(int n_pulses, const NoiseSpectrum& spec, double te);

/// Product split M_SDR = M_cpmg * M_hahn * M_cross of an N >= 2 sequence:
/// the leading equispaced block evaluated alone, the trailing single-pulse
/// block evaluated alone, and the interference factor. The three variance
/// contributions sum to variance_exact of the full sequence.
struct SdrFactors {
    DecayResult total;
    double variance_cpmg = 0.0;
    double variance_hahn = 0.0;
    double variance_cross = 0.0;
    double m_cpmg = 1.0;
    double m_hahn = 1.0;
    double m_cross = 1.0;
};
SdrFactors sdr_decay(const PulseSequence& seq, const NoiseSpectrum& spec);

/// Ordered samples of a fixed-(TE, N, G) scan over the x delay; the unit
/// the fitter consumes.
struct DecayCurve {
    std::vector<double> x_values; // s, strictly increasing
    std::vector<double> signal;
    double te = 0.0;
    int n_pulses = 0;
    AcquisitionParams acq;
};

/// Forward scan M_SDR(x) at fixed TE and N. Invalid x values propagate
/// TimingError. A positive acq.t2 applies a uniform exp(-TE/T2) factor.
DecayCurve sdr_scan(int n_pulses, double te, const NoiseSpectrum& spec,
                    const std::vector<double>& x_values, const AcquisitionParams& acq);

}  // namespace sdr
