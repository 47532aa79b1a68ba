#pragma once

#include <complex>
#include <vector>

#include "sdr/sequence.hpp"

namespace sdr {

/// Filter function F(omega) = integral f(t) exp(-i omega t) dt, units of
/// seconds. Evaluated segment by segment in closed form; omega = 0 is the
/// analytic limit (the signed area, zero for any refocused train).
std::complex<double> filter(const ModulationFunction& f, double omega);

/// Boundary representation F(omega) = (1/(i omega)) sum_j c_j exp(-i omega b_j):
/// c = +1 at t=0, -+2 at each pulse time, and -(final sign) at t=duration.
/// Used for tail estimates of integrals against |F|^2.
struct BoundaryCoefficients {
    std::vector<double> times;
    std::vector<double> coeffs;
};
BoundaryCoefficients boundary_coefficients(const ModulationFunction& f);

/// The three terms of |F_SDR|^2 at one frequency: the equispaced block,
/// the single-pulse block, and their interference. total() reproduces
/// |filter(modulation(seq), omega)|^2.
struct SdrFilterTerms {
    double cpmg_sq = 0.0;
    double hahn_sq = 0.0;
    double cross = 0.0;
    double total() const { return cpmg_sq + hahn_sq + cross; }
};

/// Throws DecompositionError for N = 1.
SdrFilterTerms sdr_filter_squared(const PulseSequence& seq, double omega);

}  // namespace sdr
