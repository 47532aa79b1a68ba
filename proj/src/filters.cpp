#include "sdr/filters.hpp"

#include <cmath>

#include "sdr/errors.hpp"

namespace sdr {

namespace {

// sin(x)/x with the small-argument series
double sinc(double x) {
    if (std::abs(x) < 1e-6) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
    }
    return std::sin(x) / x;
}

}  // namespace

std::complex<double> filter(const ModulationFunction& f, double omega) {
    // Per segment [a,b] of sign s:
    //   integral s exp(-i w t) dt = s L sinc(wL/2) exp(-i w (a+b)/2)
    // which is regular at w = 0 and free of 1/w cancellation.
    std::complex<double> acc{0.0, 0.0};
    const int n = f.n_segments();
    for (int k = 0; k < n; ++k) {
        const double a = f.boundaries[k];
        const double b = f.boundaries[k + 1];
        const double len = b - a;
        const double mid = 0.5 * (a + b);
        const double amp = f.segment_sign(k) * len * sinc(0.5 * omega * len);
        acc += amp * std::polar(1.0, -omega * mid);
    }
    return acc;
}

BoundaryCoefficients boundary_coefficients(const ModulationFunction& f) {
    BoundaryCoefficients bc;
    const int n = f.n_segments();
    bc.times.reserve(n + 1);
    bc.coeffs.reserve(n + 1);
    bc.times.push_back(f.boundaries.front());
    bc.coeffs.push_back(f.segment_sign(0));
    for (int k = 1; k < n; ++k) {
        bc.times.push_back(f.boundaries[k]);
        bc.coeffs.push_back(f.segment_sign(k) - f.segment_sign(k - 1));
    }
    bc.times.push_back(f.boundaries.back());
    bc.coeffs.push_back(-f.segment_sign(n - 1));
    return bc;
}

SdrFilterTerms sdr_filter_squared(const PulseSequence& seq, double omega) {
    const SdrDecomposition parts = decompose(seq);

    const std::complex<double> fc = filter(parts.cpmg_part, omega);
    const std::complex<double> fh = filter(parts.hahn_part, omega);

    SdrFilterTerms terms;
    terms.cpmg_sq = std::norm(fc);
    terms.hahn_sq = std::norm(fh);
    // interference of the shifted single-pulse block with the leading block;
    // the shift (N-1)x equals TE - y
    const double shift = seq.total_time - seq.y_delay;
    const std::complex<double> phase = std::polar(1.0, omega * shift);
    terms.cross = parts.parity * 2.0 * std::real(phase * fc * std::conj(fh));
    return terms;
}

}  // namespace sdr
