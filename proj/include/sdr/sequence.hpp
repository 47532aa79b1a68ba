#pragma once

#include <vector>

namespace sdr {

/// A pi-pulse train over a fixed evolution time TE.
///
/// The first N-1 pulses form an equispaced block (initial delay x/2, then
/// spacing x); the last pulse sits at TE - y/2, with TE = y + (N-1)x. The
/// special cases are CPMG (x = y = TE/N) and Hahn (N = 1, single pulse at
/// TE/2, y = TE).
struct PulseSequence {
    int n_pulses = 1;        // N >= 1
    double x_delay = 0.0;    // s; 0 and unused when N == 1
    double y_delay = 0.0;    // s
    double total_time = 0.0; // s (TE)

    /// Pulse times t_1 < ... < t_N, all strictly inside (0, TE).
    std::vector<double> pulse_times() const;
};

/// Piecewise-constant sign history f(t) in {-1,+1} imposed by a pulse train.
/// Segment k lives between boundaries[k] and boundaries[k+1] and carries
/// sign initial_sign * (-1)^k. A valid echo train has zero signed area.
struct ModulationFunction {
    std::vector<double> boundaries; // 0 = b_0 < b_1 < ... < b_M = duration
    int initial_sign = +1;

    double duration() const { return boundaries.back(); }
    int n_segments() const { return static_cast<int>(boundaries.size()) - 1; }
    int segment_sign(int k) const { return (k % 2 == 0) ? initial_sign : -initial_sign; }

    /// Sign at time t (right-continuous at the flips).
    double value(double t) const;

    double signed_area() const;
};

/// Build and validate an SDR sequence from (N, x, TE); y is derived from
/// TE = y + (N-1)x. For N = 1 the x argument is ignored and y = TE.
/// Throws TimingError when x is out of (0, TE/N] or the derived y is not
/// positive.
PulseSequence build_sdr(int n_pulses, double x_delay, double total_time);

/// CPMG: x = y = TE/N.
PulseSequence build_cpmg(int n_pulses, double total_time);

/// Hahn: single pulse at TE/2.
PulseSequence build_hahn(double total_time);

/// The +-1 modulation function of a sequence; boundaries are
/// {0, t_1, ..., t_N, TE}.
ModulationFunction modulation(const PulseSequence& seq);

/// Split of an SDR modulation into its equispaced (CPMG, over [0,(N-1)x])
/// and single-pulse (Hahn, over [0,y]) blocks. Reassembly is cpmg_part
/// followed by parity * hahn_part shifted by (N-1)x, with
/// parity = (-1)^(N-1).
struct SdrDecomposition {
    ModulationFunction cpmg_part;
    ModulationFunction hahn_part;
    int parity = +1;
};

/// Throws DecompositionError for N = 1 (no CPMG block).
SdrDecomposition decompose(const PulseSequence& seq);

}  // namespace sdr
