#pragma once

#include <cstdint>
#include <vector>

#include "sdr/noise.hpp"
#include "sdr/sequence.hpp"

namespace sdr {

/// Ensemble description for the random-walk oracle. dt must satisfy both
/// dt <= tau_c/50 and sqrt(2 dim D0 dt) <= d/10 for restricted geometries.
struct WalkSpec {
    Geometry geometry;
    double dt = 0.0;          // s
    std::size_t n_walkers = 0;
    std::uint64_t seed = 0;
    double duration = 0.0;    // s
};

/// Largest dt satisfying the WalkSpec invariants (infinite for free
/// diffusion, where only duration constrains the step).
double max_stable_dt(const Geometry& geom);

/// Throws StepSizeError (with a suggested dt) when the invariants fail.
void validate_walk_spec(const WalkSpec& spec);

struct EnsembleSignal {
    std::vector<double> times;         // s (or scanned x delays, per caller)
    std::vector<double> magnetization; // ensemble mean of cos(phi)
    std::vector<double> stderr_mean;   // sample std / sqrt(n)
    std::vector<double> imag_part;     // ensemble mean of sin(phi), diagnostic
};

struct MsdCurve {
    std::vector<double> times;  // s
    std::vector<double> msd;    // m^2, along the gradient axis
    std::vector<double> stderr_mean;
};

struct AutocorrCurve {
    std::vector<double> lags;   // s
    std::vector<double> g;      // rad^2/s^2
    std::vector<double> stderr_mean;
};

/// Mean square displacement along the gradient axis at n_samples equally
/// spaced times in (0, duration].
MsdCurve simulate_msd(const WalkSpec& spec, int n_samples = 64, int n_workers = 0);

/// Stationary estimate of g(tau) = gamma^2 G^2 <dx(t) dx(t+tau)> by time-and-
/// ensemble averaging after a 5 tau_c burn-in. Requires duration >= 20 tau_c
/// (BurnInError otherwise); lags cover [0, 5 tau_c].
AutocorrCurve simulate_autocorrelation(const WalkSpec& spec, const AcquisitionParams& acq,
                                       int n_workers = 0);

/// Magnetization decay for a batch of pulse trains evaluated on one shared
/// trajectory ensemble. Phase is accumulated per substep with midpoint
/// positions and exact splits at pulse times and at each train's TE.
EnsembleSignal simulate_decay(const WalkSpec& spec, const std::vector<PulseSequence>& seqs,
                              const AcquisitionParams& acq, int n_workers = 0);

/// Single-sequence convenience overload.
EnsembleSignal simulate_decay(const WalkSpec& spec, const PulseSequence& seq,
                              const AcquisitionParams& acq, int n_workers = 0);

/// SDR x-scan at fixed (N, TE); times in the result hold the x delays.
EnsembleSignal simulate_sdr_scan(const WalkSpec& spec, int n_pulses, double te,
                                 const std::vector<double>& x_values,
                                 const AcquisitionParams& acq, int n_workers = 0);

}  // namespace sdr
