// Recomputes the tau_c coefficients (tau_c = coef * d^2 / D0) from Monte
// Carlo position autocorrelations: the integral timescale integral g / g(0)
// for slab / cylinder / sphere. The slab and sphere values hard-coded in
// sdr::tau_coef come from this estimate (they match the eigenmode expansion);
// the cylinder keeps the conventional 0.26^2 single-Lorentzian compromise,
// which this tool shows sitting ~8% below the integral timescale.

#include <cstdio>
#include <cstdlib>

#include "sdr/montecarlo.hpp"
#include "sdr/noise.hpp"

int main(int argc, char** argv) {
    const std::size_t walkers = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20000;
    const double d = 5e-6;
    const double d0 = 2.3e-9;

    sdr::AcquisitionParams acq;
    acq.gradient = 1.0; // arbitrary; cancels in the ratio

    std::printf("%-10s %-14s %-14s %-14s\n", "geometry", "mc_coef", "tabulated", "ratio");
    for (const auto kind :
         {sdr::GeometryKind::slab, sdr::GeometryKind::cylinder, sdr::GeometryKind::sphere}) {
        sdr::Geometry geom{kind, d, d0};
        const double tau_nominal = sdr::correlation_time(geom);

        sdr::WalkSpec spec;
        spec.geometry = geom;
        spec.dt = sdr::max_stable_dt(geom);
        spec.n_walkers = walkers;
        spec.seed = 20260809;
        spec.duration = 30.0 * tau_nominal;

        const auto curve = sdr::simulate_autocorrelation(spec, acq);

        // trapezoid integral timescale over the sampled lags
        double integral = 0.0;
        for (std::size_t i = 1; i < curve.lags.size(); ++i)
            integral += 0.5 * (curve.g[i] + curve.g[i - 1]) * (curve.lags[i] - curve.lags[i - 1]);
        const double tau_int = integral / curve.g[0];
        const double coef = tau_int * d0 / (d * d);

        double tabulated = 0.0;
        switch (kind) {
            case sdr::GeometryKind::slab: tabulated = sdr::tau_coef::slab; break;
            case sdr::GeometryKind::cylinder: tabulated = sdr::tau_coef::cylinder; break;
            case sdr::GeometryKind::sphere: tabulated = sdr::tau_coef::sphere; break;
            default: break;
        }
        std::printf("%-10s %-14.6f %-14.6f %-14.4f\n", sdr::to_string(kind), coef, tabulated,
                    coef / tabulated);
    }
    return 0;
}
