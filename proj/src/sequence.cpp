#include "sdr/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sdr/errors.hpp"

namespace sdr {

namespace {

[[noreturn]] void timing_fail(const std::string& what) { throw TimingError(what); }

}  // namespace

std::vector<double> PulseSequence::pulse_times() const {
    std::vector<double> t;
    t.reserve(static_cast<std::size_t>(n_pulses));
    if (n_pulses == 1) {
        t.push_back(total_time / 2.0);
        return t;
    }
    for (int i = 1; i <= n_pulses - 1; ++i)
        t.push_back((i - 0.5) * x_delay);
    t.push_back(total_time - y_delay / 2.0);
    return t;
}

double ModulationFunction::value(double t) const {
    if (t <= boundaries.front()) return initial_sign;
    if (t >= boundaries.back()) return segment_sign(n_segments() - 1);
    auto it = std::upper_bound(boundaries.begin(), boundaries.end(), t);
    int k = static_cast<int>(it - boundaries.begin()) - 1;
    return segment_sign(k);
}

double ModulationFunction::signed_area() const {
    double area = 0.0;
    for (int k = 0; k < n_segments(); ++k)
        area += segment_sign(k) * (boundaries[k + 1] - boundaries[k]);
    return area;
}

PulseSequence build_sdr(int n_pulses, double x_delay, double total_time) {
    if (n_pulses < 1) timing_fail("n_pulses must be >= 1");
    if (!(total_time > 0.0) || !std::isfinite(total_time))
        timing_fail("total_time must be positive and finite");

    PulseSequence seq;
    seq.n_pulses = n_pulses;
    seq.total_time = total_time;

    if (n_pulses == 1) {
        // Hahn: x unused by convention
        seq.x_delay = 0.0;
        seq.y_delay = total_time;
        return seq;
    }

    if (!(x_delay > 0.0) || !std::isfinite(x_delay))
        timing_fail("x_delay must be positive and finite for N >= 2");
    if (x_delay > total_time / n_pulses * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "x_delay " << x_delay << " exceeds TE/N = " << total_time / n_pulses
            << "; the final y block would be shorter than x";
        timing_fail(msg.str());
    }
    const double y = total_time - (n_pulses - 1) * x_delay;
    if (!(y > 0.0)) timing_fail("derived y delay is not positive");

    seq.x_delay = x_delay;
    seq.y_delay = y;
    return seq;
}

PulseSequence build_cpmg(int n_pulses, double total_time) {
    if (n_pulses == 1) return build_hahn(total_time);
    return build_sdr(n_pulses, total_time / n_pulses, total_time);
}

PulseSequence build_hahn(double total_time) { return build_sdr(1, 0.0, total_time); }

ModulationFunction modulation(const PulseSequence& seq) {
    ModulationFunction f;
    f.initial_sign = +1;
    f.boundaries.reserve(static_cast<std::size_t>(seq.n_pulses) + 2);
    f.boundaries.push_back(0.0);
    for (double t : seq.pulse_times()) f.boundaries.push_back(t);
    f.boundaries.push_back(seq.total_time);
    return f;
}

SdrDecomposition decompose(const PulseSequence& seq) {
    if (seq.n_pulses < 2)
        throw DecompositionError("cannot split an N = 1 sequence into CPMG and Hahn blocks");

    SdrDecomposition out;
    const double cpmg_span = (seq.n_pulses - 1) * seq.x_delay;
    out.cpmg_part = modulation(build_cpmg(seq.n_pulses - 1, cpmg_span));
    out.hahn_part = modulation(build_hahn(seq.y_delay));
    out.parity = (seq.n_pulses - 1) % 2 == 0 ? +1 : -1;
    return out;
}

}  // namespace sdr
