#include "sdr/decay.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sdr/errors.hpp"
#include "sdr/filters.hpp"
#include "sdr/quadrature.hpp"

namespace sdr {

namespace {

constexpr double kPi = std::numbers::pi;

struct Segment {
    double a, b;
    int sign;
    double len() const { return b - a; }
};

std::vector<Segment> segments_of(const ModulationFunction& f) {
    std::vector<Segment> segs;
    segs.reserve(static_cast<std::size_t>(f.n_segments()));
    for (int k = 0; k < f.n_segments(); ++k)
        segs.push_back({f.boundaries[k], f.boundaries[k + 1], f.segment_sign(k)});
    return segs;
}

// integral of exp(-|t-u|/tau) over [a,b]^2
double pair_same(double len, double tau) {
    return 2.0 * tau * (len + tau * std::expm1(-len / tau));
}

// integral of exp(-(u-t)/tau) for t in the earlier segment, u in the later
// one; gap >= 0 is the separation between them. expm1 keeps every factor
// fully accurate when lengths are small against tau.
double pair_disjoint(double gap, double len1, double len2, double tau) {
    const double e = std::exp(-gap / tau);
    if (e == 0.0) return 0.0;
    return tau * tau * e * std::expm1(-len1 / tau) * std::expm1(-len2 / tau);
}

double variance_segments(const std::vector<Segment>& segs, const NoiseSpectrum& spec) {
    double total = 0.0;
    const std::size_t n = segs.size();
    for (const auto& comp : spec.components) {
        const double tau = comp.tau;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += pair_same(segs[i].len(), tau);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double gap = segs[j].a - segs[i].b;
                if (gap > 46.0 * tau) break; // exp underflow; gaps grow with j
                const double val = pair_disjoint(gap, segs[i].len(), segs[j].len(), tau);
                acc += 2.0 * segs[i].sign * segs[j].sign * val;
            }
        }
        total += comp.weight * acc;
    }
    return 0.5 * spec.delta_omega_sq * total;
}

// cross-block variance: every (earlier, later) segment pair taken across the
// two lists, both in absolute time
double variance_cross_segments(const std::vector<Segment>& left,
                               const std::vector<Segment>& right,
                               const NoiseSpectrum& spec) {
    double total = 0.0;
    for (const auto& comp : spec.components) {
        const double tau = comp.tau;
        double acc = 0.0;
        for (const auto& li : left) {
            for (const auto& rj : right) {
                const double gap = rj.a - li.b;
                if (gap > 46.0 * tau) break;
                acc += li.sign * rj.sign * pair_disjoint(gap, li.len(), rj.len(), tau);
            }
        }
        total += comp.weight * acc;
    }
    return spec.delta_omega_sq * total;
}

double require_single_tau(const NoiseSpectrum& spec, const char* who) {
    if (spec.components.size() != 1) {
        std::ostringstream msg;
        msg << who << " requires a single-component spectrum, got "
            << spec.components.size() << " components";
        throw Error(msg.str());
    }
    return spec.components.front().tau;
}

// ---- spectral-route tail pieces ------------------------------------------
//
// Beyond the quadrature cutoff the integrand is written as
//   S(w) |F(w)|^2 = sum_k (c_k tau_k / pi) [ A + 2 sum_{j<l} c_j c_l
//                    cos(w d_jl) ] h_k(w),
// with h(w) = 1/(w^2 (1 + w^2 tau^2)) and A = sum_j c_j^2. The flat part has
// a closed form; the oscillatory part gets its two leading integration-by-
// parts boundary terms. h is convex, so the next term is bounded by
// |h'(w)|/d^2.

double h_fn(double w, double tau) {
    const double wt = w * tau;
    return 1.0 / (w * w * (1.0 + wt * wt));
}

double h_prime(double w, double tau) {
    const double wt2 = w * tau * w * tau;
    const double den = 1.0 + wt2;
    return -2.0 / (w * w * w * den) - 2.0 * tau * tau / (w * den * den);
}

// integral of h over [w, inf)
double h_tail(double w, double tau) {
    return 1.0 / w - tau * std::atan(1.0 / (w * tau));
}

struct TailPair {
    double delta;
    double coeff; // c_j * c_l
};

struct TailEstimate {
    double value = 0.0;
    double bound = 0.0; // rigorous bound on the truncation remainder
};

TailEstimate tail_at(double omega, const NoiseSpectrum& spec, double coeff_sq_sum,
                     const std::vector<TailPair>& pairs) {
    TailEstimate out;
    for (const auto& comp : spec.components) {
        const double tau = comp.tau;
        const double pref = comp.weight * tau / kPi;
        const double h = h_fn(omega, tau);
        const double hp = h_prime(omega, tau);
        double osc = 0.0, osc_bound = 0.0;
        for (const auto& p : pairs) {
            const double s = std::sin(omega * p.delta);
            const double c = std::cos(omega * p.delta);
            osc += 2.0 * p.coeff *
                   (-s * h / p.delta - c * hp / (p.delta * p.delta));
            osc_bound += 2.0 * std::abs(p.coeff) * std::abs(hp) / (p.delta * p.delta);
        }
        out.value += pref * (coeff_sq_sum * h_tail(omega, tau) + osc);
        out.bound += pref * osc_bound;
    }
    return out;
}

}  // namespace

DecayResult DecayResult::from_variance(double v) { return {v, std::exp(-v)}; }

DecayResult variance_exact(const ModulationFunction& f, const NoiseSpectrum& spec) {
    return DecayResult::from_variance(variance_segments(segments_of(f), spec));
}

DecayResult variance_exact(const PulseSequence& seq, const NoiseSpectrum& spec) {
    return variance_exact(modulation(seq), spec);
}

DecayResult variance_quadrature(const PulseSequence& seq, const NoiseSpectrum& spec,
                                double rel_tol) {
    if (spec.delta_omega_sq == 0.0) return DecayResult::from_variance(0.0);

    const ModulationFunction f = modulation(seq);
    const double te = seq.total_time;
    const auto bc = boundary_coefficients(f);

    double coeff_sq_sum = 0.0;
    for (double c : bc.coeffs) coeff_sq_sum += c * c;

    std::vector<TailPair> pairs;
    pairs.reserve(bc.times.size() * (bc.times.size() - 1) / 2);
    for (std::size_t j = 0; j < bc.times.size(); ++j)
        for (std::size_t l = j + 1; l < bc.times.size(); ++l)
            pairs.push_back({bc.times[l] - bc.times[j], bc.coeffs[j] * bc.coeffs[l]});

    const auto integrand = [&](double w) { return s_of_omega(spec, w) * std::norm(filter(f, w)); };

    // panel width keeps the fastest oscillation (period 2 pi / TE) resolved
    const double width = 12.0 / te;
    const double omega_floor =
        std::max(100.0 * seq.n_pulses / te, 64.0 * kPi / te);

    const auto make_breaks = [&](double lo, double hi) {
        std::vector<double> brk;
        brk.push_back(lo);
        if (lo == 0.0) // seed the Lorentzian knees so low-frequency mass is seen
            for (const auto& comp : spec.components)
                for (double m : {0.3, 1.0, 3.0}) {
                    const double knee = m / comp.tau;
                    if (knee < std::min(hi, width)) brk.push_back(knee);
                }
        const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
        for (int i = 1; i <= n; ++i) brk.push_back(lo + (hi - lo) * i / n);
        std::sort(brk.begin(), brk.end());
        brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
        return brk;
    };

    double omega_max = omega_floor;
    QuadratureResult quad =
        integrate_adaptive(integrand, make_breaks(0.0, omega_max), 0.25 * rel_tol, 0.0);
    long evals = quad.evaluations;
    double numeric = quad.value;
    double numeric_err = quad.error;

    TailEstimate tail = tail_at(omega_max, spec, coeff_sq_sum, pairs);
    double estimate = numeric + tail.value;

    // extend the cutoff until the truncation remainder is certified small
    const int max_doublings = 24;
    const long eval_budget = 3000000;
    for (int i = 0; i < max_doublings && evals < eval_budget &&
                    tail.bound > 0.2 * rel_tol * std::abs(estimate);
         ++i) {
        const double next = 2.0 * omega_max;
        quad = integrate_adaptive(integrand, make_breaks(omega_max, next), 0.25 * rel_tol,
                                  0.02 * rel_tol * std::abs(estimate));
        evals += quad.evaluations;
        numeric += quad.value;
        numeric_err += quad.error;
        omega_max = next;
        tail = tail_at(omega_max, spec, coeff_sq_sum, pairs);
        estimate = numeric + tail.value;
    }

    const double achieved = (numeric_err + tail.bound) / std::max(std::abs(estimate), 1e-300);
    if (achieved > rel_tol) {
        std::ostringstream msg;
        msg << "spectral quadrature did not converge: achieved relative bound " << achieved
            << " > requested " << rel_tol << " after " << evals << " evaluations";
        throw QuadratureError(msg.str());
    }

    return DecayResult::from_variance(spec.delta_omega_sq * estimate);
}

AsymptoteResult restricted_asymptote(const PulseSequence& seq, const NoiseSpectrum& spec) {
    const double tau = require_single_tau(spec, "restricted_asymptote");
    const double dw2 = spec.delta_omega_sq;
    const int n = seq.n_pulses;

    AsymptoteResult out;
    out.shift_term = (1.0 + 2.0 * n) * dw2 * tau * tau;
    out.decay = DecayResult::from_variance(dw2 * tau * seq.total_time - out.shift_term);
    out.within_validity = seq.y_delay >= 5.0 * tau && (n == 1 || seq.x_delay >= 5.0 * tau);
    return out;
}

DeltaMSdr delta_m_sdr(int n_pulses, const NoiseSpectrum& spec, double te) {
    const double tau = require_single_tau(spec, "delta_m_sdr");
    const double dw2 = spec.delta_omega_sq;

    DeltaMSdr out;
    out.exponent = 2.0 * (n_pulses - 1) * dw2 * tau * tau;
    out.ratio_closed_form = std::expm1(out.exponent);

    const double vh = variance_exact(build_hahn(te), spec).variance_half;
    const double vc = variance_exact(build_cpmg(n_pulses, te), spec).variance_half;
    out.ratio_numeric = std::expm1(vh - vc);
    return out;
}

SdrFactors sdr_decay(const PulseSequence& seq, const NoiseSpectrum& spec) {
    const SdrDecomposition parts = decompose(seq);
    const ModulationFunction full = modulation(seq);

    SdrFactors out;
    out.variance_cpmg = variance_segments(segments_of(parts.cpmg_part), spec);
    out.variance_hahn = variance_segments(segments_of(parts.hahn_part), spec);

    // absolute-time segment lists on either side of the block junction; the
    // leading block's times coincide with the full train, and the trailing
    // block is shifted by (N-1)x and carries the leading block's parity
    const double junction = seq.total_time - seq.y_delay;
    const std::vector<Segment> left = segments_of(parts.cpmg_part);
    ModulationFunction shifted = parts.hahn_part;
    for (double& b : shifted.boundaries) b += junction;
    std::vector<Segment> right = segments_of(shifted);
    for (auto& s : right) s.sign *= parts.parity;

    out.variance_cross = variance_cross_segments(left, right, spec);

    out.total = variance_exact(full, spec);
    out.m_cpmg = std::exp(-out.variance_cpmg);
    out.m_hahn = std::exp(-out.variance_hahn);
    out.m_cross = std::exp(-out.variance_cross);
    return out;
}

DecayCurve sdr_scan(int n_pulses, double te, const NoiseSpectrum& spec,
                    const std::vector<double>& x_values, const AcquisitionParams& acq) {
    DecayCurve curve;
    curve.te = te;
    curve.n_pulses = n_pulses;
    curve.acq = acq;
    curve.x_values = x_values;
    curve.signal.reserve(x_values.size());
    const double t2_factor = acq.t2 > 0.0 ? std::exp(-te / acq.t2) : 1.0;
    for (double x : x_values) {
        const PulseSequence seq = build_sdr(n_pulses, x, te);
        curve.signal.push_back(t2_factor * variance_exact(seq, spec).magnetization);
    }
    return curve;
}

}  // namespace sdr
