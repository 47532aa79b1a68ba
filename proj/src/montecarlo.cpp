#include "sdr/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "sdr/errors.hpp"
#include "sdr/rng.hpp"

namespace sdr {

double pairwise_sum(const double* data, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

namespace {

constexpr std::size_t kBlockWalkers = 256;
constexpr std::uint64_t kInitBlockBase = 1ull << 63;

int resolve_workers(int n) {
    if (n > 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Fixed-size walker blocks are handed to threads; every accumulator is
// per-block, so results are independent of the worker count and schedule.
template <typename Fn>
void parallel_blocks(std::size_t n_blocks, int workers, Fn&& fn) {
    const std::size_t w =
        std::min<std::size_t>(static_cast<std::size_t>(resolve_workers(workers)),
                              std::max<std::size_t>(n_blocks, 1));
    if (w <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t i = 0; i < w; ++i)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t b = next.fetch_add(1);
                if (b >= n_blocks) break;
                fn(b);
            }
        });
    for (auto& t : pool) t.join();
}

// ---- reflecting domains ----------------------------------------------------

struct FreeDomain {
    static constexpr int dim = 1;
    void init(const CounterRng&, std::uint64_t&, double* c) const {
        c[0] = 0.0; // translation invariant: only displacements matter
    }
    void step(const double* z, double s, double* c) const { c[0] += s * z[0]; }
};

struct SlabDomain {
    static constexpr int dim = 1;
    double h = 0.0; // half width

    void init(const CounterRng& rng, std::uint64_t& blk, double* c) const {
        const auto u = rng.uniform_pair(blk++);
        c[0] = (2.0 * u[0] - 1.0) * h;
    }
    void step(const double* z, double s, double* c) const {
        double p = c[0] + s * z[0];
        while (p > h || p < -h) p = (p > h) ? 2.0 * h - p : -2.0 * h - p;
        assert(std::abs(p) <= h);
        c[0] = p;
    }
};

template <int Dim>
struct RoundDomain {
    static constexpr int dim = Dim;
    double a = 0.0;
    double a2 = 0.0;

    void init(const CounterRng& rng, std::uint64_t& blk, double* c) const {
        for (;;) {
            double u[3] = {0.0, 0.0, 0.0};
            const auto p1 = rng.uniform_pair(blk++);
            u[0] = 2.0 * p1[0] - 1.0;
            u[1] = 2.0 * p1[1] - 1.0;
            if constexpr (Dim == 3) {
                const auto p2 = rng.uniform_pair(blk++);
                u[2] = 2.0 * p2[0] - 1.0;
            }
            double r2 = 0.0;
            for (int i = 0; i < Dim; ++i) r2 += u[i] * u[i];
            if (r2 < 1.0) {
                for (int i = 0; i < Dim; ++i) c[i] = a * u[i];
                return;
            }
        }
    }

    void step(const double* z, double s, double* c) const {
        double r0[Dim], v[Dim], p[Dim];
        for (int i = 0; i < Dim; ++i) {
            r0[i] = c[i];
            v[i] = s * z[i];
            p[i] = r0[i] + v[i];
        }
        int guard = 0;
        while (norm2(p) > a2) {
            // specular bounce at the first wall crossing along v
            double A = 0.0, B = 0.0, C = -a2;
            for (int i = 0; i < Dim; ++i) {
                A += v[i] * v[i];
                B += r0[i] * v[i];
                C += r0[i] * r0[i];
            }
            const double disc = std::max(B * B - A * C, 0.0);
            const double t = std::clamp((-B + std::sqrt(disc)) / A, 0.0, 1.0);
            double q[Dim], nrm[Dim];
            for (int i = 0; i < Dim; ++i) q[i] = r0[i] + t * v[i];
            const double qn = std::sqrt(norm2(q));
            for (int i = 0; i < Dim; ++i) nrm[i] = q[i] / qn;
            double rem[Dim];
            double rn = 0.0;
            for (int i = 0; i < Dim; ++i) rem[i] = p[i] - q[i];
            for (int i = 0; i < Dim; ++i) rn += rem[i] * nrm[i];
            for (int i = 0; i < Dim; ++i) {
                rem[i] -= 2.0 * rn * nrm[i];
                r0[i] = q[i];
                p[i] = q[i] + rem[i];
                v[i] = rem[i];
            }
            if (++guard > 64) {
                // floating-point corner (tangent hit); pull radially inside
                const double pn = std::sqrt(norm2(p));
                const double scale = a * (1.0 - 1e-12) / pn;
                for (int i = 0; i < Dim; ++i) p[i] *= scale;
                break;
            }
        }
        assert(norm2(p) <= a2 * (1.0 + 1e-9));
        for (int i = 0; i < Dim; ++i) c[i] = p[i];
    }

    static double norm2(const double* x) {
        double s = 0.0;
        for (int i = 0; i < Dim; ++i) s += x[i] * x[i];
        return s;
    }
};

template <int Dim>
void draw_normals(const CounterRng& rng, std::uint64_t step, double* z) {
    const auto n1 = rng.normal_pair(2 * step);
    z[0] = n1[0];
    if constexpr (Dim >= 2) z[1] = n1[1];
    if constexpr (Dim == 3) {
        const auto n2 = rng.normal_pair(2 * step + 1);
        z[2] = n2[0];
    }
}

std::size_t step_count(double duration, double horizon, double dt) {
    return static_cast<std::size_t>(std::ceil(std::max(duration, horizon) / dt - 1e-9));
}

double reduce_blocks(std::vector<double>& scratch, const std::vector<double>& per_block,
                     std::size_t n_blocks, std::size_t stride, std::size_t offset) {
    scratch.resize(n_blocks);
    for (std::size_t b = 0; b < n_blocks; ++b) scratch[b] = per_block[b * stride + offset];
    return pairwise_sum(scratch.data(), n_blocks);
}

void mean_and_stderr(const std::vector<double>& acc, std::size_t n_blocks, std::size_t n_out,
                     std::size_t n_samples, std::vector<double>& mean,
                     std::vector<double>& se) {
    std::vector<double> scratch;
    mean.resize(n_out);
    se.resize(n_out);
    const double n = static_cast<double>(n_samples);
    for (std::size_t k = 0; k < n_out; ++k) {
        const double s1 = reduce_blocks(scratch, acc, n_blocks, 2 * n_out, 2 * k);
        const double s2 = reduce_blocks(scratch, acc, n_blocks, 2 * n_out, 2 * k + 1);
        mean[k] = s1 / n;
        const double var = n > 1.5 ? std::max(0.0, (s2 - s1 * s1 / n) / (n - 1.0)) : 0.0;
        se[k] = std::sqrt(var / n);
    }
}

// ---- decay -----------------------------------------------------------------

struct SeqPlan {
    double te = 0.0;
    std::vector<double> flips;
};

struct SeqState {
    double psi = 0.0; // integral of f(t) x(t) dt; phase per unit gamma*G
    double sign = 1.0;
    std::size_t next_flip = 0;
    bool done = false;
};

template <typename Dom>
void run_decay(const WalkSpec& spec, const Dom& dom, const std::vector<SeqPlan>& plans,
               double gamma_g, int workers, EnsembleSignal& out) {
    const std::size_t n_seq = plans.size();
    const std::size_t n_walk = spec.n_walkers;
    const std::size_t n_blocks = (n_walk + kBlockWalkers - 1) / kBlockWalkers;
    double max_te = 0.0;
    for (const auto& p : plans) max_te = std::max(max_te, p.te);
    const std::size_t n_steps = step_count(spec.duration, max_te, spec.dt);
    const double dt = spec.dt;
    const double sigma = std::sqrt(2.0 * spec.geometry.d0 * dt);

    // per block and sequence: sum cos, sum cos^2, sum sin
    std::vector<double> acc(n_blocks * n_seq * 3, 0.0);

    parallel_blocks(n_blocks, workers, [&](std::size_t b) {
        std::vector<SeqState> st(n_seq);
        double* blk = acc.data() + b * n_seq * 3;
        const std::size_t w0 = b * kBlockWalkers;
        const std::size_t w1 = std::min(w0 + kBlockWalkers, n_walk);
        for (std::size_t w = w0; w < w1; ++w) {
            const CounterRng rng(spec.seed, w);
            double c[3] = {0.0, 0.0, 0.0};
            std::uint64_t init_blk = kInitBlockBase;
            dom.init(rng, init_blk, c);
            std::fill(st.begin(), st.end(), SeqState{});

            for (std::size_t s = 0; s < n_steps; ++s) {
                const double t0 = static_cast<double>(s) * dt;
                const double t1 = t0 + dt;
                const double x0 = c[0];
                double z[3];
                draw_normals<Dom::dim>(rng, s, z);
                dom.step(z, sigma, c);
                const double slope = (c[0] - x0) / dt;

                for (std::size_t k = 0; k < n_seq; ++k) {
                    SeqState& ss = st[k];
                    if (ss.done) continue;
                    const SeqPlan& plan = plans[k];
                    const double end = std::min(t1, plan.te);
                    double cursor = t0;
                    for (;;) {
                        while (ss.next_flip < plan.flips.size() &&
                               plan.flips[ss.next_flip] <= cursor) {
                            ss.sign = -ss.sign;
                            ++ss.next_flip;
                        }
                        const double stop = (ss.next_flip < plan.flips.size() &&
                                             plan.flips[ss.next_flip] < end)
                                                ? plan.flips[ss.next_flip]
                                                : end;
                        if (stop > cursor) {
                            const double mid = 0.5 * (cursor + stop);
                            const double xm = x0 + (mid - t0) * slope;
                            ss.psi += ss.sign * xm * (stop - cursor);
                            cursor = stop;
                        }
                        if (cursor >= end) break;
                    }
                    if (t1 >= plan.te) ss.done = true;
                }
            }

            for (std::size_t k = 0; k < n_seq; ++k) {
                const double phi = gamma_g * st[k].psi;
                const double cp = std::cos(phi);
                blk[3 * k + 0] += cp;
                blk[3 * k + 1] += cp * cp;
                blk[3 * k + 2] += std::sin(phi);
            }
        }
    });

    std::vector<double> scratch;
    out.magnetization.resize(n_seq);
    out.stderr_mean.resize(n_seq);
    out.imag_part.resize(n_seq);
    const double n = static_cast<double>(n_walk);
    for (std::size_t k = 0; k < n_seq; ++k) {
        const double s1 = reduce_blocks(scratch, acc, n_blocks, 3 * n_seq, 3 * k);
        const double s2 = reduce_blocks(scratch, acc, n_blocks, 3 * n_seq, 3 * k + 1);
        const double ss = reduce_blocks(scratch, acc, n_blocks, 3 * n_seq, 3 * k + 2);
        out.magnetization[k] = s1 / n;
        const double var = n > 1.5 ? std::max(0.0, (s2 - s1 * s1 / n) / (n - 1.0)) : 0.0;
        out.stderr_mean[k] = std::sqrt(var / n);
        out.imag_part[k] = ss / n;
    }
}

// ---- MSD -------------------------------------------------------------------

template <typename Dom>
void run_msd(const WalkSpec& spec, const Dom& dom, const std::vector<std::size_t>& sample_steps,
             int workers, MsdCurve& out) {
    const std::size_t n_out = sample_steps.size();
    const std::size_t n_walk = spec.n_walkers;
    const std::size_t n_blocks = (n_walk + kBlockWalkers - 1) / kBlockWalkers;
    const std::size_t n_steps = sample_steps.back();
    const double sigma = std::sqrt(2.0 * spec.geometry.d0 * spec.dt);

    std::vector<double> acc(n_blocks * n_out * 2, 0.0);

    parallel_blocks(n_blocks, workers, [&](std::size_t b) {
        double* blk = acc.data() + b * n_out * 2;
        const std::size_t w0 = b * kBlockWalkers;
        const std::size_t w1 = std::min(w0 + kBlockWalkers, n_walk);
        for (std::size_t w = w0; w < w1; ++w) {
            const CounterRng rng(spec.seed, w);
            double c[3] = {0.0, 0.0, 0.0};
            std::uint64_t init_blk = kInitBlockBase;
            dom.init(rng, init_blk, c);
            const double x_init = c[0];
            std::size_t next_sample = 0;
            for (std::size_t s = 0; s < n_steps && next_sample < n_out; ++s) {
                double z[3];
                draw_normals<Dom::dim>(rng, s, z);
                dom.step(z, sigma, c);
                if (s + 1 == sample_steps[next_sample]) {
                    const double dx = c[0] - x_init;
                    const double d2 = dx * dx;
                    blk[2 * next_sample + 0] += d2;
                    blk[2 * next_sample + 1] += d2 * d2;
                    ++next_sample;
                }
            }
        }
    });

    mean_and_stderr(acc, n_blocks, n_out, n_walk, out.msd, out.stderr_mean);
    out.times.resize(n_out);
    for (std::size_t k = 0; k < n_out; ++k)
        out.times[k] = static_cast<double>(sample_steps[k]) * spec.dt;
}

// ---- autocorrelation --------------------------------------------------------

template <typename Dom>
void run_autocorr(const WalkSpec& spec, const Dom& dom, std::size_t burn_steps,
                  std::size_t stride, std::size_t n_rec, std::size_t n_lags, double gg2,
                  int workers, AutocorrCurve& out) {
    const std::size_t n_walk = spec.n_walkers;
    const std::size_t n_blocks = (n_walk + kBlockWalkers - 1) / kBlockWalkers;
    const std::size_t n_steps = burn_steps + (n_rec - 1) * stride;
    const double sigma = std::sqrt(2.0 * spec.geometry.d0 * spec.dt);

    std::vector<double> acc(n_blocks * n_lags * 2, 0.0);

    parallel_blocks(n_blocks, workers, [&](std::size_t b) {
        std::vector<double> series(n_rec);
        double* blk = acc.data() + b * n_lags * 2;
        const std::size_t w0 = b * kBlockWalkers;
        const std::size_t w1 = std::min(w0 + kBlockWalkers, n_walk);
        for (std::size_t w = w0; w < w1; ++w) {
            const CounterRng rng(spec.seed, w);
            double c[3] = {0.0, 0.0, 0.0};
            std::uint64_t init_blk = kInitBlockBase;
            dom.init(rng, init_blk, c);
            std::size_t rec = 0;
            for (std::size_t s = 0; s < n_steps; ++s) {
                if (s == burn_steps && rec == 0) series[rec++] = c[0];
                double z[3];
                draw_normals<Dom::dim>(rng, s, z);
                dom.step(z, sigma, c);
                const std::size_t done = s + 1;
                if (done >= burn_steps && (done - burn_steps) % stride == 0 && rec < n_rec)
                    series[rec++] = c[0];
            }
            // time-averaged lag products for this walker (domain mean is zero)
            for (std::size_t l = 0; l < n_lags; ++l) {
                double sum = 0.0;
                const std::size_t m = n_rec - l;
                for (std::size_t i = 0; i < m; ++i) sum += series[i] * series[i + l];
                const double mval = sum / static_cast<double>(m);
                blk[2 * l + 0] += mval;
                blk[2 * l + 1] += mval * mval;
            }
        }
    });

    std::vector<double> mean, se;
    mean_and_stderr(acc, n_blocks, n_lags, n_walk, mean, se);
    out.lags.resize(n_lags);
    out.g.resize(n_lags);
    out.stderr_mean.resize(n_lags);
    for (std::size_t l = 0; l < n_lags; ++l) {
        out.lags[l] = static_cast<double>(l * stride) * spec.dt;
        out.g[l] = gg2 * mean[l];
        out.stderr_mean[l] = gg2 * se[l];
    }
}

template <typename Fn>
auto with_domain(const Geometry& geom, Fn&& fn) {
    switch (geom.kind) {
        case GeometryKind::free_space: return fn(FreeDomain{});
        case GeometryKind::slab: return fn(SlabDomain{geom.size_d / 2.0});
        case GeometryKind::cylinder: {
            const double a = geom.size_d / 2.0;
            return fn(RoundDomain<2>{a, a * a});
        }
        case GeometryKind::sphere: {
            const double a = geom.size_d / 2.0;
            return fn(RoundDomain<3>{a, a * a});
        }
    }
    throw Error("unknown geometry kind");
}

}  // namespace

double max_stable_dt(const Geometry& geom) {
    if (!geom.restricted()) return std::numeric_limits<double>::infinity();
    const double tau_c = correlation_time(geom);
    const double d = geom.size_d;
    const int dim = geom.walk_dimensions();
    const double step_rule = d * d / (200.0 * dim * geom.d0);
    return std::min(tau_c / 50.0, step_rule);
}

void validate_walk_spec(const WalkSpec& spec) {
    if (spec.n_walkers < 1) throw Error("n_walkers must be >= 1");
    if (!(spec.dt > 0.0)) throw StepSizeError("dt must be positive");
    if (!(spec.duration >= spec.dt)) throw Error("duration must cover at least one step");
    if (!(spec.geometry.d0 > 0.0)) throw Error("d0 must be positive");
    if (spec.geometry.restricted()) {
        const double dt_max = max_stable_dt(spec.geometry);
        if (spec.dt > dt_max * (1.0 + 1e-12)) {
            std::ostringstream msg;
            msg << "dt = " << spec.dt << " s violates the step-size invariants "
                << "(tau_c/50 and sqrt(2 dim D0 dt) <= d/10); use dt <= " << dt_max << " s";
            throw StepSizeError(msg.str());
        }
    }
}

MsdCurve simulate_msd(const WalkSpec& spec, int n_samples, int n_workers) {
    validate_walk_spec(spec);
    if (n_samples < 1) throw Error("n_samples must be >= 1");
    const std::size_t n_steps = step_count(spec.duration, 0.0, spec.dt);
    std::vector<std::size_t> sample_steps;
    sample_steps.reserve(static_cast<std::size_t>(n_samples));
    for (int i = 1; i <= n_samples; ++i) {
        const std::size_t s = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(
                   static_cast<double>(i) * static_cast<double>(n_steps) / n_samples)));
        if (sample_steps.empty() || s > sample_steps.back()) sample_steps.push_back(s);
    }
    MsdCurve out;
    with_domain(spec.geometry, [&](auto dom) { run_msd(spec, dom, sample_steps, n_workers, out); });
    return out;
}

AutocorrCurve simulate_autocorrelation(const WalkSpec& spec, const AcquisitionParams& acq,
                                       int n_workers) {
    validate_walk_spec(spec);
    const double tau_c = correlation_time(spec.geometry); // free geometry rejected here
    if (spec.duration < 20.0 * tau_c) {
        std::ostringstream msg;
        msg << "autocorrelation needs duration >= 20 tau_c = " << 20.0 * tau_c << " s, got "
            << spec.duration << " s";
        throw BurnInError(msg.str());
    }
    const std::size_t burn_steps =
        static_cast<std::size_t>(std::ceil(5.0 * tau_c / spec.dt));
    const std::size_t stride =
        std::max<std::size_t>(1, static_cast<std::size_t>(tau_c / (10.0 * spec.dt)));
    const std::size_t n_steps = step_count(spec.duration, 0.0, spec.dt);
    const std::size_t n_rec = (n_steps - burn_steps) / stride + 1;
    const std::size_t max_lag_steps =
        static_cast<std::size_t>(5.0 * tau_c / (static_cast<double>(stride) * spec.dt));
    const std::size_t n_lags = std::min(n_rec - 1, max_lag_steps) + 1;

    const double gg = acq.gamma * acq.gradient;
    AutocorrCurve out;
    with_domain(spec.geometry, [&](auto dom) {
        run_autocorr(spec, dom, burn_steps, stride, n_rec, n_lags, gg * gg, n_workers, out);
    });
    return out;
}

EnsembleSignal simulate_decay(const WalkSpec& spec, const std::vector<PulseSequence>& seqs,
                              const AcquisitionParams& acq, int n_workers) {
    validate_walk_spec(spec);
    if (seqs.empty()) throw Error("no sequences given");
    std::vector<SeqPlan> plans;
    plans.reserve(seqs.size());
    for (const auto& s : seqs) {
        if (s.total_time > spec.duration * (1.0 + 1e-12))
            throw Error("sequence TE exceeds the walk duration");
        plans.push_back({s.total_time, s.pulse_times()});
    }

    EnsembleSignal out;
    with_domain(spec.geometry, [&](auto dom) {
        run_decay(spec, dom, plans, acq.gamma * acq.gradient, n_workers, out);
    });
    out.times.resize(seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) out.times[i] = seqs[i].total_time;
    return out;
}

EnsembleSignal simulate_decay(const WalkSpec& spec, const PulseSequence& seq,
                              const AcquisitionParams& acq, int n_workers) {
    return simulate_decay(spec, std::vector<PulseSequence>{seq}, acq, n_workers);
}

EnsembleSignal simulate_sdr_scan(const WalkSpec& spec, int n_pulses, double te,
                                 const std::vector<double>& x_values,
                                 const AcquisitionParams& acq, int n_workers) {
    std::vector<PulseSequence> seqs;
    seqs.reserve(x_values.size());
    for (double x : x_values) seqs.push_back(build_sdr(n_pulses, x, te));
    EnsembleSignal out = simulate_decay(spec, seqs, acq, n_workers);
    out.times = x_values;
    return out;
}

}  // namespace sdr
