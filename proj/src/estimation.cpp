#include "sdr/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sdr/errors.hpp"

namespace sdr {

namespace {

double tau_c_of_diameter(GeometryKind kind, double d, double d0) {
    Geometry g{kind, d, d0};
    return correlation_time(g);
}

void validate_curve(const DecayCurve& curve) {
    if (curve.x_values.size() != curve.signal.size())
        throw Error("x_values and signal lengths differ");
    if (curve.n_pulses < 1 || !(curve.te > 0.0)) throw Error("curve needs N >= 1 and TE > 0");
    for (std::size_t i = 0; i < curve.x_values.size(); ++i) {
        if (i > 0 && !(curve.x_values[i] > curve.x_values[i - 1]))
            throw Error("x_values must be strictly increasing");
        if (!(curve.signal[i] > 0.0)) throw Error("signal values must be positive");
    }
}

struct ParamLayout {
    bool fit_amplitude = true;
    bool fit_d0 = false;
    int count() const { return 1 + (fit_amplitude ? 1 : 0) + (fit_d0 ? 1 : 0); }
};

struct ModelEval {
    const DecayCurve* curve;
    GeometryKind kind;
    SpectrumMode mode;
    double fixed_amplitude;
    double fixed_d0;
    ParamLayout layout;

    // p[0] = ln d, then optionally A, then optionally ln D0
    std::vector<double> residual(const double* p) const {
        const double d = std::exp(p[0]);
        int idx = 1;
        const double amp = layout.fit_amplitude ? p[idx++] : fixed_amplitude;
        const double d0 = layout.fit_d0 ? std::exp(p[idx]) : fixed_d0;
        return residuals(*curve, kind, d, amp, d0, mode);
    }
};

double sumsq(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
}

// dense solve of (A + lambda diag(A)) x = b for n <= 3, partial pivoting
bool solve_damped(int n, const double* a, double lambda, const double* b, double* x) {
    double m[3][4];
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m[i][j] = a[i * n + j];
        m[i][i] += lambda * std::max(a[i * n + i], 1e-300);
        m[i][n] = b[i];
    }
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        if (std::abs(m[piv][col]) < 1e-300) return false;
        if (piv != col)
            for (int j = 0; j <= n; ++j) std::swap(m[piv][j], m[col][j]);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (int j = col; j <= n; ++j) m[r][j] -= f * m[col][j];
        }
    }
    for (int i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
    return true;
}

struct Bounds {
    double lo[3], hi[3];
    void clamp(double* p, int n) const {
        for (int i = 0; i < n; ++i) p[i] = std::clamp(p[i], lo[i], hi[i]);
    }
};

struct LocalFit {
    double p[3] = {0, 0, 0};
    double ssq = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    std::vector<double> jac;     // final Jacobian, column-major by parameter
    std::vector<double> resid;
};

// damped least squares with central-difference Jacobian and box clamping
LocalFit levenberg(const ModelEval& model, const double* start, const Bounds& bounds,
                   const FitOptions& opt) {
    const int np = model.layout.count();
    LocalFit fit;
    std::copy(start, start + np, fit.p);
    bounds.clamp(fit.p, np);

    std::vector<double> r = model.residual(fit.p);
    const int m = static_cast<int>(r.size());
    double ssq = sumsq(r);
    double lambda = 1e-3;

    std::vector<double> jac(static_cast<std::size_t>(m) * np);
    double h[3], g[3], hess[9], step[3], ptrial[3];

    for (int iter = 1; iter <= opt.max_iterations; ++iter) {
        fit.iterations = iter;
        // central differences, relative step 1e-6
        for (int j = 0; j < np; ++j) h[j] = 1e-6 * std::max(std::abs(fit.p[j]), 1e-3);
        for (int j = 0; j < np; ++j) {
            double pp[3], pm[3];
            std::copy(fit.p, fit.p + np, pp);
            std::copy(fit.p, fit.p + np, pm);
            pp[j] += h[j];
            pm[j] -= h[j];
            const auto rp = model.residual(pp);
            const auto rm = model.residual(pm);
            for (int i = 0; i < m; ++i)
                jac[static_cast<std::size_t>(j) * m + i] = (rp[i] - rm[i]) / (2.0 * h[j]);
        }
        for (int j = 0; j < np; ++j) {
            double s = 0.0;
            for (int i = 0; i < m; ++i) s += jac[static_cast<std::size_t>(j) * m + i] * r[i];
            g[j] = s;
        }
        for (int j = 0; j < np; ++j)
            for (int k = 0; k < np; ++k) {
                double s = 0.0;
                for (int i = 0; i < m; ++i)
                    s += jac[static_cast<std::size_t>(j) * m + i] *
                         jac[static_cast<std::size_t>(k) * m + i];
                hess[j * np + k] = s;
            }

        double gmax = 0.0;
        for (int j = 0; j < np; ++j) gmax = std::max(gmax, std::abs(g[j]));
        if (gmax < opt.gradient_tol) {
            fit.converged = true;
            break;
        }

        bool accepted = false;
        for (int tries = 0; tries < 16; ++tries) {
            double neg_g[3];
            for (int j = 0; j < np; ++j) neg_g[j] = -g[j];
            if (!solve_damped(np, hess, lambda, neg_g, step)) {
                lambda *= 10.0;
                continue;
            }
            std::copy(fit.p, fit.p + np, ptrial);
            for (int j = 0; j < np; ++j) ptrial[j] += step[j];
            bounds.clamp(ptrial, np);
            const auto rt = model.residual(ptrial);
            const double st = sumsq(rt);
            if (st < ssq) {
                double rel_step = 0.0;
                for (int j = 0; j < np; ++j)
                    rel_step = std::max(rel_step, std::abs(ptrial[j] - fit.p[j]) /
                                                      std::max(std::abs(fit.p[j]), 1.0));
                std::copy(ptrial, ptrial + np, fit.p);
                r = rt;
                ssq = st;
                lambda = std::max(lambda * 0.3, 1e-14);
                accepted = true;
                if (rel_step < opt.step_tol) fit.converged = true;
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e14) break;
        }
        // stop when converged or when no damping produces a downhill step
        if (!accepted || fit.converged) break;
    }

    fit.ssq = ssq;
    fit.jac = std::move(jac);
    fit.resid = std::move(r);
    return fit;
}

}  // namespace

DecayCurve normalize_first_point(const DecayCurve& curve) {
    if (curve.signal.empty()) throw NormalizationError("empty curve");
    const double first = curve.signal.front();
    if (!(first > 0.0)) throw NormalizationError("first sample must be positive");
    DecayCurve out = curve;
    for (double& v : out.signal) v /= first;
    return out;
}

std::vector<double> residuals(const DecayCurve& curve, GeometryKind kind, double diameter,
                              double amplitude, double d0, SpectrumMode mode) {
    const Geometry geom{kind, diameter, d0};
    const NoiseSpectrum spec = build_spectrum(geom, curve.acq, mode);
    AcquisitionParams acq = curve.acq;
    acq.t2 = 0.0; // any uniform T2 factor at fixed TE is absorbed by the amplitude
    const DecayCurve model = sdr_scan(curve.n_pulses, curve.te, spec, curve.x_values, acq);
    std::vector<double> r(curve.signal.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = amplitude * model.signal[i] - curve.signal[i];
    return r;
}

FitResult fit_diameter(const DecayCurve& curve, GeometryKind kind, double d0,
                       const FitOptions& options) {
    validate_curve(curve);
    if (kind == GeometryKind::free_space)
        throw NoSpectrumError("cannot fit a restriction size to free diffusion");
    if (!(d0 > 0.0)) throw Error("d0 must be positive");
    if (curve.x_values.size() < 5)
        throw InsufficientDataError("need at least 5 scan points");

    // the scan must straddle tau_c for some diameter inside the search box
    const double x_lo = curve.x_values.front();
    const double x_hi = curve.x_values.back();
    const double tau_lo = tau_c_of_diameter(kind, options.d_min, d0);
    const double tau_hi = tau_c_of_diameter(kind, options.d_max, d0);
    if (!(tau_hi > x_lo && tau_lo < x_hi)) {
        std::ostringstream msg;
        msg << "scan range [" << x_lo << ", " << x_hi << "] s does not straddle tau_c for any "
            << "diameter in [" << options.d_min << ", " << options.d_max << "] m";
        throw InsufficientDataError(msg.str());
    }

    ModelEval model{&curve, kind, options.mode, 1.0, d0,
                    ParamLayout{options.fit_amplitude, options.fit_d0}};
    const int np = model.layout.count();

    Bounds bounds{};
    bounds.lo[0] = std::log(options.d_min);
    bounds.hi[0] = std::log(options.d_max);
    int idx = 1;
    if (options.fit_amplitude) {
        bounds.lo[idx] = 1e-6;
        bounds.hi[idx] = 2.0;
        ++idx;
    }
    if (options.fit_d0) {
        bounds.lo[idx] = std::log(d0 / 100.0);
        bounds.hi[idx] = std::log(d0 * 100.0);
    }

    LocalFit best;
    double best_d = std::numeric_limits<double>::infinity();
    int starts = std::max(1, options.multistarts);
    bool any_finite = false;
    for (int s = 0; s < starts; ++s) {
        const double frac = (s + 0.5) / starts;
        double p0[3];
        p0[0] = std::log(options.d_min) + frac * (std::log(options.d_max) - std::log(options.d_min));
        int j = 1;
        if (options.fit_amplitude) p0[j++] = std::clamp(curve.signal.front(), 1e-3, 2.0);
        if (options.fit_d0) p0[j] = std::log(d0);

        LocalFit local = levenberg(model, p0, bounds, options);
        if (!std::isfinite(local.ssq)) continue;
        any_finite = true;
        const double d_local = std::exp(local.p[0]);
        const bool better = local.ssq < best.ssq * (1.0 - 1e-12) ||
                            (std::abs(local.ssq - best.ssq) <=
                                 1e-12 * std::max(local.ssq, best.ssq) &&
                             d_local < best_d);
        if (better) {
            best = std::move(local);
            best_d = d_local;
        }
    }
    if (!any_finite)
        throw NonConvergenceError("every start point produced a non-finite objective");

    FitResult out;
    out.diameter = std::exp(best.p[0]);
    idx = 1;
    out.amplitude = options.fit_amplitude ? best.p[idx++] : 1.0;
    out.d0 = options.fit_d0 ? std::exp(best.p[idx]) : d0;
    out.d0_fitted = options.fit_d0;
    out.objective = best.ssq;
    out.iterations = best.iterations;
    out.converged = best.converged;
    const std::size_t m = best.resid.size();
    out.residual_rms = std::sqrt(best.ssq / static_cast<double>(m));

    // covariance of the natural parameters from the final Jacobian
    if (m > static_cast<std::size_t>(np)) {
        const double sigma2 = best.ssq / static_cast<double>(m - np);
        double hess[9], inv_rhs[3], cov_diag[3];
        for (int j = 0; j < np; ++j)
            for (int k = 0; k < np; ++k) {
                double sdot = 0.0;
                for (std::size_t i = 0; i < m; ++i)
                    sdot += best.jac[static_cast<std::size_t>(j) * m + i] *
                            best.jac[static_cast<std::size_t>(k) * m + i];
                hess[j * np + k] = sdot;
            }
        bool ok = true;
        for (int j = 0; j < np && ok; ++j) {
            double e[3] = {0, 0, 0};
            e[j] = 1.0;
            ok = solve_damped(np, hess, 0.0, e, inv_rhs);
            cov_diag[j] = sigma2 * inv_rhs[j];
        }
        if (ok) {
            out.covariance_diag.assign(cov_diag, cov_diag + np);
            // delta-method transform of the log parameters
            out.covariance_diag[0] *= out.diameter * out.diameter;
            if (options.fit_d0) out.covariance_diag[np - 1] *= out.d0 * out.d0;
        }
    }
    return out;
}

}  // namespace sdr
