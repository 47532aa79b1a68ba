#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sdr/errors.hpp"
#include "sdr/noise.hpp"
#include "sdr/quadrature.hpp"

using namespace sdr;

namespace {

constexpr double kPi = std::numbers::pi;

// capillary benchmark parameters used throughout
const Geometry kCapillary = Geometry::cylinder(5e-6, 2.3e-9);
const double kGradient = 0.216; // T/m (21.6 G/cm)

AcquisitionParams capillary_acq() {
    AcquisitionParams acq;
    acq.gradient = kGradient;
    return acq;
}

// numeric cosine transform of g by composite Simpson; the independent
// Fourier oracle for the spectral density identity
double cos_transform(const NoiseSpectrum& spec, double omega) {
    double tau_max = 0.0, tau_min = 1e300;
    for (const auto& c : spec.components) {
        tau_max = std::max(tau_max, c.tau);
        tau_min = std::min(tau_min, c.tau);
    }
    const double horizon = 30.0 * tau_max;
    const std::size_t n = 2 * static_cast<std::size_t>(
        std::ceil(std::max(4000.0, 40.0 * horizon / tau_min) / 2.0));
    const double h = horizon / static_cast<double>(n);
    auto f = [&](double t) { return g_of_tau(spec, t) * std::cos(omega * t); };
    double sum = f(0.0) + f(horizon);
    for (std::size_t i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return sum * h / 3.0;
}

}  // namespace

TEST_SUITE("noise") {

TEST_CASE("cylinder correlation time at the capillary parameters") {
    const double tau = correlation_time(kCapillary);
    CHECK(tau == doctest::Approx(0.26 * 0.26 * 25e-12 / 2.3e-9).epsilon(1e-14));
    CHECK(tau == doctest::Approx(7.35e-4).epsilon(2e-3));
}

TEST_CASE("correlation time scales as d^2") {
    const auto doubled = Geometry::cylinder(10e-6, 2.3e-9);
    CHECK(correlation_time(doubled) == doctest::Approx(4.0 * correlation_time(kCapillary)));
}

TEST_CASE("free geometry has no correlation time or spectrum") {
    const auto free_geom = Geometry::free_space(2.3e-9);
    CHECK_THROWS_AS(correlation_time(free_geom), NoCorrelationTimeError);
    CHECK_THROWS_AS(build_spectrum(free_geom, capillary_acq()), NoSpectrumError);
    CHECK_THROWS_AS(diffusion_modes(free_geom, 4), NoSpectrumError);
}

TEST_CASE("restriction length") {
    const double tau = correlation_time(kCapillary);
    const double lc = restriction_length(tau, kCapillary.d0);
    CHECK(lc == doctest::Approx(1.838e-6).epsilon(1e-3));
    CHECK(lc / kCapillary.size_d == doctest::Approx(0.26 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(lc / kCapillary.size_d == doctest::Approx(0.37).epsilon(0.01));
    CHECK(restriction_length(0.0, 2.3e-9) == 0.0);
}

TEST_CASE("single-mode spectrum at the capillary parameters") {
    const auto spec = build_spectrum(kCapillary, capillary_acq());
    REQUIRE(spec.components.size() == 1);
    CHECK(spec.components[0].weight == 1.0);
    CHECK(spec.delta_omega_sq == doctest::Approx(5.6e3).epsilon(0.01));
    // zero gradient means a decay-free spectrum
    AcquisitionParams quiet;
    quiet.gradient = 0.0;
    CHECK(build_spectrum(kCapillary, quiet).delta_omega_sq == 0.0);
}

TEST_CASE("delta_omega_sq scales exactly as G^2") {
    AcquisitionParams acq = capillary_acq();
    const auto s1 = build_spectrum(kCapillary, acq);
    acq.gradient *= 2.0;
    const auto s2 = build_spectrum(kCapillary, acq);
    CHECK(s2.delta_omega_sq == doctest::Approx(4.0 * s1.delta_omega_sq).epsilon(1e-14));
    CHECK(s2.components[0].tau == s1.components[0].tau);
}

TEST_CASE("autocorrelation basics") {
    const auto spec = build_spectrum(kCapillary, capillary_acq());
    const double tau = spec.components[0].tau;
    CHECK(g_of_tau(spec, 0.0) == doctest::Approx(spec.delta_omega_sq).epsilon(1e-14));
    CHECK(g_of_tau(spec, tau) == doctest::Approx(spec.delta_omega_sq / std::exp(1.0)));
    CHECK(g_of_tau(spec, 0.5 * tau) > g_of_tau(spec, 1.5 * tau)); // decreasing
}

TEST_CASE("spectral density basics") {
    const auto spec = build_spectrum(kCapillary, capillary_acq());
    const double tau = spec.components[0].tau;
    CHECK(s_of_omega(spec, 0.0) == doctest::Approx(tau / kPi).epsilon(1e-14));
    // high-frequency tail ~ 1/(pi w^2 tau)
    const double w = 300.0 / tau;
    CHECK(s_of_omega(spec, w) == doctest::Approx(1.0 / (kPi * w * w * tau)).epsilon(1e-4));
    CHECK(s_of_omega(spec, 5.0 / tau) == s_of_omega(spec, -5.0 / tau)); // even
}

TEST_CASE("spectral density integrates to one") {
    for (int k : {1, 4}) {
        const auto spec = build_spectrum(kCapillary, capillary_acq(), SpectrumMode{k});
        const double tau_min = spec.min_tau();
        std::vector<double> breaks{0.0};
        for (double w = 0.01 / tau_min; w < 2e7 / tau_min; w *= 2.0) breaks.push_back(w);
        const auto res = integrate_adaptive([&](double w) { return s_of_omega(spec, w); },
                                            breaks, 1e-9, 0.0);
        CHECK(2.0 * res.value == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("numeric fourier transform of g matches the lorentzian spectrum") {
    // integral_0^inf g cos(w t) dt = pi dw2 S(w); equivalently
    // FT{g} = sqrt(2 pi) dw2 S(w) in the symmetric convention
    for (int k : {1, 3}) {
        const auto spec = build_spectrum(kCapillary, capillary_acq(), SpectrumMode{k});
        const double tau = spec.components[0].tau;
        for (double w : {0.0, 0.5 / tau, 2.0 / tau, 5.0 / tau}) {
            const double numeric = cos_transform(spec, w);
            const double expected = kPi * spec.delta_omega_sq * s_of_omega(spec, w);
            CHECK(numeric == doctest::Approx(expected).epsilon(1e-6));
        }
    }
}

TEST_CASE("eigenmode variances sum to the uniform coordinate variance") {
    const double d = 5e-6;
    const double d0 = 2.3e-9;
    struct Case {
        Geometry geom;
        double variance;
    };
    const Case cases[] = {
        {Geometry::slab(d, d0), d * d / 12.0},
        {Geometry::cylinder(d, d0), d * d / 16.0},
        {Geometry::sphere(d, d0), d * d / 20.0},
    };
    for (const auto& c : cases) {
        const auto modes = diffusion_modes(c.geom, 40);
        double sum = 0.0;
        for (const auto& m : modes) {
            CHECK(m.variance > 0.0);
            CHECK(m.tau > 0.0);
            sum += m.variance;
        }
        CHECK(sum == doctest::Approx(c.variance).epsilon(1e-4));
        // timescales strictly decreasing
        for (std::size_t i = 1; i < modes.size(); ++i) CHECK(modes[i].tau < modes[i - 1].tau);
    }
}

TEST_CASE("slab and sphere tau coefficients equal the eigenmode integral timescale") {
    const double d = 5e-6;
    const double d0 = 2.3e-9;
    for (auto kind : {GeometryKind::slab, GeometryKind::sphere}) {
        const Geometry geom{kind, d, d0};
        const auto modes = diffusion_modes(geom, 64);
        double num = 0.0, den = 0.0;
        for (const auto& m : modes) {
            num += m.variance * m.tau;
            den += m.variance;
        }
        CHECK(num / den == doctest::Approx(correlation_time(geom)).epsilon(1e-4));
    }
}

TEST_CASE("multi-mode spectrum is a normalized expansion") {
    const auto spec = build_spectrum(kCapillary, capillary_acq(), SpectrumMode::multi(6));
    REQUIRE(spec.components.size() == 6);
    double wsum = 0.0;
    for (const auto& c : spec.components) {
        CHECK(c.weight > 0.0);
        CHECK(c.tau > 0.0);
        wsum += c.weight;
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("single vs multi mode agree within the documented 15% for cylinders") {
    const auto single = build_spectrum(kCapillary, capillary_acq());
    const auto multi = build_spectrum(kCapillary, capillary_acq(), SpectrumMode::multi(8));

    // g(0) comparison: dw2 of each model
    CHECK(single.delta_omega_sq ==
          doctest::Approx(multi.delta_omega_sq).epsilon(0.15));

    // integral of g: dw2 * sum c_k tau_k
    auto area = [](const NoiseSpectrum& s) {
        double a = 0.0;
        for (const auto& c : s.components) a += c.weight * c.tau;
        return s.delta_omega_sq * a;
    };
    CHECK(area(single) == doctest::Approx(area(multi)).epsilon(0.15));
}

} // TEST_SUITE
