#include <doctest.h>

#include <cmath>
#include <random>

#include "sdr/errors.hpp"
#include "sdr/sequence.hpp"

using namespace sdr;

namespace {

// value of the reassembled split at absolute time t
double reassembled(const SdrDecomposition& parts, double junction, double t) {
    if (t < junction) return parts.cpmg_part.value(t);
    return parts.parity * parts.hahn_part.value(t - junction);
}

}  // namespace

TEST_SUITE("sequence") {

TEST_CASE("cpmg special case x = y = TE/N") {
    const auto seq = build_sdr(8, 10e-3, 80e-3);
    CHECK(seq.y_delay == doctest::Approx(10e-3).epsilon(1e-12));
    CHECK(seq.total_time == doctest::Approx(seq.y_delay + 7 * seq.x_delay).epsilon(1e-13));
    const auto t = seq.pulse_times();
    REQUIRE(t.size() == 8);
    for (int i = 0; i < 8; ++i)
        CHECK(t[static_cast<std::size_t>(i)] ==
              doctest::Approx((i + 0.5) * 10e-3).epsilon(1e-12));
}

TEST_CASE("hahn: single pulse at TE/2, y = TE") {
    const auto seq = build_sdr(1, 123.0 /* ignored */, 80e-3);
    CHECK(seq.n_pulses == 1);
    CHECK(seq.x_delay == 0.0);
    CHECK(seq.y_delay == doctest::Approx(80e-3));
    const auto t = seq.pulse_times();
    REQUIRE(t.size() == 1);
    CHECK(t[0] == doctest::Approx(40e-3).epsilon(1e-13));
}

TEST_CASE("asymmetric timing: N=8, x=2ms, TE=80ms") {
    const auto seq = build_sdr(8, 2e-3, 80e-3);
    CHECK(seq.y_delay == doctest::Approx(66e-3).epsilon(1e-12));
    const auto t = seq.pulse_times();
    const double expected[8] = {1e-3, 3e-3, 5e-3, 7e-3, 9e-3, 11e-3, 13e-3, 47e-3};
    for (int i = 0; i < 8; ++i)
        CHECK(t[static_cast<std::size_t>(i)] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("timing validation") {
    CHECK_THROWS_AS(build_sdr(0, 1e-3, 80e-3), TimingError);
    CHECK_THROWS_AS(build_sdr(8, -1e-3, 80e-3), TimingError);
    CHECK_THROWS_AS(build_sdr(8, 0.0, 80e-3), TimingError);
    CHECK_THROWS_AS(build_sdr(8, 80e-3, 80e-3), TimingError);   // x > TE/N
    CHECK_THROWS_AS(build_sdr(8, 10.1e-3, 80e-3), TimingError); // just over TE/N
    CHECK_THROWS_AS(build_sdr(2, 1e-3, 0.0), TimingError);
    CHECK_NOTHROW(build_sdr(8, 10e-3, 80e-3)); // equality case is allowed
}

TEST_CASE("modulation patterns") {
    SUBCASE("hahn") {
        const auto f = modulation(build_hahn(1.0));
        REQUIRE(f.boundaries.size() == 3);
        CHECK(f.boundaries[1] == doctest::Approx(0.5));
        CHECK(f.value(0.25) == 1.0);
        CHECK(f.value(0.75) == -1.0);
    }
    SUBCASE("cpmg-2 boundaries and signs") {
        const auto f = modulation(build_cpmg(2, 1.0));
        REQUIRE(f.boundaries.size() == 4);
        CHECK(f.boundaries[1] == doctest::Approx(0.25));
        CHECK(f.boundaries[2] == doctest::Approx(0.75));
        CHECK(f.value(0.1) == 1.0);
        CHECK(f.value(0.5) == -1.0);
        CHECK(f.value(0.9) == 1.0);
    }
}

TEST_CASE("echo condition and flip count over random sequences") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> pick_n(1, 64);
    std::uniform_real_distribution<double> pick_frac(0.05, 1.0);
    for (int it = 0; it < 400; ++it) {
        const int n = pick_n(rng);
        const double te = 80e-3;
        const auto seq = n == 1 ? build_hahn(te) : build_sdr(n, pick_frac(rng) * te / n, te);
        const auto f = modulation(seq);
        CHECK(f.n_segments() == n + 1);
        CHECK(std::abs(f.signed_area()) <= 1e-12 * te);
        // boundaries strictly increasing inside (0, TE)
        for (std::size_t k = 1; k < f.boundaries.size(); ++k)
            CHECK(f.boundaries[k] > f.boundaries[k - 1]);
    }
}

TEST_CASE("decompose rejects N = 1") {
    CHECK_THROWS_AS(decompose(build_hahn(80e-3)), DecompositionError);
}

TEST_CASE("decompose smallest case N = 2") {
    const auto seq = build_sdr(2, 10e-3, 80e-3);
    const auto parts = decompose(seq);
    CHECK(parts.parity == -1);
    CHECK(parts.cpmg_part.duration() == doctest::Approx(10e-3));
    CHECK(parts.cpmg_part.n_segments() == 2);
    CHECK(parts.hahn_part.duration() == doctest::Approx(70e-3));
    CHECK(parts.hahn_part.n_segments() == 2);
}

TEST_CASE("decompose reassembly: N=3, x=5ms, TE=40ms pointwise") {
    const auto seq = build_sdr(3, 5e-3, 40e-3);
    const auto parts = decompose(seq);
    const auto f = modulation(seq);
    const double junction = (seq.n_pulses - 1) * seq.x_delay;
    for (int i = 0; i < 10000; ++i) {
        const double t = (i + 0.5) * seq.total_time / 10000;
        CHECK(reassembled(parts, junction, t) == f.value(t));
    }
}

TEST_CASE("decompose reassembly property over random sequences") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> pick_n(2, 64);
    std::uniform_real_distribution<double> pick_frac(0.05, 1.0);
    std::uniform_real_distribution<double> pick_t(0.0, 1.0);
    for (int it = 0; it < 300; ++it) {
        const int n = pick_n(rng);
        const double te = 50e-3;
        const auto seq = build_sdr(n, pick_frac(rng) * te / n, te);
        const auto parts = decompose(seq);
        const auto f = modulation(seq);
        const double junction = (n - 1) * seq.x_delay;
        for (int s = 0; s < 50; ++s) {
            const double t = pick_t(rng) * te;
            CHECK(reassembled(parts, junction, t) == f.value(t));
        }
    }
}

TEST_CASE("x = y = TE/N concatenation equals plain CPMG") {
    const auto sdr8 = build_sdr(8, 10e-3, 80e-3);
    const auto cpmg8 = build_cpmg(8, 80e-3);
    const auto fs = modulation(sdr8);
    const auto fc = modulation(cpmg8);
    REQUIRE(fs.boundaries.size() == fc.boundaries.size());
    for (std::size_t k = 0; k < fs.boundaries.size(); ++k)
        CHECK(fs.boundaries[k] == doctest::Approx(fc.boundaries[k]).epsilon(1e-14));
}

TEST_CASE("boundaries are continuous in x") {
    const double te = 80e-3;
    const int n = 8;
    const double x0 = 4e-3;
    const double eps = 1e-9;
    const auto f0 = modulation(build_sdr(n, x0, te));
    const auto f1 = modulation(build_sdr(n, x0 + eps, te));
    for (std::size_t k = 0; k < f0.boundaries.size(); ++k)
        CHECK(std::abs(f1.boundaries[k] - f0.boundaries[k]) <= n * eps);
}

} // TEST_SUITE
