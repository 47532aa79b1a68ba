#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sdr/ini.hpp"
#include "sdr/montecarlo.hpp"
#include "sdr/noise.hpp"

namespace sdr {

/// Run configuration in the units of the file format (um, ms, G/cm);
/// conversion to SI happens in the accessors. Parsing and serialization
/// round-trip: parse(serialize(c)) == c.
struct RunConfig {
    // [geometry]
    std::string geometry_kind = "cylinder";
    std::optional<double> diameter_um;
    double d0_um2_per_ms = 0.0;

    // [acquisition]
    double gradient_g_per_cm = 0.0;
    double gamma_rad_per_s_per_t = constants::gamma_h1;
    std::optional<double> t2_ms;

    // [sequence]
    int n_pulses = 1;
    double te_ms = 0.0;
    std::string sequence_kind = "sdr"; // hahn | cpmg | sdr, for TE scans
    std::optional<double> x_ms;
    std::optional<double> x_min_ms;
    std::optional<double> x_max_ms;
    std::optional<int> x_count;
    std::optional<double> te_min_ms;
    std::optional<double> te_max_ms;
    std::optional<int> te_count;

    // [walk]
    std::optional<double> dt_ms;       // absent: auto from the geometry
    std::uint64_t n_walkers = 10000;
    std::uint64_t seed = 1;
    std::optional<double> duration_ms; // absent: longest sequence TE
    int workers = 0;                   // 0: hardware concurrency

    // [fit]
    double d_min_um = 0.1;
    double d_max_um = 100.0;
    int multistarts = 8;
    bool fit_amplitude = true;
    bool fit_d0 = false;

    bool operator==(const RunConfig&) const = default;

    Geometry geometry() const;
    AcquisitionParams acquisition() const;
    double te() const;        // s
    double gradient() const;  // T/m
};

RunConfig parse_config(const IniFile& ini);
IniFile serialize_config(const RunConfig& cfg);
RunConfig load_config(const std::string& path);

}  // namespace sdr
