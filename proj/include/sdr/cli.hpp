#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sdr/config.hpp"

namespace sdr {

struct CliOptions {
    std::string config_path;
    std::string out_path;
    std::string data_path;                 // fit input CSV
    std::optional<std::uint64_t> seed;     // overrides [walk] seed
    std::optional<int> workers;            // overrides [walk] workers
    std::string spectrum_mode = "single";  // "single" or "multi:<K>"
    bool cpmg_point = false;               // predict: single point at x = TE/N
    int points = 0;                        // msd/spectrum grid size (0 = default)
    double omega_span = 8.0;               // spectrum: max omega in units of 1/tau_c
    bool normalize_lc2 = false;            // msd: divide by l_c^2
};

SpectrumMode parse_spectrum_mode(const std::string& text);

/// Each command loads the config, applies overrides, writes the data file
/// at out_path plus a '<out>.meta' sidecar with the resolved parameters,
/// and returns a process exit code. Errors surface as sdr exceptions.
int cmd_predict(const CliOptions& opt);
int cmd_simulate(const CliOptions& opt);
int cmd_fit(const CliOptions& opt);
int cmd_msd(const CliOptions& opt);
int cmd_spectrum(const CliOptions& opt);

}  // namespace sdr
