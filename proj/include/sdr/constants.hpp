#pragma once

namespace sdr {

inline constexpr const char* kVersion = "0.1.0";

namespace constants {

// 1H gyromagnetic ratio, rad/(s T)
inline constexpr double gamma_h1 = 2.675221e8;

// unit conversions used at the CLI boundary; everything internal is SI
inline constexpr double um_to_m = 1e-6;
inline constexpr double ms_to_s = 1e-3;
inline constexpr double gauss_per_cm_to_t_per_m = 1e-2;
inline constexpr double um2_per_ms_to_m2_per_s = 1e-9;

}  // namespace constants
}  // namespace sdr
