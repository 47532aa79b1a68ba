#pragma once

#include <stdexcept>
#include <string>

namespace sdr {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// sequence timing constraints violated (y <= 0, x > TE/N, ...)
struct TimingError : Error { using Error::Error; };

// CPMG/Hahn split requested for a sequence without a CPMG part (N = 1)
struct DecompositionError : Error { using Error::Error; };

// free geometry has no confinement-induced correlation time / spectrum
struct NoCorrelationTimeError : Error { using Error::Error; };
struct NoSpectrumError : Error { using Error::Error; };

struct QuadratureError : Error { using Error::Error; };

// Monte Carlo preconditions
struct StepSizeError : Error { using Error::Error; };
struct BurnInError : Error { using Error::Error; };

// estimation preconditions
struct NormalizationError : Error { using Error::Error; };
struct InsufficientDataError : Error { using Error::Error; };
struct NonConvergenceError : Error { using Error::Error; };

// CLI / file I/O
struct ConfigError : Error { using Error::Error; };
struct CsvError : Error { using Error::Error; };

}  // namespace sdr
