#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace raman {

using cplx = std::complex<double>;

// Storage order of the three fields, used everywhere: index 0 is the Stokes
// sideband, 1 the probe carrier, 2 the anti-Stokes sideband.
inline constexpr int kStokes = 0;
inline constexpr int kProbe = 1;
inline constexpr int kAntiStokes = 2;
inline constexpr int kModeCount = 3;

const char* mode_name(int mode);

// Error taxonomy. The CLI maps these onto exit codes: configuration/validation
// failures exit 1, resource and truncation failures exit 2, verification
// failures exit 3.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateCouplingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnsupportedMomentError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UndefinedCorrelationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UndefinedNormalizationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class BasisMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TruncationError : public ResourceError {
 public:
  using ResourceError::ResourceError;
};

class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest-faithful decimal form used for CSV output (17 significant digits).
std::string format_sig17(double v);

}  // namespace raman
