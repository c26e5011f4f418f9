#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace afesim {

// Physical quantities are carried as SI doubles; the aliases document intent.
using Seconds = double;
using Hertz = double;
using Volts = double;
using Amperes = double;
using Ohms = double;
using Farads = double;

/// Raised for invalid configuration or parameters. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Portable Gaussian source.
///
/// std::normal_distribution is implementation-defined, so traces would differ
/// between standard libraries. This draws uniforms from the raw 64-bit
/// mt19937_64 stream (fully specified by the standard) and applies Box-Muller.
class GaussianRng
{
public:
  explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

  double standard_normal()
  {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double rms) { return rms == 0.0 ? 0.0 : rms * standard_normal(); }

private:
  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Round half away from zero. std::round already does this; the name pins the
/// tie-breaking rule at call sites that depend on it.
inline double round_half_away(double x) { return std::round(x); }

}  // namespace afesim
