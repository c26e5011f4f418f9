#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "afesim/common.hpp"

namespace afesim {

enum class Waveform
{
  sinusoid,
  synthetic_ppg,  // systolic + dicrotic Gaussian pulse per beat
  fnirs_slow,     // harmonic mixture at hemodynamic rates
};

/// Physiological (AC) part of the photocurrent.
///
/// `amplitude_peak` is half the peak-to-peak excursion for every family, so a
/// sinusoid of amplitude A and a PPG beat of amplitude A span the same range.
struct AcSignalSpec
{
  Waveform family = Waveform::synthetic_ppg;
  Hertz f0 = 1.2;
  Amperes amplitude_peak = 1e-6;

  // Pulse shape, as fractions of the beat period.
  double systolic_center = 0.20;
  double systolic_width = 0.07;
  double dicrotic_ratio = 0.4;
  double dicrotic_delay = 0.35;
  double dicrotic_width = 0.10;
};

struct AmbientStep
{
  Seconds time = 0.0;
  Amperes baseline = 0.0;  // replaces the ambient baseline from `time` onward
};

struct AmbientSpec
{
  Amperes baseline = 0.0;
  double drift = 0.0;  // A/s
  Amperes flicker_amplitude = 0.0;
  Hertz flicker_frequency = 50.0;
  std::vector<AmbientStep> steps;
};

struct PhotocurrentScenario
{
  Seconds duration = 30.0;
  Seconds dt = 1e-3;
  AcSignalSpec ac;
  Amperes dark_current = 0.0;
  AmbientSpec ambient;
  Amperes reflection_offset = 0.0;
  std::uint64_t rng_seed = 1;
  Amperes noise_rms = 0.0;

  /// Throws ConfigError on broken invariants. Returns human-readable warnings
  /// (currently only an out-of-band fundamental).
  std::vector<std::string> validate() const;

  std::size_t sample_count() const;
};

/// Per-component photocurrent, one entry per simulation step.
struct PhotocurrentSeries
{
  Seconds dt = 0.0;
  std::vector<Amperes> total;
  std::vector<Amperes> ac;
  std::vector<Amperes> dark;
  std::vector<Amperes> ambient;
  std::vector<Amperes> reflection;
  std::vector<Amperes> noise;

  Amperes offset_at(std::size_t k) const { return dark[k] + ambient[k] + reflection[k]; }
};

/// Zero-mean periodic AC waveform evaluated at time t.
class AcWaveform
{
public:
  explicit AcWaveform(const AcSignalSpec& spec);

  Amperes operator()(Seconds t) const;

private:
  double unit_shape(double phase) const;  // phase in [0, 1)

  AcSignalSpec spec_;
  double shape_mean_ = 0.0;
  double shape_scale_ = 1.0;  // maps unit_shape - mean to +/- 1 half-swing
  double shape_mid_ = 0.0;
};

PhotocurrentSeries synthesize(const PhotocurrentScenario& scenario);

/// Periodogram power of `series` (mean removed) in bins whose frequency lies
/// in [f_lo, f_hi]. Units are the square of the series units.
double band_power(std::span<const double> series, Seconds dt, Hertz f_lo, Hertz f_hi);

/// Mean-square of the series about its mean.
double ac_power(std::span<const double> series);

}  // namespace afesim
