#include "afesim/signals.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace afesim {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kShapeGrid = 4096;

// Periodic (wrapped) Gaussian on the unit beat.
double wrapped_gaussian(double phase, double center, double width)
{
  double sum = 0.0;
  for (int wrap = -3; wrap <= 3; ++wrap) {
    const double d = (phase - center + wrap) / width;
    sum += std::exp(-0.5 * d * d);
  }
  return sum;
}

void require_finite(double value, const char* name)
{
  if (!std::isfinite(value)) {
    throw ConfigError(std::string("non-finite scenario parameter: ") + name);
  }
}

void require_non_negative(double value, const char* name)
{
  require_finite(value, name);
  if (value < 0.0) {
    throw ConfigError(std::string("scenario parameter must be >= 0: ") + name);
  }
}

}  // namespace

std::vector<std::string> PhotocurrentScenario::validate() const
{
  require_finite(duration, "duration");
  require_finite(dt, "dt");
  if (!(dt > 0.0)) {
    throw ConfigError("dt must be positive");
  }
  if (duration < dt) {
    throw ConfigError("duration must be at least one dt");
  }
  require_non_negative(ac.amplitude_peak, "ac amplitude");
  require_finite(ac.f0, "ac f0");
  if (!(ac.f0 > 0.0)) {
    throw ConfigError("ac f0 must be positive");
  }
  require_non_negative(dark_current, "dark current");
  require_non_negative(reflection_offset, "reflection offset");
  require_non_negative(ambient.baseline, "ambient baseline");
  require_finite(ambient.drift, "ambient drift");
  require_non_negative(ambient.flicker_amplitude, "flicker amplitude");
  require_non_negative(ambient.flicker_frequency, "flicker frequency");
  require_non_negative(noise_rms, "noise rms");
  for (const auto& step : ambient.steps) {
    require_finite(step.time, "ambient step time");
    require_non_negative(step.baseline, "ambient step baseline");
  }
  for (double w : {ac.systolic_width, ac.dicrotic_width}) {
    require_finite(w, "pulse width");
    if (!(w > 0.0) || w > 0.25) {
      throw ConfigError("pulse widths must be in (0, 0.25] of the beat period");
    }
  }
  require_non_negative(ac.dicrotic_ratio, "dicrotic ratio");
  require_finite(ac.systolic_center, "systolic center");
  require_finite(ac.dicrotic_delay, "dicrotic delay");

  std::vector<std::string> warnings;
  if (ac.f0 < 0.05 || ac.f0 > 5.0) {
    warnings.push_back("ac fundamental " + std::to_string(ac.f0) + " Hz is outside the physiological band [0.05, 5] Hz");
  }
  return warnings;
}

std::size_t PhotocurrentScenario::sample_count() const
{
  return static_cast<std::size_t>(std::floor(duration / dt + 1e-9));
}

AcWaveform::AcWaveform(const AcSignalSpec& spec) : spec_(spec)
{
  switch (spec_.family) {
    case Waveform::sinusoid:
      return;
    case Waveform::synthetic_ppg:
      // Integral of a fully wrapped Gaussian over one period is width * sqrt(2 pi).
      shape_mean_ = std::sqrt(kTwoPi) * (spec_.systolic_width + spec_.dicrotic_ratio * spec_.dicrotic_width);
      break;
    case Waveform::fnirs_slow:
      shape_mean_ = 0.0;
      break;
  }
  double lo = 0.0;
  double hi = 0.0;
  for (int i = 0; i < kShapeGrid; ++i) {
    const double value = unit_shape(static_cast<double>(i) / kShapeGrid) - shape_mean_;
    lo = std::min(lo, value);
    hi = std::max(hi, value);
  }
  shape_scale_ = hi > lo ? 2.0 / (hi - lo) : 0.0;
}

double AcWaveform::unit_shape(double phase) const
{
  switch (spec_.family) {
    case Waveform::sinusoid:
      return std::sin(kTwoPi * phase);
    case Waveform::synthetic_ppg:
      return wrapped_gaussian(phase, spec_.systolic_center, spec_.systolic_width) +
             spec_.dicrotic_ratio *
                 wrapped_gaussian(phase, spec_.systolic_center + spec_.dicrotic_delay, spec_.dicrotic_width);
    case Waveform::fnirs_slow:
      return std::sin(kTwoPi * phase) + 0.5 * std::sin(2.0 * kTwoPi * phase + 0.7) +
             0.25 * std::sin(3.0 * kTwoPi * phase + 1.9);
  }
  return 0.0;
}

Amperes AcWaveform::operator()(Seconds t) const
{
  if (spec_.amplitude_peak == 0.0) {
    return 0.0;
  }
  if (spec_.family == Waveform::sinusoid) {
    return spec_.amplitude_peak * std::sin(kTwoPi * spec_.f0 * t);
  }
  const double cycles = spec_.f0 * t;
  const double phase = cycles - std::floor(cycles);
  return spec_.amplitude_peak * shape_scale_ * (unit_shape(phase) - shape_mean_);
}

PhotocurrentSeries synthesize(const PhotocurrentScenario& scenario)
{
  scenario.validate();

  const std::size_t n = scenario.sample_count();
  PhotocurrentSeries out;
  out.dt = scenario.dt;
  out.total.resize(n);
  out.ac.resize(n);
  out.dark.assign(n, scenario.dark_current);
  out.ambient.resize(n);
  out.reflection.assign(n, scenario.reflection_offset);
  out.noise.assign(n, 0.0);

  auto steps = scenario.ambient.steps;
  std::stable_sort(steps.begin(), steps.end(), [](const auto& a, const auto& b) { return a.time < b.time; });

  const AcWaveform waveform(scenario.ac);
  GaussianRng rng(scenario.rng_seed);
  const auto& amb = scenario.ambient;

  std::size_t next_step = 0;
  Amperes baseline = amb.baseline;
  for (std::size_t k = 0; k < n; ++k) {
    const Seconds t = static_cast<double>(k) * scenario.dt;
    while (next_step < steps.size() && steps[next_step].time <= t) {
      baseline = steps[next_step].baseline;
      ++next_step;
    }
    double ambient = baseline + amb.drift * t;
    if (amb.flicker_amplitude != 0.0) {
      ambient += amb.flicker_amplitude * std::sin(kTwoPi * amb.flicker_frequency * t);
    }
    out.ambient[k] = ambient;
    out.ac[k] = waveform(t);
    out.noise[k] = rng.normal(scenario.noise_rms);
    out.total[k] = out.ac[k] + out.dark[k] + out.ambient[k] + out.reflection[k] + out.noise[k];
  }
  return out;
}

double ac_power(std::span<const double> series)
{
  if (series.empty()) {
    return 0.0;
  }
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
  double acc = 0.0;
  for (double x : series) {
    acc += (x - mean) * (x - mean);
  }
  return acc / static_cast<double>(series.size());
}

double band_power(std::span<const double> series, Seconds dt, Hertz f_lo, Hertz f_hi)
{
  if (!(dt > 0.0) || !(f_lo > 0.0) || !(f_hi >= f_lo)) {
    throw std::invalid_argument("band_power: need dt > 0 and 0 < f_lo <= f_hi");
  }
  const double nyquist = 0.5 / dt;
  if (f_hi > nyquist) {
    throw std::invalid_argument("band_power: band extends beyond Nyquist");
  }
  const std::size_t n = series.size();
  if (static_cast<double>(n) < 2.0 / (f_lo * dt) || n < 2) {
    throw std::invalid_argument("band_power: series too short to resolve f_lo");
  }

  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  std::vector<double> input(n);
  std::transform(series.begin(), series.end(), input.begin(), [mean](double x) { return x - mean; });
  std::vector<std::complex<double>> spectrum(n / 2 + 1);

  {
    // Only fftw_execute is re-entrant; planning touches global planner state.
    static std::mutex planner_mutex;
    std::lock_guard lock(planner_mutex);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), input.data(),
                                          reinterpret_cast<fftw_complex*>(spectrum.data()), FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }

  // One-sided periodogram normalised so the sum over all bins equals ac_power().
  const double df = 1.0 / (static_cast<double>(n) * dt);
  const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  double power = 0.0;
  for (std::size_t k = 1; k < spectrum.size(); ++k) {
    const double f = static_cast<double>(k) * df;
    if (f < f_lo || f > f_hi) {
      continue;
    }
    const bool nyquist_bin = (n % 2 == 0) && (k == n / 2);
    power += (nyquist_bin ? 1.0 : 2.0) * std::norm(spectrum[k]) * norm;
  }
  return power;
}

}  // namespace afesim
