#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "afesim/signals.hpp"

using namespace afesim;

namespace {

double mean_of(const std::vector<double>& v, std::size_t begin, std::size_t end)
{
  double acc = 0.0;
  for (std::size_t k = begin; k < end; ++k) {
    acc += v[k];
  }
  return acc / static_cast<double>(end - begin);
}

PhotocurrentScenario quiet_scenario()
{
  PhotocurrentScenario s;
  s.duration = 10.0;
  s.ac.amplitude_peak = 0.0;
  return s;
}

}  // namespace

TEST_CASE("all amplitudes zero give an all-zero current")
{
  const PhotocurrentSeries series = synthesize(quiet_scenario());
  REQUIRE(series.total.size() == 10000);
  CHECK(std::all_of(series.total.begin(), series.total.end(), [](double x) { return x == 0.0; }));
}

TEST_CASE("sinusoid plus constant offset: mean and extrema")
{
  PhotocurrentScenario s = quiet_scenario();
  s.ac.family = Waveform::sinusoid;
  s.ac.amplitude_peak = 1e-6;
  s.ac.f0 = 1.2;
  s.duration = 5.0;  // six whole cycles
  s.dark_current = 5e-6;
  s.ambient.baseline = 30e-6;
  s.reflection_offset = 15e-6;
  const PhotocurrentSeries series = synthesize(s);

  CHECK(std::abs(mean_of(series.total, 0, series.total.size()) - 50e-6) <= 1e-12);
  const auto [lo, hi] = std::minmax_element(series.total.begin(), series.total.end());
  // Sampling at 1 ms lands within 1 - cos(2 pi 1.2 * 0.5 ms) of the true peak.
  CHECK(*hi - *lo == doctest::Approx(2e-6).epsilon(1e-4));

  // Closed form sample by sample.
  for (std::size_t k = 0; k < series.ac.size(); k += 97) {
    const double t = static_cast<double>(k) * s.dt;
    CHECK(series.ac[k] == doctest::Approx(1e-6 * std::sin(2.0 * std::numbers::pi * 1.2 * t)).epsilon(1e-9));
  }
}

TEST_CASE("ambient step shifts the mean by the step size")
{
  PhotocurrentScenario s = quiet_scenario();
  s.duration = 20.0;
  s.ambient.baseline = 20e-6;
  s.ambient.steps = {{10.0, 60e-6}};
  const PhotocurrentSeries series = synthesize(s);
  const double before = mean_of(series.total, 0, 10000);
  const double after = mean_of(series.total, 10001, 20000);
  CHECK(after - before == doctest::Approx(40e-6).epsilon(1e-12));
}

TEST_CASE("drift and flicker are added to the ambient baseline")
{
  PhotocurrentScenario s = quiet_scenario();
  s.duration = 2.0;
  s.ambient.baseline = 10e-6;
  s.ambient.drift = 1e-6;
  s.ambient.flicker_amplitude = 0.5e-6;
  s.ambient.flicker_frequency = 50.0;
  const PhotocurrentSeries series = synthesize(s);
  for (std::size_t k : {0u, 5u, 333u, 1999u}) {
    const double t = static_cast<double>(k) * 1e-3;
    const double expected = 10e-6 + 1e-6 * t + 0.5e-6 * std::sin(2.0 * std::numbers::pi * 50.0 * t);
    CHECK(series.ambient[k] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("components sum to the total at every sample")
{
  PhotocurrentScenario s;
  s.duration = 5.0;
  s.dark_current = 2e-6;
  s.ambient.baseline = 30e-6;
  s.ambient.flicker_amplitude = 1e-6;
  s.ambient.steps = {{2.5, 45e-6}};
  s.reflection_offset = 7e-6;
  s.noise_rms = 0.05e-6;
  const PhotocurrentSeries series = synthesize(s);
  for (std::size_t k = 0; k < series.total.size(); ++k) {
    const double sum = series.ac[k] + series.dark[k] + series.ambient[k] + series.reflection[k] + series.noise[k];
    REQUIRE(std::abs(sum - series.total[k]) <= 1e-15);
  }
}

TEST_CASE("synthesis is deterministic per seed")
{
  PhotocurrentScenario s;
  s.duration = 3.0;
  s.noise_rms = 0.1e-6;
  s.rng_seed = 42;
  const PhotocurrentSeries a = synthesize(s);
  const PhotocurrentSeries b = synthesize(s);
  CHECK(a.total == b.total);
  s.rng_seed = 43;
  const PhotocurrentSeries c = synthesize(s);
  CHECK(a.total != c.total);
}

TEST_CASE("every waveform family is zero-mean with the requested half swing")
{
  for (Waveform family : {Waveform::sinusoid, Waveform::synthetic_ppg, Waveform::fnirs_slow}) {
    AcSignalSpec spec;
    spec.family = family;
    spec.f0 = family == Waveform::fnirs_slow ? 0.1 : 1.2;
    spec.amplitude_peak = 2e-6;
    const AcWaveform wave(spec);
    // Dense sampling of one period.
    const int n = 20000;
    double sum = 0.0;
    double lo = 1.0;
    double hi = -1.0;
    for (int i = 0; i < n; ++i) {
      const double x = wave(i / (n * spec.f0));
      sum += x;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    CAPTURE(static_cast<int>(family));
    CHECK(std::abs(sum / n) <= 1e-12);
    CHECK(hi - lo == doctest::Approx(4e-6).epsilon(2e-3));
    // Periodic in 1/f0.
    CHECK(wave(0.3) == doctest::Approx(wave(0.3 + 5.0 / spec.f0)).epsilon(1e-9));
  }
}

TEST_CASE("synthetic PPG has a systolic peak and a smaller dicrotic peak")
{
  AcSignalSpec spec;
  spec.amplitude_peak = 1.0;
  const AcWaveform wave(spec);
  const double period = 1.0 / spec.f0;
  const double systolic = wave(spec.systolic_center * period);
  const double dicrotic = wave((spec.systolic_center + spec.dicrotic_delay) * period);
  const double trough = wave((spec.systolic_center + 0.5 * spec.dicrotic_delay) * period);
  CHECK(systolic > dicrotic);
  CHECK(dicrotic > trough);
  // The waveform maximum is the systolic peak.
  double best = -1e9;
  for (int i = 0; i < 1000; ++i) {
    best = std::max(best, wave(i * period / 1000.0));
  }
  CHECK(best == doctest::Approx(systolic).epsilon(1e-3));
}

TEST_CASE("scenario validation")
{
  PhotocurrentScenario s;
  CHECK(s.validate().empty());
  s.dt = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = PhotocurrentScenario{};
  s.duration = 0.5 * s.dt;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = PhotocurrentScenario{};
  s.ac.amplitude_peak = -1e-6;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = PhotocurrentScenario{};
  s.ac.f0 = 8.0;
  const auto warnings = s.validate();
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("fundamental") != std::string::npos);
}

TEST_CASE("band power of a pure tone lies in its bin")
{
  const double dt = 1e-3;
  const std::size_t n = 20000;
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = 0.7 * std::sin(2.0 * std::numbers::pi * 1.0 * static_cast<double>(k) * dt);
  }
  // Parseval: mean square of a sinusoid is A^2 / 2.
  CHECK(band_power(x, dt, 0.1, 5.0) == doctest::Approx(0.245).epsilon(1e-6));
  CHECK(ac_power(x) == doctest::Approx(0.245).epsilon(1e-6));
  CHECK(band_power(x, dt, 2.0, 5.0) < 1e-20);
}

TEST_CASE("two equal tones split their power across a band edge")
{
  const double dt = 1e-3;
  const std::size_t n = 20000;
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    x[k] = std::sin(2.0 * std::numbers::pi * t) + std::sin(2.0 * std::numbers::pi * 10.0 * t);
  }
  const double fraction = band_power(x, dt, 0.1, 5.0) / ac_power(x);
  CHECK(fraction == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("band power over the full band is the total power less the lowest bin")
{
  PhotocurrentScenario s;
  s.duration = 10.0;
  s.ac.amplitude_peak = 0.0;
  s.ambient.flicker_amplitude = 0.0;
  s.ambient.drift = 0.0;
  s.noise_rms = 0.2e-6;
  const PhotocurrentSeries series = synthesize(s);
  // f_lo must span two bins, so the 0.1 Hz bin of white noise (1 of 5000) drops out.
  const double full = band_power(series.total, s.dt, 0.2, 500.0);
  const double total = ac_power(series.total);
  CHECK(full <= total);
  CHECK(full == doctest::Approx(total).epsilon(2e-3));
  CHECK_THROWS_AS(band_power(series.total, s.dt, 0.2, 600.0), std::invalid_argument);
  CHECK_THROWS_AS(band_power(series.total, s.dt, 0.1, 500.0), std::invalid_argument);
}
