#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "afesim/afe.hpp"

using namespace afesim;

namespace {

struct Projection
{
  double gain;
  double phase_deg;  // output phase minus input phase
};

// Drives the LPF with sin(2 pi f t) long enough to settle, then projects the
// last whole periods onto sin and cos to get complex gain.
Projection simulate_lpf(const FrontEndConfig& cfg, double f, double dt)
{
  const double period = 1.0 / f;
  const double settle = 10.0 * cfg.tau();
  const auto settle_steps = static_cast<std::size_t>(std::ceil(settle / dt));
  const auto periods = std::max(1.0, std::ceil(5.0 / period));
  const auto measure_steps = static_cast<std::size_t>(std::llround(periods * period / dt));

  double v_dc = 0.0;
  double in_s = 0.0;
  double in_c = 0.0;
  double out_s = 0.0;
  double out_c = 0.0;
  for (std::size_t k = 0; k < settle_steps + measure_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double x = std::sin(2.0 * std::numbers::pi * f * t);
    // Input applied during [t, t+dt) shows up at t+dt.
    const double y = lpf_step(cfg, v_dc, x, dt);
    if (k >= settle_steps) {
      const double t_out = t + dt;
      in_s += x * std::sin(2.0 * std::numbers::pi * f * t);
      in_c += x * std::cos(2.0 * std::numbers::pi * f * t);
      out_s += y * std::sin(2.0 * std::numbers::pi * f * t_out);
      out_c += y * std::cos(2.0 * std::numbers::pi * f * t_out);
    }
    v_dc = y;
  }
  const double gain = std::hypot(out_s, out_c) / std::hypot(in_s, in_c);
  const double phase = std::atan2(out_c, out_s) - std::atan2(in_c, in_s);
  return {gain, phase * 180.0 / std::numbers::pi};
}

}  // namespace

TEST_CASE("LPF corner from the RL-CL values")
{
  const FrontEndConfig cfg;
  CHECK(cfg.tau() == doctest::Approx(0.2));
  CHECK(std::abs(cfg.lpf_cutoff() - 0.796) <= 0.001 * 0.796);
}

TEST_CASE("TIA examples")
{
  FrontEndConfig cfg;
  FrontEndState state;
  state.rf_code = 0;

  TiaResult r = tia_output(cfg, state, 0.0);
  CHECK(r.v_out == doctest::Approx(1.65));
  CHECK_FALSE(r.saturated);

  // 50 uA into 33 kOhm sits exactly on the upper rail.
  FrontEndConfig exact = cfg;
  exact.rf_spec = QuantizerSpec{8, 33e3, 1e6, Transfer::linear, Span::endpoints};
  r = tia_output(exact, state, 50e-6);
  CHECK(r.v_out == doctest::Approx(3.3));
  state.rf_code = 1;
  r = tia_output(exact, state, 50e-6);
  CHECK(r.v_out == 3.3);
  CHECK(r.saturated);

  // Perfect cancellation at 1 MOhm.
  FrontEndConfig fifty = cfg;
  fifty.idac_spec.quant = QuantizerSpec{8, 50e-6, 10e-3, Transfer::linear, Span::endpoints};
  state.rf_code = 255;
  state.idac_code = 0;
  state.s1_closed = true;
  r = tia_output(fifty, state, 50e-6);
  CHECK(r.v_out == doctest::Approx(1.65));
  CHECK_FALSE(r.saturated);
}

TEST_CASE("reference follows S2")
{
  const FrontEndConfig cfg;
  FrontEndState state;
  state.vref_code = 100;
  CHECK(reference_voltage(cfg, state) == cfg.v_cm);
  state.s2_sel = RefSource::vref_dac;
  CHECK(reference_voltage(cfg, state) == doctest::Approx(100 * 3.3 / 1024));
  CHECK(tia_output(cfg, state, 0.0).v_out == doctest::Approx(100 * 3.3 / 1024));
}

TEST_CASE("inverted polarity mirrors the TIA about the reference")
{
  FrontEndConfig cfg;
  cfg.invert_polarity = true;
  FrontEndState state;
  state.rf_code = 0;
  CHECK(tia_output(cfg, state, 10e-6).v_out == doctest::Approx(1.65 - 10e-6 * 3.9e3));
}

TEST_CASE("OA2 examples")
{
  const FrontEndConfig cfg;
  CHECK(oa2_output(cfg, cfg.v_cm) == cfg.v_cm);
  CHECK(oa2_output(cfg, cfg.v_cm + 0.020) == doctest::Approx(cfg.v_cm + 0.200));
  CHECK(oa2_output(cfg, cfg.v_cm + 0.3) == 3.3);
  CHECK(oa2_output(cfg, cfg.v_cm - 0.3) == 0.0);
}

TEST_CASE("LPF step response and DC fixed point")
{
  const FrontEndConfig cfg;
  const double dt = 1e-3;
  double v = 0.0;
  const int n = static_cast<int>(std::llround(cfg.tau() / dt));
  for (int i = 0; i < n; ++i) {
    v = lpf_step(cfg, v, 1.0, dt);
  }
  CHECK(std::abs(v - (1.0 - std::exp(-1.0))) <= 0.01 * (1.0 - std::exp(-1.0)));

  v = 0.7;
  for (int i = 0; i < 10; ++i) {
    v = lpf_step(cfg, v, 0.7, dt);
    CHECK(v == 0.7);
  }
  CHECK_THROWS_AS(lpf_step(cfg, 0.0, 1.0, cfg.tau() / 9.0), ConfigError);
  CHECK_NOTHROW(lpf_step(cfg, 0.0, 1.0, cfg.tau() / 10.0));
}

TEST_CASE("LPF sinusoidal response matches the analytic first-order transfer")
{
  const FrontEndConfig cfg;
  const double fc = cfg.lpf_cutoff();
  for (double f : {0.2, 1.0, 5.0}) {
    const Projection p = simulate_lpf(cfg, f, 1e-3);
    const double gain = 1.0 / std::sqrt(1.0 + (f / fc) * (f / fc));
    const double lag = std::atan(f / fc) * 180.0 / std::numbers::pi;
    CAPTURE(f);
    CHECK(std::abs(p.gain - gain) <= 0.02 * gain);
    CHECK(std::abs(-p.phase_deg - lag) <= 1.0);
  }
}

TEST_CASE("identity scenario holds every node at v_cm")
{
  const FrontEndConfig cfg;
  FrontEndState state = settled_state(cfg, 0.0, 255);
  for (int i = 0; i < 2000; ++i) {
    state = step(cfg, state, 0.0, 1e-3);
  }
  CHECK(state.v_out == cfg.v_cm);
  CHECK(state.v_dc == cfg.v_cm);
  CHECK(state.v_sig == cfg.v_cm);
}

TEST_CASE("TIA is affine in i_pd with slope RF while unsaturated")
{
  const FrontEndConfig cfg;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> code(0, 255);
  for (int trial = 0; trial < 500; ++trial) {
    FrontEndState state;
    state.rf_code = code(rng);
    const double rf = cfg.rf(state.rf_code);
    // Stay well inside the rails.
    const double span = 1.0 / rf;
    std::uniform_real_distribution<double> current(-span, span);
    const double i0 = current(rng);
    const double di = 1e-3 * span;
    const double slope = (tia_output(cfg, state, i0 + di).v_out - tia_output(cfg, state, i0).v_out) / di;
    REQUIRE(std::abs(slope - rf) <= 1e-9 * rf);
  }
}

TEST_CASE("compensation superposes with the photocurrent")
{
  const FrontEndConfig cfg;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> code(0, 255);
  std::uniform_real_distribution<double> current(0.0, 10e-3);
  for (int trial = 0; trial < 500; ++trial) {
    FrontEndState on;
    on.rf_code = code(rng);
    on.idac_code = code(rng);
    on.s1_closed = true;
    FrontEndState off = on;
    off.s1_closed = false;
    const double i_pd = current(rng);
    const TiaResult a = tia_output(cfg, on, i_pd);
    const TiaResult b = tia_output(cfg, off, i_pd - cfg.idac_spec.current(on.idac_code));
    if (!a.saturated) {
      REQUIRE(a.v_out == doctest::Approx(b.v_out).epsilon(1e-12));
    }
    CHECK(a.saturated == b.saturated);
  }
}

TEST_CASE("every node stays within the rails")
{
  const FrontEndConfig cfg;
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> code(0, 255);
  std::uniform_int_distribution<int> vref(0, 1023);
  std::uniform_real_distribution<double> current(-20e-3, 20e-3);
  FrontEndState state = settled_state(cfg, 0.0, 0);
  for (int k = 0; k < 20000; ++k) {
    if (k % 100 == 0) {
      state.rf_code = code(rng);
      state.idac_code = code(rng);
      state.vref_code = vref(rng);
      state.s1_closed = (k / 100) % 2 == 0;
      state.s2_sel = (k / 200) % 2 == 0 ? RefSource::v_cm : RefSource::vref_dac;
    }
    state = step(cfg, state, current(rng), 1e-3);
    REQUIRE(state.v_out >= 0.0);
    REQUIRE(state.v_out <= cfg.supply);
    REQUIRE(state.v_dc >= 0.0);
    REQUIRE(state.v_dc <= cfg.supply);
    REQUIRE(state.v_sig >= 0.0);
    REQUIRE(state.v_sig <= cfg.supply);
  }
}

TEST_CASE("settled state starts on the reference for zero current")
{
  const FrontEndConfig cfg;
  const FrontEndState s = settled_state(cfg, 50e-6, 0);
  CHECK_FALSE(s.s1_closed);
  CHECK(s.s2_sel == RefSource::v_cm);
  CHECK(s.vref_code == 512);
  CHECK(s.v_dc == doctest::Approx(1.65 + 50e-6 * 3.9e3));
  CHECK(s.v_dc == s.v_out);
}

TEST_CASE("front-end validation")
{
  FrontEndConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.v_cm = 3.3;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = FrontEndConfig{};
  cfg.cl = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = FrontEndConfig{};
  cfg.oa2_gain = 0.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
