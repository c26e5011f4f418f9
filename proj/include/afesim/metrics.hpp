#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "afesim/common.hpp"
#include "afesim/controller.hpp"
#include "afesim/simulation.hpp"

namespace afesim {

/// Half-open sample range [begin, end) of a trace.
struct Window
{
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
};

/// |mean(v_out) - v_cm| over the window. Throws std::invalid_argument if the
/// window is empty, out of bounds or contains a non-MONITOR sample.
Volts residual_dc(const SimTrace& trace, Window window, Volts v_cm);

struct ShapeFidelity
{
  double pearson_r = 0.0;
  Seconds lag = 0.0;  // positive: recovered trails truth
  double amplitude_ratio = 0.0;

  double phase_deg(Hertz f0) const { return 360.0 * f0 * lag; }
};

/// Compares a recovered AC waveform to scaled truth. Both are mean-removed;
/// `scale` maps truth units onto recovered units (RF * OA2 gain for a
/// current-to-volts chain). The lag search is circular over half a period of
/// f0, so the series should span whole periods.
/// Throws std::invalid_argument for unequal lengths or fewer than 3 beats.
ShapeFidelity shape_fidelity(std::span<const double> recovered, std::span<const double> truth, Seconds dt, Hertz f0,
                             double scale = 1.0);

struct CompensationTime
{
  Seconds seconds = 0.0;
  bool error = false;  // an ERROR event occurred during the pass
};

/// Time from the first entry into COARSE_MEASURE to the following entry into
/// MONITOR. Throws std::invalid_argument when the log has no complete pass.
CompensationTime compensation_time(const EventLog& log);

/// Longest contiguous MONITOR run, trimmed from its end to a whole number of
/// f0 periods. nullopt if no MONITOR run spans at least one period.
std::optional<Window> analysis_window(const SimTrace& trace, Hertz f0);

/// Code writes and switch changes with time in [t0, t1].
std::size_t hardware_touches(const EventLog& log, Seconds t0, Seconds t1);

std::size_t count_events(const EventLog& log, EventKind kind);

}  // namespace afesim
