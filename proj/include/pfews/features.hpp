#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pfews/events.hpp"
#include "pfews/sim.hpp"

namespace pfews {

struct FeatureConfig {
  /// Fraction of each segment dropped at both ends before detrending.
  double p_buf = 0.05;
  int detrend_degree = 3;
  /// Rolling window (in jumps) for the circular dispersion series.
  std::size_t window_w = 16;
  /// Leading windows shorter than window_w are kept once they hold this many
  /// jumps; window_min = window_w keeps full windows only.
  std::size_t window_min = 2;
  std::size_t min_cycles = 5;
  std::size_t min_jumps = 5;

  void validate() const;

  bool operator==(const FeatureConfig&) const = default;
};

struct CycleStats {
  std::size_t cycle_index = 0;
  double var = 0.0;
  double ac1 = 0.0;
  std::size_t sample_count = 0;
  /// Grid time of the cycle's first and last samples.
  double t_begin = 0.0;
  double t_end = 0.0;
};

struct PhaseSeries {
  /// Position of each jump in the SegmentSet's jump list.
  std::vector<std::size_t> jump_index;
  std::vector<double> time;
  /// Forcing phase omega t mod 2 pi, in [0, 2 pi).
  std::vector<double> phi;
  /// Signed difference to the nearest extremum phase (0 or pi), in (-pi, pi].
  std::vector<double> delta;
  /// Right-aligned rolling circular std; entry j covers deltas j .. j + W - 1.
  std::vector<double> rolling_circ_std;

  std::size_t size() const { return delta.size(); }
};

enum class Exclusion { None, TooFewCycles, TooFewJumps, Divergence };

struct FeatureVector {
  double slope_var = 0.0;
  double slope_ac1 = 0.0;
  double slope_jump_phase = 0.0;
  double slope_phase_std = 0.0;
  bool label = false;
  bool valid = false;
  Exclusion exclusion = Exclusion::None;
};

/// One row of the per-run feature table.
struct FeatureRecord {
  std::size_t run_id = 0;
  double d_min = 0.0;
  FeatureVector features;
};

/// Principal value in (-pi, pi].
double wrap_angle(double theta);

/// Drops floor(p_buf n) samples at each end, fits a least-squares polynomial
/// of detrend_degree against the local sample index and returns the interior
/// minus the fit. nullopt when fewer than degree + 2 interior samples remain.
std::optional<std::vector<double>> detrend_segment(std::span<const double> samples,
                                                   const FeatureConfig& cfg);

/// Sample variance with 1/(n-1) normalization. Needs n >= 2.
double sample_variance(std::span<const double> y);

/// sum (y_i - m)(y_{i+1} - m) / sum (y_i - m)^2; nullopt when the
/// denominator is zero or n < 2.
std::optional<double> lag1_autocorrelation(std::span<const double> y);

/// Per-cycle variance and AC1 of the concatenated detrended residuals of
/// segment pairs (0, 1), (2, 3), ... A trailing odd segment is dropped, as
/// is any cycle with a skipped segment or zero residual variance.
std::vector<CycleStats> cycle_stats(const SegmentSet& segments, const Trajectory& trajectory,
                                    const FeatureConfig& cfg);

/// OLS slope of values against their 0-based index. Throws DomainError for
/// fewer than two values.
double ols_slope(std::span<const double> values);

/// Forcing phases of all detected jumps and their signed offset from the
/// nearest forcing extremum. Exact ties (phase pi/2 or 3pi/2) go to the
/// earlier extremum.
PhaseSeries jump_phases(const SegmentSet& segments, double omega);

/// |mean of e^{i delta}|. Throws DomainError on an empty window.
double mean_resultant_length(std::span<const double> deltas);

/// atan2 of the mean phasor.
double circular_mean(std::span<const double> deltas);

/// sqrt(-2 log R) with R clamped to [1e-12, 1].
double circular_std(std::span<const double> deltas);

/// Right-aligned rolling circular std over the last `window` values. Leading
/// partial windows are emitted once they hold `min_periods` values; the
/// default keeps full windows only, so the series is empty below `window`.
std::vector<double> rolling_circ_std(std::span<const double> deltas, std::size_t window,
                                     std::size_t min_periods = 0);

/// The four trend features of one run. `segments` must already be truncated
/// at the breakdown onset; the label is taken from its breakdown field.
FeatureVector extract_features(const Trajectory& trajectory, const SegmentSet& segments,
                               const FeatureConfig& cfg, double omega);

}  // namespace pfews
