#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pfews/sim.hpp"

namespace pfews {

struct DetectorConfig {
  double x_up = 0.4;
  double x_low = -0.4;
  /// Minimum segment length in grid steps.
  std::size_t n_min = 80;
  /// Breakdown when a segment lasts strictly longer than this fraction of T_f.
  double breakdown_factor = 0.75;

  void validate() const;

  bool operator==(const DetectorConfig&) const = default;
};

enum class Well { Lower, Upper };
enum class JumpDirection { Down, Up };

/// Between-jump interval [begin, end] in grid indices.
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
  Well well = Well::Upper;
  /// Bounded by the artificial endpoint i_0 = 0 or i_J = N rather than a jump.
  bool starts_at_boundary = false;
  bool ends_at_boundary = false;

  std::size_t length() const { return end - begin; }
  bool operator==(const Segment&) const = default;
};

struct Breakdown {
  /// Position of the onset segment in the untruncated segment list. After
  /// truncation this equals the number of retained segments.
  std::size_t segment = 0;
  std::size_t begin_index = 0;
  double onset_time = 0.0;
  double duration = 0.0;

  bool operator==(const Breakdown&) const = default;
};

struct SegmentSet {
  std::vector<std::size_t> jump_indices;
  std::vector<double> jump_times;
  std::vector<JumpDirection> directions;
  std::vector<Segment> segments;
  std::optional<Breakdown> breakdown;
  double dt = 0.0;
  /// N, the last grid index of the source trajectory.
  std::size_t last_index = 0;

  std::size_t jump_count() const { return jump_indices.size(); }
  double duration(const Segment& s) const { return static_cast<double>(s.length()) * dt; }

  bool operator==(const SegmentSet&) const = default;
};

/// Two-threshold hysteresis detector with chatter suppression.
///
/// The initial well is upper iff x(0) >= 0. A down-jump is the first index
/// with x < x_low while in the upper well, an up-jump the first index with
/// x > x_up while in the lower well. A segment between two jumps shorter than
/// n_min steps is chatter: both of its bounding jumps are removed, which
/// merges its neighbours and keeps the well labels alternating. Boundary
/// segments shorter than n_min are dropped without touching any jump.
SegmentSet detect_jumps(const Trajectory& trajectory, const DetectorConfig& det);

/// Marks the earliest segment with duration > breakdown_factor * t_f. The
/// final segment counts with its duration measured to the horizon.
SegmentSet label_breakdown(SegmentSet segments, double forcing_period, const DetectorConfig& det);

/// Keeps the segments strictly before the breakdown onset and the jumps that
/// bound them. Identity when no breakdown is labelled; idempotent.
SegmentSet truncate_at_onset(const SegmentSet& segments);

}  // namespace pfews
