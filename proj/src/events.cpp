#include "pfews/events.hpp"

#include <cmath>

#include "pfews/error.hpp"

namespace pfews {

void DetectorConfig::validate() const {
  if (!(x_up > 0.0 && x_low < 0.0)) throw ConfigError("detector needs x_up > 0 > x_low");
  if (n_min < 2) throw ConfigError("n_min must be at least 2");
  if (!(breakdown_factor > 0.0)) throw ConfigError("breakdown_factor must be positive");
}

SegmentSet detect_jumps(const Trajectory& trajectory, const DetectorConfig& det) {
  det.validate();
  if (trajectory.empty()) throw DomainError("cannot detect jumps on an empty trajectory");

  const auto& x = trajectory.x;
  const std::size_t last = x.size() - 1;

  // Raw hysteresis crossings; a stack lets chatter pairs cancel.
  struct Crossing {
    std::size_t index;
    JumpDirection dir;
  };
  std::vector<Crossing> kept;
  Well well = x[0] >= 0.0 ? Well::Upper : Well::Lower;
  for (std::size_t i = 1; i < last; ++i) {
    if (well == Well::Upper && x[i] < det.x_low) {
      well = Well::Lower;
    } else if (well == Well::Lower && x[i] > det.x_up) {
      well = Well::Upper;
    } else {
      continue;
    }
    const JumpDirection dir = well == Well::Lower ? JumpDirection::Down : JumpDirection::Up;
    if (!kept.empty() && i - kept.back().index < det.n_min) {
      kept.pop_back();
    } else {
      kept.push_back({i, dir});
    }
  }

  SegmentSet out;
  out.dt = trajectory.dt();
  out.last_index = last;
  for (const auto& c : kept) {
    out.jump_indices.push_back(c.index);
    out.jump_times.push_back(trajectory.t[c.index]);
    out.directions.push_back(c.dir);
  }

  Well seg_well = x[0] >= 0.0 ? Well::Upper : Well::Lower;
  std::size_t begin = 0;
  for (std::size_t j = 0; j <= kept.size(); ++j) {
    const bool final_seg = j == kept.size();
    const std::size_t end = final_seg ? last : kept[j].index;
    Segment seg{begin, end, seg_well, j == 0, final_seg};
    const bool boundary = seg.starts_at_boundary || seg.ends_at_boundary;
    if (!(boundary && seg.length() < det.n_min)) out.segments.push_back(seg);
    if (!final_seg) {
      begin = end;
      seg_well = kept[j].dir == JumpDirection::Down ? Well::Lower : Well::Upper;
    }
  }
  return out;
}

SegmentSet label_breakdown(SegmentSet segments, double forcing_period, const DetectorConfig& det) {
  segments.breakdown.reset();
  const double limit = det.breakdown_factor * forcing_period;
  for (std::size_t k = 0; k < segments.segments.size(); ++k) {
    const Segment& s = segments.segments[k];
    const double duration = segments.duration(s);
    if (duration > limit) {
      segments.breakdown =
          Breakdown{k, s.begin, static_cast<double>(s.begin) * segments.dt, duration};
      break;
    }
  }
  return segments;
}

SegmentSet truncate_at_onset(const SegmentSet& segments) {
  if (!segments.breakdown) return segments;
  const Breakdown& onset = *segments.breakdown;
  if (onset.segment >= segments.segments.size()) return segments;

  SegmentSet out = segments;
  out.segments.resize(onset.segment);
  out.jump_indices.clear();
  out.jump_times.clear();
  out.directions.clear();
  for (std::size_t j = 0; j < segments.jump_indices.size(); ++j) {
    if (segments.jump_indices[j] > onset.begin_index) break;
    out.jump_indices.push_back(segments.jump_indices[j]);
    out.jump_times.push_back(segments.jump_times[j]);
    out.directions.push_back(segments.directions[j]);
  }
  return out;
}

}  // namespace pfews
