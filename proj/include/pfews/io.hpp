#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "pfews/classify.hpp"
#include "pfews/events.hpp"
#include "pfews/features.hpp"
#include "pfews/sim.hpp"

namespace pfews::io {

/// %.17g, enough digits for an exact double round trip.
std::string format_double(double v);

/// Header `t,x,d_a`; every `stride`-th grid point plus the last one.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          std::size_t stride = 1);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

struct EventRow {
  std::size_t jump_index = 0;
  double jump_time = 0.0;
  JumpDirection direction = JumpDirection::Down;

  bool operator==(const EventRow&) const = default;
};

/// Header `jump_index,jump_time,direction`.
void write_events_csv(const std::filesystem::path& path, const SegmentSet& segments);
std::vector<EventRow> read_events_csv(const std::filesystem::path& path);

/// Header `run_id,d_min,slope_var,slope_ac1,slope_jump_phase,slope_phase_std,label,valid`.
/// Slopes of invalid runs are written as nan.
void write_features_csv(const std::filesystem::path& path, const std::vector<FeatureRecord>& rows);
std::vector<FeatureRecord> read_features_csv(const std::filesystem::path& path);

/// Header `run_id,pc1,pc2,label`.
void write_pca_csv(const std::filesystem::path& path, const Dataset& data, const PcaResult& pca);

/// Reads a CSV into a header and rows of raw fields. Throws std::runtime_error
/// if the file cannot be read or a row has the wrong field count.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

/// Builds the classification dataset from the valid rows.
Dataset dataset_from_records(const std::vector<FeatureRecord>& rows);

}  // namespace pfews::io
