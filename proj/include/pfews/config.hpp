#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pfews/classify.hpp"
#include "pfews/events.hpp"
#include "pfews/features.hpp"
#include "pfews/sim.hpp"

namespace pfews {

/// Settings of the figure-data protocols.
struct FigureConfig {
  std::size_t runs = 50;
  std::vector<double> levels = {1.00, 0.90, 0.80, 0.72};
  /// Duration of each amplitude level, in forcing periods.
  std::size_t level_periods = 6;
  /// Ramp end of the single-run breakdown example.
  double breakdown_d_min = 0.25;
  /// Keep every n-th grid point in exported time series.
  std::size_t stride = 10;
  std::size_t bootstrap = 2000;

  bool operator==(const FigureConfig&) const = default;
};

struct ExperimentConfig {
  SimConfig sim;
  DMinSampler d_min = DMinSampler::uniform(0.25, 0.9);
  DetectorConfig detector;
  FeatureConfig features;
  SvmHyper svm;
  std::size_t n_runs = 1000;
  std::size_t k_folds = 5;
  std::size_t perm_repeats = 20;
  FigureConfig figures;
  std::string out_dir = "out";

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses the flat `key = value` format. `#` starts a comment; unknown keys,
/// duplicate keys and malformed values raise ConfigError naming the line.
ExperimentConfig parse_config(std::string_view text);

ExperimentConfig load_config(const std::string& path);

/// Canonical text form of every key; parse_config(to_text(c)) == c.
std::string to_text(const ExperimentConfig& config);

}  // namespace pfews
