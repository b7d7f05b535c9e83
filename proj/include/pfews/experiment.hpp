#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pfews/classify.hpp"
#include "pfews/config.hpp"
#include "pfews/events.hpp"
#include "pfews/features.hpp"
#include "pfews/sim.hpp"

namespace pfews {

/// Outcome of one realization of the ramp experiment.
struct RunRecord {
  std::size_t run_id = 0;
  std::uint64_t seed = 0;
  double d_min = 0.0;
  FeatureVector features;
  /// Counts after truncation at the breakdown onset.
  std::size_t jump_count = 0;
  std::size_t cycle_count = 0;
  std::optional<double> breakdown_time;
  std::optional<double> breakdown_duration;
  /// Set when the run was excluded because the integration diverged.
  std::string error;

  FeatureRecord feature_record() const { return {run_id, d_min, features}; }
};

/// Simulates run `run_id`, detects and labels jumps, truncates at the onset
/// and extracts the four trend features. A divergence is recorded in the
/// result rather than thrown.
RunRecord process_run(const ExperimentConfig& config, std::size_t run_id);

/// process_run for every run, in run order, on up to `threads` workers.
std::vector<RunRecord> compute_features(const ExperimentConfig& config, unsigned threads);

struct ClassificationResult {
  std::vector<std::size_t> folds;
  CvResult cv;
  std::vector<double> drop_column;
  std::vector<Importance> permutation;
  /// Scaler and SVM fitted on all rows, used for the decision line in the
  /// PCA projection.
  Scaler scaler;
  SvmModel full_model;
  PcaResult pca;
};

/// Named sub-seeds, all derived from the master seed.
struct SeedPlan {
  std::uint64_t split = 0;
  std::uint64_t optimizer = 0;
  std::uint64_t permutation = 0;
  std::uint64_t bootstrap = 0;
  std::uint64_t breakdown_example = 0;

  static SeedPlan from_master(std::uint64_t master);
};

/// CV, drop-column and permutation importance and PCA on one dataset.
/// Throws StratificationError when a class has fewer than k_folds rows.
ClassificationResult classify_dataset(const Dataset& data, const ExperimentConfig& config);

struct ExperimentReport {
  std::vector<RunRecord> runs;
  Dataset dataset;
  std::optional<ClassificationResult> classification;
  std::vector<std::string> warnings;
  std::string config_text;
  std::uint64_t config_hash = 0;
  std::uint64_t master_seed = 0;

  std::size_t valid_count() const;
  std::size_t excluded(Exclusion reason) const;
};

/// Everything after the simulations: dataset assembly and classification.
/// A stratification failure becomes a warning and leaves classification empty.
ExperimentReport assemble_report(const ExperimentConfig& config, std::vector<RunRecord> runs);

ExperimentReport run_experiment(const ExperimentConfig& config, unsigned threads);

/// Report JSON. Contains no timestamps or thread counts, so equal configs
/// give byte-identical output.
nlohmann::json report_json(const ExperimentReport& report);

/// Writes report.json, features.csv and (if classified) pca.csv to `dir`.
void write_experiment_outputs(const ExperimentReport& report, const std::filesystem::path& dir);

/// Hash of the configuration text excluding the output directory.
std::uint64_t config_hash(const ExperimentConfig& config);

// Figure protocols ---------------------------------------------------------

/// Per-run, per-level summaries of the piecewise-constant protocol. Entries
/// are NaN where a run has no data for a level.
struct LevelProtocolResult {
  std::vector<double> levels;
  double level_duration = 0.0;
  /// [run][level]
  std::vector<std::vector<double>> mean_var;
  std::vector<std::vector<double>> mean_ac1;
  std::vector<std::vector<double>> mean_delta;
  std::vector<std::vector<double>> circ_std;
  /// Long-format rows for export.
  struct CycleRow {
    std::size_t run, level;
    CycleStats stats;
  };
  struct JumpRow {
    std::size_t run, level, jump;
    double time, delta;
  };
  std::vector<CycleRow> cycles;
  std::vector<JumpRow> jumps;
  Trajectory example;
};

LevelProtocolResult run_level_protocol(const ExperimentConfig& config, unsigned threads);

/// Ensemble means of a [run][level] table, ignoring NaN entries.
std::vector<double> level_means(const std::vector<std::vector<double>>& table);

/// Fraction of bootstrap resamples of runs in which the ensemble level means
/// are strictly increasing, plus the 2.5% quantile of each consecutive
/// difference.
struct MonotoneCheck {
  std::vector<double> means;
  double increasing_fraction = 0.0;
  std::vector<double> diff_lower;
};
MonotoneCheck bootstrap_monotone(const std::vector<std::vector<double>>& table,
                                 std::size_t resamples, std::uint64_t seed);

struct BreakdownExample {
  Trajectory trajectory;
  SegmentSet segments;
};

/// Single ramp run from d_max down to figures.breakdown_d_min.
BreakdownExample run_breakdown_example(const ExperimentConfig& config);

/// Writes all figure data files into `dir`.
void run_figure_protocols(const ExperimentConfig& config, unsigned threads,
                          const std::filesystem::path& dir);

// Geometry diagnostics -----------------------------------------------------

struct GeometryRow {
  double d_a = 0.0;
  double omega = 0.0;
  bool fold_exists = false;
  std::optional<double> static_phase_offset;
  std::optional<double> beta;
  std::optional<double> log_floquet;
  /// Mean omega (t_jump - t_fold) of deterministic jumps after the transient.
  std::optional<double> delay;
  std::optional<double> predicted_delay;
};

/// Mean deterministic delay phase at constant amplitude, or nullopt when no
/// fold exists or no jump occurs after the transient.
std::optional<double> measure_deterministic_delay(double d_a, double omega, double dt,
                                                  const DetectorConfig& det,
                                                  std::size_t transient_periods = 2,
                                                  std::size_t measure_periods = 3);

std::vector<GeometryRow> diagnose_geometry(const std::vector<double>& amplitudes,
                                           const std::vector<double>& omegas, double dt,
                                           const DetectorConfig& det, unsigned threads = 1);

nlohmann::json geometry_json(const std::vector<GeometryRow>& rows);

}  // namespace pfews
