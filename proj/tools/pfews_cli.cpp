// Command-line driver for the ensemble experiment, figure data and geometry
// diagnostics. Data goes to files under --out; progress and warnings go to
// stderr. Exit codes: 0 success, 1 runtime failure, 2 configuration error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pfews/config.hpp"
#include "pfews/error.hpp"
#include "pfews/events.hpp"
#include "pfews/experiment.hpp"
#include "pfews/io.hpp"
#include "pfews/sim.hpp"

namespace fs = std::filesystem;
using namespace pfews;

namespace {

struct Shared {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  unsigned threads = 1;
};

void add_shared(CLI::App* app, Shared& s) {
  app->add_option("--config", s.config_path, "Configuration file (key = value)");
  app->add_option("--out", s.out_dir, "Output directory (overrides out_dir)");
  app->add_option("--seed", s.seed, "Master seed (overrides master_seed)");
  app->add_option("--runs", s.runs, "Number of runs (overrides n_runs)");
  app->add_option("--threads", s.threads, "Worker threads")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve(const Shared& s) {
  ExperimentConfig cfg = s.config_path.empty() ? ExperimentConfig{} : load_config(s.config_path);
  if (!s.out_dir.empty()) cfg.out_dir = s.out_dir;
  if (s.seed) cfg.sim.master_seed = *s.seed;
  if (s.runs) cfg.n_runs = *s.runs;
  cfg.validate();
  return cfg;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_simulate(const Shared& s, std::size_t run) {
  const auto cfg = resolve(s);
  const fs::path dir = cfg.out_dir;
  const RunRecord rec = process_run(cfg, run);
  if (!rec.error.empty()) {
    std::cerr << "error: " << rec.error << '\n';
    return 1;
  }
  const SimConfig sim = with_ramp_end(cfg.sim, rec.d_min);
  const Trajectory traj = simulate(sim, rec.seed);
  const SegmentSet seg =
      label_breakdown(detect_jumps(traj, cfg.detector), sim.forcing_period(), cfg.detector);
  fs::create_directories(dir);
  io::write_trajectory_csv(dir / "trajectory.csv", traj, cfg.figures.stride);
  io::write_events_csv(dir / "events.csv", seg);

  nlohmann::json j;
  j["run_id"] = rec.run_id;
  j["seed"] = rec.seed;
  j["d_min"] = rec.d_min;
  j["jumps"] = seg.jump_count();
  j["breakdown_time"] = rec.breakdown_time ? nlohmann::json(*rec.breakdown_time) : nullptr;
  j["label"] = rec.features.label;
  j["valid"] = rec.features.valid;
  j["config_hash"] = config_hash(cfg);
  write_json(dir / "report.json", j);
  std::cerr << "run " << run << ": " << seg.jump_count() << " jumps, "
            << (seg.breakdown ? "breakdown" : "no breakdown") << '\n';
  return 0;
}

int cmd_features(const Shared& s) {
  const auto cfg = resolve(s);
  const fs::path dir = cfg.out_dir;
  std::cerr << "simulating " << cfg.n_runs << " runs on " << s.threads << " thread(s)\n";
  const auto runs = compute_features(cfg, s.threads);
  std::vector<FeatureRecord> rows;
  std::vector<std::string> warnings;
  for (const auto& r : runs) {
    rows.push_back(r.feature_record());
    if (!r.error.empty()) warnings.push_back(r.error);
  }
  print_warnings(warnings);
  fs::create_directories(dir);
  io::write_features_csv(dir / "features.csv", rows);
  ExperimentReport rep;
  rep.runs = runs;
  rep.dataset = io::dataset_from_records(rows);
  rep.warnings = warnings;
  rep.config_hash = config_hash(cfg);
  rep.master_seed = cfg.sim.master_seed;
  write_json(dir / "report.json", report_json(rep));
  return 0;
}

int cmd_classify(const Shared& s, const std::string& features_path) {
  const auto cfg = resolve(s);
  const fs::path dir = cfg.out_dir;
  const auto rows = io::read_features_csv(features_path);
  std::vector<RunRecord> runs;
  for (const auto& r : rows) {
    RunRecord rec;
    rec.run_id = r.run_id;
    rec.seed = run_seed(cfg.sim.master_seed, r.run_id);
    rec.d_min = r.d_min;
    rec.features = r.features;
    runs.push_back(rec);
  }
  const auto rep = assemble_report(cfg, std::move(runs));
  print_warnings(rep.warnings);
  write_experiment_outputs(rep, dir);
  if (rep.classification) std::cerr << "cv balanced accuracy " << rep.classification->cv.mean << '\n';
  return 0;
}

int cmd_experiment(const Shared& s) {
  const auto cfg = resolve(s);
  std::cerr << "experiment: " << cfg.n_runs << " runs on " << s.threads << " thread(s)\n";
  const auto rep = run_experiment(cfg, s.threads);
  print_warnings(rep.warnings);
  write_experiment_outputs(rep, cfg.out_dir);
  std::cerr << rep.valid_count() << " valid runs";
  if (rep.classification) std::cerr << ", cv balanced accuracy " << rep.classification->cv.mean;
  std::cerr << '\n';
  return 0;
}

int cmd_figures(const Shared& s) {
  const auto cfg = resolve(s);
  std::cerr << "figure protocols into " << cfg.out_dir << '\n';
  run_figure_protocols(cfg, s.threads, cfg.out_dir);
  return 0;
}

int cmd_diagnose(const Shared& s, const std::vector<double>& amplitudes,
                 std::vector<double> omegas, const std::vector<double>& periods,
                 std::optional<double> dt) {
  const auto cfg = resolve(s);
  for (double p : periods) {
    if (!(p > 0.0)) throw ConfigError("--period values must be positive");
    omegas.push_back(2.0 * std::numbers::pi / p);
  }
  if (amplitudes.empty()) throw ConfigError("diagnose needs at least one --da value");
  if (omegas.empty()) omegas.push_back(cfg.sim.omega);
  for (double w : omegas)
    if (!(w > 0.0)) throw ConfigError("--omega values must be positive");
  const double step = dt.value_or(cfg.sim.dt);
  if (!(step > 0.0)) throw ConfigError("--dt must be positive");

  const auto rows = diagnose_geometry(amplitudes, omegas, step, cfg.detector, s.threads);
  write_json(fs::path(cfg.out_dir) / "report.json", {{"dt", step}, {"rows", geometry_json(rows)}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Early-warning ensemble experiment for the periodically forced double well"};
  app.set_version_flag("--version", PFEWS_VERSION);
  app.require_subcommand(1);

  Shared shared;
  std::size_t run = 0;
  std::string features_path;
  std::vector<double> amplitudes, omegas, periods;
  std::optional<double> dt;

  auto* sim = app.add_subcommand("simulate", "Simulate one run and write its trajectory and jumps");
  add_shared(sim, shared);
  sim->add_option("--run", run, "Run index");

  auto* feat = app.add_subcommand("features", "Simulate the ensemble and write features.csv");
  add_shared(feat, shared);

  auto* cls = app.add_subcommand("classify", "Cross-validate the classifier on a features file");
  add_shared(cls, shared);
  cls->add_option("--features", features_path, "features.csv from the features command")
      ->required()
      ->check(CLI::ExistingFile);

  auto* exp = app.add_subcommand("experiment", "Full pipeline: features, classification, report");
  add_shared(exp, shared);

  auto* fig = app.add_subcommand("figures", "Emit all figure data files");
  add_shared(fig, shared);

  auto* diag = app.add_subcommand("diagnose", "Deterministic geometry table over amplitude/frequency grids");
  add_shared(diag, shared);
  diag->add_option("--da", amplitudes, "Forcing amplitudes")->delimiter(',');
  diag->add_option("--omega", omegas, "Angular frequencies")->delimiter(',');
  diag->add_option("--period", periods, "Forcing periods (converted to 2 pi / T)")->delimiter(',');
  diag->add_option("--dt", dt, "Integration step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(shared, run);
    if (*feat) return cmd_features(shared);
    if (*cls) return cmd_classify(shared, features_path);
    if (*exp) return cmd_experiment(shared);
    if (*fig) return cmd_figures(shared);
    if (*diag) return cmd_diagnose(shared, amplitudes, omegas, periods, dt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
