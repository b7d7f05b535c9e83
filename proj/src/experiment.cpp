#include "pfews/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <iomanip>
#include <sstream>

#include "pfews/error.hpp"
#include "pfews/geometry.hpp"
#include "pfews/io.hpp"
#include "pfews/parallel.hpp"
#include "pfews/rng.hpp"

#ifndef PFEWS_VERSION
#define PFEWS_VERSION "unknown"
#endif

namespace pfews {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* exclusion_name(Exclusion e) {
  switch (e) {
    case Exclusion::None: return "none";
    case Exclusion::TooFewCycles: return "too_few_cycles";
    case Exclusion::TooFewJumps: return "too_few_jumps";
    case Exclusion::Divergence: return "divergence";
  }
  return "none";
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setfill('0') << std::setw(16) << v;
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

/// Grid-aligned horizon no shorter than `duration`.
double grid_horizon(double duration, double dt) {
  return std::ceil(duration / dt - 1e-9) * dt;
}

double nan_mean(const std::vector<double>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    sum += x;
    ++n;
  }
  return n ? sum / static_cast<double>(n) : kNaN;
}

}  // namespace

SeedPlan SeedPlan::from_master(std::uint64_t master) {
  return {derive_seed(master, "cv.split"), derive_seed(master, "svm"),
          derive_seed(master, "perm"), derive_seed(master, "fig.bootstrap"),
          derive_seed(master, "fig.breakdown")};
}

RunRecord process_run(const ExperimentConfig& config, std::size_t run_id) {
  RunRecord rec;
  rec.run_id = run_id;
  rec.seed = run_seed(config.sim.master_seed, run_id);
  rec.d_min = draw_d_min(config.d_min, rec.seed);

  Trajectory traj;
  try {
    traj = simulate(with_ramp_end(config.sim, rec.d_min), rec.seed);
  } catch (const DivergenceError& e) {
    rec.features.exclusion = Exclusion::Divergence;
    rec.error = DivergenceError(e.step(), run_id).what();
    return rec;
  }

  SegmentSet seg = label_breakdown(detect_jumps(traj, config.detector),
                                   config.sim.forcing_period(), config.detector);
  if (seg.breakdown) {
    rec.breakdown_time = seg.breakdown->onset_time;
    rec.breakdown_duration = seg.breakdown->duration;
  }
  seg = truncate_at_onset(seg);
  rec.jump_count = seg.jump_count();
  rec.cycle_count = cycle_stats(seg, traj, config.features).size();
  rec.features = extract_features(traj, seg, config.features, config.sim.omega);
  return rec;
}

std::vector<RunRecord> compute_features(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  return parallel_map(config.n_runs, threads,
                      [&](std::size_t i) { return process_run(config, i); });
}

ClassificationResult classify_dataset(const Dataset& data, const ExperimentConfig& config) {
  const SeedPlan seeds = SeedPlan::from_master(config.sim.master_seed);
  SvmHyper hp = config.svm;
  hp.seed = seeds.optimizer;

  ClassificationResult out;
  out.folds = stratified_kfold(data.labels, config.k_folds, seeds.split);
  out.cv = cross_validate(data, out.folds, config.k_folds, hp);
  out.drop_column = drop_column_importance(data, out.folds, config.k_folds, hp);
  out.permutation = permutation_importance(data, out.cv, config.perm_repeats, seeds.permutation);
  out.scaler = Scaler::fit(data.x);
  const Eigen::MatrixXd standardized = out.scaler.apply(data.x);
  out.full_model = svm_train(standardized, data.labels, hp);
  out.pca = pca_2d(standardized);
  return out;
}

std::size_t ExperimentReport::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(runs.begin(), runs.end(), [](const auto& r) { return r.features.valid; }));
}

std::size_t ExperimentReport::excluded(Exclusion reason) const {
  return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [&](const auto& r) {
    return !r.features.valid && r.features.exclusion == reason;
  }));
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.out_dir = "-";
  return fnv1a64(to_text(c));
}

ExperimentReport assemble_report(const ExperimentConfig& config, std::vector<RunRecord> runs) {
  ExperimentReport rep;
  rep.runs = std::move(runs);
  rep.config_text = to_text(config);
  rep.config_hash = config_hash(config);
  rep.master_seed = config.sim.master_seed;

  for (const auto& r : rep.runs)
    if (!r.error.empty()) rep.warnings.push_back(r.error);

  std::vector<FeatureRecord> rows;
  for (const auto& r : rep.runs) rows.push_back(r.feature_record());
  rep.dataset = io::dataset_from_records(rows);

  try {
    rep.classification = classify_dataset(rep.dataset, config);
  } catch (const StratificationError& e) {
    rep.warnings.push_back(std::string("classification skipped: ") + e.what());
  } catch (const DegeneracyError& e) {
    rep.warnings.push_back(std::string("classification skipped: ") + e.what());
  }
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& config, unsigned threads) {
  return assemble_report(config, compute_features(config, threads));
}

json report_json(const ExperimentReport& rep) {
  json j;
  const std::size_t breakdown = static_cast<std::size_t>(
      std::count(rep.dataset.labels.begin(), rep.dataset.labels.end(), 1));
  j["runs"] = {
      {"requested", rep.runs.size()},
      {"valid", rep.valid_count()},
      {"breakdown", breakdown},
      {"no_breakdown", rep.valid_count() - breakdown},
      {"excluded",
       {{"too_few_cycles", rep.excluded(Exclusion::TooFewCycles)},
        {"too_few_jumps", rep.excluded(Exclusion::TooFewJumps)},
        {"divergence", rep.excluded(Exclusion::Divergence)}}},
  };

  if (rep.classification) {
    const auto& c = *rep.classification;
    j["cv_scores"] = c.cv.scores;
    j["cv_mean"] = c.cv.mean;
    json drop = json::object();
    json perm = json::object();
    for (std::size_t f = 0; f < rep.dataset.feature_names.size(); ++f) {
      drop[rep.dataset.feature_names[f]] = c.drop_column[f];
      perm[rep.dataset.feature_names[f]] = {{"mean", c.permutation[f].mean},
                                            {"std", c.permutation[f].stddev}};
    }
    j["drop_column"] = drop;
    j["permutation"] = perm;
    j["pca"] = {{"coords_path", "pca.csv"},
                {"explained_variance", {c.pca.explained[0], c.pca.explained[1]}}};
    std::vector<double> w(c.full_model.w.data(), c.full_model.w.data() + c.full_model.w.size());
    j["decision"] = {{"weights", w}, {"bias", c.full_model.bias}, {"space", "standardized"}};
  } else {
    j["cv_scores"] = nullptr;
    j["cv_mean"] = nullptr;
    j["drop_column"] = nullptr;
    j["permutation"] = nullptr;
    j["pca"] = nullptr;
  }

  json records = json::array();
  for (const auto& r : rep.runs) {
    const auto& f = r.features;
    json rec = {{"run_id", r.run_id},
                {"seed", r.seed},
                {"d_min", r.d_min},
                {"label", f.label},
                {"valid", f.valid},
                {"exclusion", exclusion_name(f.valid ? Exclusion::None : f.exclusion)},
                {"jump_count", r.jump_count},
                {"cycle_count", r.cycle_count},
                {"breakdown", {{"onset_time", optional_json(r.breakdown_time)},
                               {"duration", optional_json(r.breakdown_duration)}}}};
    if (f.valid) {
      rec["slope_var"] = f.slope_var;
      rec["slope_ac1"] = f.slope_ac1;
      rec["slope_jump_phase"] = f.slope_jump_phase;
      rec["slope_phase_std"] = f.slope_phase_std;
    }
    records.push_back(std::move(rec));
  }
  j["records"] = std::move(records);
  j["warnings"] = rep.warnings;

  const SeedPlan seeds = SeedPlan::from_master(rep.master_seed);
  j["provenance"] = {{"config_hash", hex64(rep.config_hash)},
                     {"master_seed", rep.master_seed},
                     {"code_version", PFEWS_VERSION},
                     {"seeds",
                      {{"split", seeds.split},
                       {"optimizer", seeds.optimizer},
                       {"permutation", seeds.permutation}}}};
  return j;
}

void write_experiment_outputs(const ExperimentReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", report_json(rep).dump(2) + "\n");
  std::vector<FeatureRecord> rows;
  for (const auto& r : rep.runs) rows.push_back(r.feature_record());
  io::write_features_csv(dir / "features.csv", rows);
  if (rep.classification) io::write_pca_csv(dir / "pca.csv", rep.dataset, rep.classification->pca);
  write_text(dir / "config_used.txt", rep.config_text);
}

// Figure protocols ---------------------------------------------------------

LevelProtocolResult run_level_protocol(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  const auto& fig = config.figures;
  const double period = config.sim.forcing_period();

  LevelProtocolResult out;
  out.levels = fig.levels;
  out.level_duration = static_cast<double>(fig.level_periods) * period;

  SimConfig sim = config.sim;
  sim.schedule = PiecewiseConstant{fig.levels, out.level_duration};
  sim.t_total = grid_horizon(out.level_duration * static_cast<double>(fig.levels.size()), sim.dt);
  const std::size_t n_levels = fig.levels.size();
  const double level_duration = out.level_duration;
  auto level_of = [&](double t) {
    return std::min(static_cast<std::size_t>(std::floor(t / level_duration)), n_levels - 1);
  };

  struct PerRun {
    std::vector<double> var, ac1, delta, cstd;
    std::vector<LevelProtocolResult::CycleRow> cycles;
    std::vector<LevelProtocolResult::JumpRow> jumps;
    Trajectory example;
  };

  auto per_run = parallel_map(fig.runs, threads, [&](std::size_t r) {
    PerRun pr;
    const Trajectory traj = simulate(sim, derive_seed(config.sim.master_seed, "fig.levels", r));
    SegmentSet seg = truncate_at_onset(
        label_breakdown(detect_jumps(traj, config.detector), period, config.detector));

    std::vector<std::vector<double>> var(n_levels), ac1(n_levels), deltas(n_levels);
    for (const auto& cs : cycle_stats(seg, traj, config.features)) {
      const std::size_t a = level_of(cs.t_begin);
      if (level_of(cs.t_end) != a || cs.t_end > static_cast<double>(a + 1) * level_duration)
        continue;
      var[a].push_back(cs.var);
      ac1[a].push_back(cs.ac1);
      pr.cycles.push_back({r, a, cs});
    }
    const PhaseSeries ph = jump_phases(seg, config.sim.omega);
    for (std::size_t k = 0; k < ph.size(); ++k) {
      const std::size_t a = level_of(ph.time[k]);
      deltas[a].push_back(ph.delta[k]);
      pr.jumps.push_back({r, a, k, ph.time[k], ph.delta[k]});
    }
    for (std::size_t a = 0; a < n_levels; ++a) {
      pr.var.push_back(nan_mean(var[a].empty() ? std::vector<double>{kNaN} : var[a]));
      pr.ac1.push_back(nan_mean(ac1[a].empty() ? std::vector<double>{kNaN} : ac1[a]));
      pr.delta.push_back(deltas[a].empty() ? kNaN : circular_mean(deltas[a]));
      pr.cstd.push_back(deltas[a].size() < 2 ? kNaN : circular_std(deltas[a]));
    }
    if (r == 0) pr.example = traj;
    return pr;
  });

  for (auto& pr : per_run) {
    out.mean_var.push_back(std::move(pr.var));
    out.mean_ac1.push_back(std::move(pr.ac1));
    out.mean_delta.push_back(std::move(pr.delta));
    out.circ_std.push_back(std::move(pr.cstd));
    out.cycles.insert(out.cycles.end(), pr.cycles.begin(), pr.cycles.end());
    out.jumps.insert(out.jumps.end(), pr.jumps.begin(), pr.jumps.end());
  }
  out.example = std::move(per_run.front().example);
  return out;
}

std::vector<double> level_means(const std::vector<std::vector<double>>& table) {
  if (table.empty()) return {};
  const std::size_t n_levels = table.front().size();
  std::vector<double> out(n_levels);
  for (std::size_t a = 0; a < n_levels; ++a) {
    std::vector<double> col;
    for (const auto& row : table) col.push_back(row[a]);
    out[a] = nan_mean(col);
  }
  return out;
}

MonotoneCheck bootstrap_monotone(const std::vector<std::vector<double>>& table,
                                 std::size_t resamples, std::uint64_t seed) {
  MonotoneCheck mc;
  mc.means = level_means(table);
  const std::size_t n_levels = mc.means.size();
  if (n_levels < 2 || resamples == 0) return mc;

  Rng rng(seed);
  std::vector<std::vector<double>> diffs(n_levels - 1);
  std::size_t increasing = 0;
  std::vector<std::vector<double>> sample(table.size());
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& row : sample) row = table[rng.below(table.size())];
    const auto m = level_means(sample);
    bool inc = true;
    for (std::size_t a = 0; a + 1 < n_levels; ++a) {
      const double d = m[a + 1] - m[a];
      diffs[a].push_back(d);
      inc = inc && d > 0.0;
    }
    increasing += inc;
  }
  mc.increasing_fraction = static_cast<double>(increasing) / static_cast<double>(resamples);
  for (auto& d : diffs) {
    std::sort(d.begin(), d.end());
    mc.diff_lower.push_back(d[static_cast<std::size_t>(0.025 * static_cast<double>(d.size()))]);
  }
  return mc;
}

BreakdownExample run_breakdown_example(const ExperimentConfig& config) {
  SimConfig sim = config.sim;
  double d_max = 1.2;
  if (const auto* ramp = std::get_if<LinearRamp>(&sim.schedule)) d_max = ramp->d_max;
  sim.schedule = LinearRamp{d_max, config.figures.breakdown_d_min};
  BreakdownExample ex;
  ex.trajectory = simulate(sim, SeedPlan::from_master(config.sim.master_seed).breakdown_example);
  ex.segments =
      label_breakdown(detect_jumps(ex.trajectory, config.detector), sim.forcing_period(), config.detector);
  return ex;
}

void run_figure_protocols(const ExperimentConfig& config, unsigned threads,
                          const std::filesystem::path& dir) {
  using io::format_double;
  std::filesystem::create_directories(dir);
  const SeedPlan seeds = SeedPlan::from_master(config.sim.master_seed);
  json summary;

  // (a) single-run breakdown time series
  {
    const auto ex = run_breakdown_example(config);
    io::write_trajectory_csv(dir / "fig1_timeseries.csv", ex.trajectory, config.figures.stride);
    io::write_events_csv(dir / "fig1_events.csv", ex.segments);
    json b = nullptr;
    if (ex.segments.breakdown) {
      b = {{"onset_time", ex.segments.breakdown->onset_time},
           {"duration", ex.segments.breakdown->duration},
           {"segment", ex.segments.breakdown->segment}};
    }
    summary["breakdown_example"] = {{"d_min", config.figures.breakdown_d_min},
                                    {"jumps", ex.segments.jump_count()},
                                    {"onset", b}};
  }

  // (b), (c) piecewise-constant levels
  {
    const auto lp = run_level_protocol(config, threads);
    io::write_trajectory_csv(dir / "fig3_trajectory.csv", lp.example, config.figures.stride);

    std::ofstream cyc(dir / "fig3_cycles.csv");
    cyc << "run,level,d_a,cycle,t_begin,t_end,var,ac1\n";
    for (const auto& c : lp.cycles)
      cyc << c.run << ',' << c.level << ',' << format_double(lp.levels[c.level]) << ','
          << c.stats.cycle_index << ',' << format_double(c.stats.t_begin) << ','
          << format_double(c.stats.t_end) << ',' << format_double(c.stats.var) << ','
          << format_double(c.stats.ac1) << '\n';

    std::ofstream jmp(dir / "fig_mean_std_jumps.csv");
    jmp << "run,level,d_a,jump,time,delta\n";
    for (const auto& r : lp.jumps)
      jmp << r.run << ',' << r.level << ',' << format_double(lp.levels[r.level]) << ',' << r.jump
          << ',' << format_double(r.time) << ',' << format_double(r.delta) << '\n';

    const auto var = bootstrap_monotone(lp.mean_var, config.figures.bootstrap, derive_seed(seeds.bootstrap, "var"));
    const auto ac1 = bootstrap_monotone(lp.mean_ac1, config.figures.bootstrap, derive_seed(seeds.bootstrap, "ac1"));
    const auto dlt = bootstrap_monotone(lp.mean_delta, config.figures.bootstrap, derive_seed(seeds.bootstrap, "delta"));
    const auto cst = bootstrap_monotone(lp.circ_std, config.figures.bootstrap, derive_seed(seeds.bootstrap, "circ_std"));

    std::ofstream lv(dir / "fig3_levels.csv");
    lv << "level,d_a,mean_var,mean_ac1,mean_delta,circ_std\n";
    for (std::size_t a = 0; a < lp.levels.size(); ++a)
      lv << a << ',' << format_double(lp.levels[a]) << ',' << format_double(var.means[a]) << ','
         << format_double(ac1.means[a]) << ',' << format_double(dlt.means[a]) << ','
         << format_double(cst.means[a]) << '\n';

    auto check = [](const MonotoneCheck& m) {
      return json{{"means", m.means},
                  {"increasing_fraction", m.increasing_fraction},
                  {"diff_lower_2_5", m.diff_lower}};
    };
    summary["levels"] = {{"d_a", lp.levels},
                         {"level_duration", lp.level_duration},
                         {"runs", config.figures.runs},
                         {"var", check(var)},
                         {"ac1", check(ac1)},
                         {"delta", check(dlt)},
                         {"circ_std", check(cst)}};
  }

  // (d), (e) class-conditional features and PCA decision geometry
  {
    const auto rep = run_experiment(config, threads);
    write_experiment_outputs(rep, dir);
    std::ofstream cls(dir / "fig4_class_features.csv");
    cls << "run_id,label";
    for (const auto& name : rep.dataset.feature_names) cls << ',' << name;
    cls << '\n';
    for (std::size_t i = 0; i < rep.dataset.rows(); ++i) {
      cls << rep.dataset.run_ids[i] << ',' << rep.dataset.labels[i];
      for (Eigen::Index c = 0; c < rep.dataset.x.cols(); ++c)
        cls << ',' << format_double(rep.dataset.x(static_cast<Eigen::Index>(i), c));
      cls << '\n';
    }
    if (rep.classification) {
      const auto& c = *rep.classification;
      io::write_pca_csv(dir / "fig5_pca.csv", rep.dataset, c.pca);
      // The decision function restricted to the PC plane through the data
      // centre: w . (center + a1 pc1 + a2 pc2) + b.
      const Eigen::VectorXd w_pc = c.pca.axes.transpose() * c.full_model.w;
      const double offset = c.full_model.w.dot(c.pca.center) + c.full_model.bias;
      summary["decision_line"] = {{"pc1", w_pc(0)}, {"pc2", w_pc(1)}, {"intercept", offset},
                                  {"explained_variance", {c.pca.explained[0], c.pca.explained[1]}}};
      summary["cv_mean"] = c.cv.mean;
    } else {
      summary["decision_line"] = nullptr;
    }
    summary["warnings"] = rep.warnings;
  }

  write_text(dir / "figures.json", summary.dump(2) + "\n");
}

// Geometry diagnostics -----------------------------------------------------

std::optional<double> measure_deterministic_delay(double d_a, double omega, double dt,
                                                  const DetectorConfig& det,
                                                  std::size_t transient_periods,
                                                  std::size_t measure_periods) {
  if (!(d_a > kFoldValue)) return std::nullopt;
  SimConfig sim;
  sim.dt = dt;
  sim.omega = omega;
  sim.sigma = 0.0;
  sim.x0 = 1.0;
  sim.schedule = ConstantAmplitude{d_a};
  const double period = sim.forcing_period();
  sim.t_total = grid_horizon(static_cast<double>(transient_periods + measure_periods) * period, dt);

  const Trajectory traj = simulate(sim, 0);
  const SegmentSet seg = detect_jumps(traj, det);
  const double start = static_cast<double>(transient_periods) * period;
  double sum = 0.0;
  std::size_t n = 0;
  for (double t : seg.jump_times) {
    if (t <= start) continue;
    if (auto jt = jump_timing(t, omega, d_a)) {
      sum += jt->phi;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::vector<GeometryRow> diagnose_geometry(const std::vector<double>& amplitudes,
                                           const std::vector<double>& omegas, double dt,
                                           const DetectorConfig& det, unsigned threads) {
  const std::size_t n = amplitudes.size() * omegas.size();
  return parallel_map(n, threads, [&](std::size_t i) {
    GeometryRow row;
    row.d_a = amplitudes[i / omegas.size()];
    row.omega = omegas[i % omegas.size()];
    const FoldInfo fi = fold_info(row.d_a);
    row.fold_exists = fi.exists;
    row.static_phase_offset = fi.static_phase_offset;
    if (fi.exists) row.beta = fold_sweep_rate(row.d_a, row.omega);
    if (row.d_a > kFoldValue) {
      row.predicted_delay = predicted_delay_phase(row.d_a, row.omega);
      SimConfig sim;
      sim.dt = dt;
      sim.omega = row.omega;
      sim.sigma = 0.0;
      sim.schedule = ConstantAmplitude{row.d_a};
      try {
        row.log_floquet = floquet_multiplier(sim).log_multiplier;
      } catch (const ConvergenceError&) {
      }
      row.delay = measure_deterministic_delay(row.d_a, row.omega, dt, det);
    }
    return row;
  });
}

json geometry_json(const std::vector<GeometryRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"d_a", r.d_a},
                   {"omega", r.omega},
                   {"fold_exists", r.fold_exists},
                   {"static_phase_offset", optional_json(r.static_phase_offset)},
                   {"beta", optional_json(r.beta)},
                   {"log_floquet", optional_json(r.log_floquet)},
                   {"delay", optional_json(r.delay)},
                   {"predicted_delay", optional_json(r.predicted_delay)}});
  }
  return arr;
}

}  // namespace pfews
