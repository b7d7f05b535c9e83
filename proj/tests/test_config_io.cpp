#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "pfews/config.hpp"
#include "pfews/error.hpp"
#include "pfews/events.hpp"
#include "pfews/io.hpp"
#include "pfews/rng.hpp"
#include "pfews/sim.hpp"
#include "support.hpp"

using namespace pfews;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pfews_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("empty config gives the reference defaults") {
  const auto c = parse_config("# nothing here\n\n");
  CHECK(c == ExperimentConfig{});
  CHECK(c.sim.dt == 0.01);
  CHECK(c.sim.t_total == 2500.0);
  CHECK(c.sim.omega == 2.0 * std::numbers::pi / 225.0);
  CHECK(c.sim.sigma == 0.3);
  CHECK(c.sim.x0 == 1.0);
  CHECK(c.n_runs == 1000);
  CHECK(c.detector.n_min == 80);
  CHECK(c.features.window_w == 16);
}

TEST_CASE("config text round-trips") {
  auto c = parse_config(R"(
    forcing_period = 100   # T_f
    schedule = piecewise
    levels = 1.0, 0.9, 0.8
    level_duration = 600
    t_total = 1800
    d_min = fixed(0.7)
    sigma = 0.25
    master_seed = 123456789012345
    svm_lambda = 0.001
    figure_levels = 1.1, 0.95
    out_dir = results/run a
  )");
  CHECK(c.sim.omega == doctest::Approx(2.0 * std::numbers::pi / 100.0));
  CHECK(std::get<PiecewiseConstant>(c.sim.schedule).levels.size() == 3);
  CHECK(c.d_min == DMinSampler::fixed(0.7));
  CHECK(c.out_dir == "results/run a");
  CHECK(parse_config(to_text(c)) == c);
  CHECK(parse_config(to_text(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("bogus = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config("dt = 0.01\ndt = 0.02"), ConfigError);
  CHECK_THROWS_AS(parse_config("dt = fast"), ConfigError);
  CHECK_THROWS_AS(parse_config("dt"), ConfigError);
  CHECK_THROWS_AS(parse_config("omega = 1\nforcing_period = 6"), ConfigError);
  CHECK_THROWS_AS(parse_config("sigma = -1"), ConfigError);
  CHECK_THROWS_AS(parse_config("d_min = normal(1, 2)"), ConfigError);
  CHECK_THROWS_AS(parse_config("schedule = sawtooth"), ConfigError);
  CHECK_THROWS_AS(parse_config("k_folds = 1"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.txt"), ConfigError);
  try {
    parse_config("dt = 0.01\n\nwhat = 3\n");
    FAIL("expected error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("trajectory CSV round-trips to full precision") {
  SimConfig c;
  c.t_total = 5.0;
  const auto tr = simulate(c, 4);
  const auto path = scratch("traj.csv");
  io::write_trajectory_csv(path, tr);
  const auto back = io::read_trajectory_csv(path);
  CHECK(back.t == tr.t);
  CHECK(back.x == tr.x);
  CHECK(back.d_a == tr.d_a);

  io::write_trajectory_csv(path, tr, 7);
  const auto thin = io::read_trajectory_csv(path);
  CHECK(thin.t.back() == tr.t.back());
  CHECK(thin.x[1] == tr.x[7]);
}

TEST_CASE("events CSV round-trips") {
  auto x = testing::blocks({{1.0, 200}, {-1.0, 200}, {1.0, 200}});
  const auto seg = detect_jumps(testing::make_path(x), DetectorConfig{});
  const auto path = scratch("events.csv");
  io::write_events_csv(path, seg);
  const auto rows = io::read_events_csv(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == io::EventRow{200, seg.jump_times[0], JumpDirection::Down});
  CHECK(rows[1] == io::EventRow{400, seg.jump_times[1], JumpDirection::Up});
}

TEST_CASE("features CSV round-trips, invalid rows as nan") {
  Rng rng(3);
  std::vector<FeatureRecord> rows;
  for (std::size_t i = 0; i < 20; ++i) {
    FeatureRecord r;
    r.run_id = i;
    r.d_min = rng.uniform(0.25, 0.9);
    r.features.valid = i % 4 != 0;
    r.features.label = i % 3 == 0;
    if (r.features.valid) {
      r.features.slope_var = rng.normal() * 1e-7;
      r.features.slope_ac1 = rng.normal();
      r.features.slope_jump_phase = rng.normal() / 3.0;
      r.features.slope_phase_std = -rng.normal() * 1e12;
    }
    rows.push_back(r);
  }
  const auto path = scratch("features.csv");
  io::write_features_csv(path, rows);
  const auto back = io::read_features_csv(path);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].run_id == rows[i].run_id);
    CHECK(back[i].d_min == rows[i].d_min);
    CHECK(back[i].features.valid == rows[i].features.valid);
    CHECK(back[i].features.label == rows[i].features.label);
    if (rows[i].features.valid) {
      CHECK(back[i].features.slope_var == rows[i].features.slope_var);
      CHECK(back[i].features.slope_ac1 == rows[i].features.slope_ac1);
      CHECK(back[i].features.slope_jump_phase == rows[i].features.slope_jump_phase);
      CHECK(back[i].features.slope_phase_std == rows[i].features.slope_phase_std);
    } else {
      CHECK(std::isnan(back[i].features.slope_var));
    }
  }
  const auto data = io::dataset_from_records(back);
  CHECK(data.rows() == 15);
  CHECK(data.cols() == 4);
  CHECK(data.feature_names[2] == "slope_jump_phase");
}

TEST_CASE("CSV reader rejects ragged rows") {
  const auto path = scratch("ragged.csv");
  std::ofstream(path) << "a,b\n1,2\n3\n";
  CHECK_THROWS(io::read_csv(path));
}
