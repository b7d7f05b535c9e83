#include "pfews/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace pfews::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::runtime_error("bad number '" + s + "'");
  return v;
}

std::size_t parse_size(const std::string& s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::runtime_error("bad integer '" + s + "'");
  return v;
}

void expect_header(const CsvTable& t, const std::vector<std::string>& header,
                   const std::filesystem::path& path) {
  if (t.header != header) throw std::runtime_error("unexpected header in '" + path.string() + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      out.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  };
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV '" + path.string() + "'");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.header.size())
      throw std::runtime_error("ragged row in '" + path.string() + "'");
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          std::size_t stride) {
  auto out = open_out(path);
  out << "t,x,d_a\n";
  stride = std::max<std::size_t>(stride, 1);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (i % stride != 0 && i + 1 != traj.size()) continue;
    out << format_double(traj.t[i]) << ',' << format_double(traj.x[i]) << ','
        << format_double(traj.d_a[i]) << '\n';
  }
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  expect_header(t, {"t", "x", "d_a"}, path);
  Trajectory traj;
  for (const auto& r : t.rows) {
    traj.t.push_back(parse_double(r[0]));
    traj.x.push_back(parse_double(r[1]));
    traj.d_a.push_back(parse_double(r[2]));
  }
  return traj;
}

void write_events_csv(const std::filesystem::path& path, const SegmentSet& segments) {
  auto out = open_out(path);
  out << "jump_index,jump_time,direction\n";
  for (std::size_t j = 0; j < segments.jump_count(); ++j) {
    out << segments.jump_indices[j] << ',' << format_double(segments.jump_times[j]) << ','
        << (segments.directions[j] == JumpDirection::Down ? "down" : "up") << '\n';
  }
}

std::vector<EventRow> read_events_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  expect_header(t, {"jump_index", "jump_time", "direction"}, path);
  std::vector<EventRow> out;
  for (const auto& r : t.rows) {
    if (r[2] != "down" && r[2] != "up") throw std::runtime_error("bad direction '" + r[2] + "'");
    out.push_back({parse_size(r[0]), parse_double(r[1]),
                   r[2] == "down" ? JumpDirection::Down : JumpDirection::Up});
  }
  return out;
}

void write_features_csv(const std::filesystem::path& path, const std::vector<FeatureRecord>& rows) {
  auto out = open_out(path);
  out << "run_id,d_min,slope_var,slope_ac1,slope_jump_phase,slope_phase_std,label,valid\n";
  for (const auto& r : rows) {
    const auto& f = r.features;
    auto slope = [&](double v) { return f.valid ? format_double(v) : std::string("nan"); };
    out << r.run_id << ',' << format_double(r.d_min) << ',' << slope(f.slope_var) << ','
        << slope(f.slope_ac1) << ',' << slope(f.slope_jump_phase) << ','
        << slope(f.slope_phase_std) << ',' << int(f.label) << ',' << int(f.valid) << '\n';
  }
}

std::vector<FeatureRecord> read_features_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  expect_header(t,
                {"run_id", "d_min", "slope_var", "slope_ac1", "slope_jump_phase",
                 "slope_phase_std", "label", "valid"},
                path);
  std::vector<FeatureRecord> out;
  for (const auto& r : t.rows) {
    FeatureRecord rec;
    rec.run_id = parse_size(r[0]);
    rec.d_min = parse_double(r[1]);
    rec.features.valid = r[7] == "1";
    rec.features.label = r[6] == "1";
    if (rec.features.valid) {
      rec.features.slope_var = parse_double(r[2]);
      rec.features.slope_ac1 = parse_double(r[3]);
      rec.features.slope_jump_phase = parse_double(r[4]);
      rec.features.slope_phase_std = parse_double(r[5]);
    } else {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      rec.features.slope_var = rec.features.slope_ac1 = nan;
      rec.features.slope_jump_phase = rec.features.slope_phase_std = nan;
    }
    out.push_back(rec);
  }
  return out;
}

void write_pca_csv(const std::filesystem::path& path, const Dataset& data, const PcaResult& pca) {
  auto out = open_out(path);
  out << "run_id,pc1,pc2,label\n";
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << data.run_ids[i] << ',' << format_double(pca.coords(r, 0)) << ','
        << format_double(pca.coords(r, 1)) << ',' << data.labels[i] << '\n';
  }
}

Dataset dataset_from_records(const std::vector<FeatureRecord>& rows) {
  Dataset d;
  for (auto name : kFeatureNames) d.feature_names.emplace_back(name);
  std::size_t n = 0;
  for (const auto& r : rows) n += r.features.valid;
  d.x.resize(static_cast<Eigen::Index>(n), 4);
  std::size_t i = 0;
  for (const auto& r : rows) {
    if (!r.features.valid) continue;
    const auto& f = r.features;
    d.x.row(static_cast<Eigen::Index>(i++)) << f.slope_var, f.slope_ac1, f.slope_jump_phase,
        f.slope_phase_std;
    d.labels.push_back(f.label ? 1 : 0);
    d.run_ids.push_back(r.run_id);
  }
  return d;
}

}  // namespace pfews::io
