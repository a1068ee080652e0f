#include "iukf/outputs.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "iukf/errors.hpp"

namespace iukf {
namespace {

std::ofstream open_for_write(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw IoError("malformed number '" + std::string(text) + "' in records");
  }
  return v;
}

int parse_int(std::string_view text) {
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw IoError("malformed integer '" + std::string(text) + "' in records");
  }
  return v;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_records_csv(std::ostream& out, const ExperimentResult& result) {
  out << "run_id,k,curve,value\n";
  for (const auto& r : result.records) {
    if (r.failure) continue;
    for (Eigen::Index c = 0; c < r.values.rows(); ++c) {
      for (Eigen::Index k = 0; k < r.values.cols(); ++k) {
        out << r.run_id << ',' << (k + 1) << ',' << result.curves[static_cast<std::size_t>(c)]
            << ',' << format_double(r.values(c, k)) << '\n';
      }
    }
  }
}

void write_summary_csv(std::ostream& out, const ExperimentSummary& summary) {
  out << "curve,time_averaged,runs_used,runs_excluded\n";
  for (const auto& c : summary.curves) {
    out << c.name << ',' << format_double(c.time_averaged) << ',' << summary.runs_used << ','
        << summary.runs_excluded << '\n';
  }
}

void write_failures_csv(std::ostream& out, const ExperimentSummary& summary) {
  out << "run_id,step,message\n";
  for (const auto& f : summary.failures) {
    std::string msg = f.message;
    for (char& ch : msg) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out << f.run_id << ',' << f.step << ',' << msg << '\n';
  }
}

void write_plot_data(const std::string& plot_dir, const ExperimentSummary& summary) {
  std::error_code ec;
  std::filesystem::create_directories(plot_dir, ec);
  if (ec) throw IoError("cannot create plot directory '" + plot_dir + "': " + ec.message());
  for (const auto& c : summary.curves) {
    const std::string path = (std::filesystem::path(plot_dir) / (c.name + ".dat")).string();
    std::ofstream out = open_for_write(path);
    for (std::size_t k = 0; k < c.cumulative.size(); ++k) {
      out << (k + 1) << ' ' << format_double(c.cumulative[k]) << '\n';
    }
    finish(out, path);
  }
}

void emit_outputs(const ExperimentResult& result, const OutputPaths& paths) {
  if (!paths.records.empty()) {
    std::ofstream out = open_for_write(paths.records);
    write_records_csv(out, result);
    finish(out, paths.records);
  }
  if (!paths.summary.empty()) {
    std::ofstream out = open_for_write(paths.summary);
    write_summary_csv(out, result.summary);
    finish(out, paths.summary);
  }
  if (!paths.failures.empty()) {
    std::ofstream out = open_for_write(paths.failures);
    write_failures_csv(out, result.summary);
    finish(out, paths.failures);
  }
  if (!paths.plot_dir.empty()) write_plot_data(paths.plot_dir, result.summary);
}

ExperimentResult read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "run_id,k,curve,value") {
    throw IoError("records file lacks the run_id,k,curve,value header");
  }
  struct Row {
    int run_id;
    int k;
    std::size_t curve;
    double value;
  };
  std::vector<std::string> curves;
  std::map<std::string, std::size_t> curve_index;
  std::vector<Row> rows;
  int horizon = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string_view view(line);
    std::string_view fields[4];
    for (int f = 0; f < 3; ++f) {
      const auto pos = view.find(',');
      if (pos == std::string_view::npos) throw IoError("malformed records line: " + line);
      fields[f] = view.substr(0, pos);
      view.remove_prefix(pos + 1);
    }
    fields[3] = view;
    const std::string name(fields[2]);
    auto [it, inserted] = curve_index.emplace(name, curves.size());
    if (inserted) curves.push_back(name);
    const int k = parse_int(fields[1]);
    if (k < 1) throw IoError("records step index must be >= 1");
    horizon = std::max(horizon, k);
    rows.push_back({parse_int(fields[0]), k, it->second, parse_double(fields[3])});
  }

  ExperimentResult result;
  result.curves = curves;
  result.horizon = horizon;
  std::map<int, std::size_t> run_index;
  for (const auto& row : rows) {
    auto [it, inserted] = run_index.emplace(row.run_id, 0);
    if (inserted) it->second = 0;
  }
  for (auto& [run, idx] : run_index) {
    idx = result.records.size();
    MonteCarloRecord rec;
    rec.run_id = run;
    rec.values = Matrix::Zero(static_cast<Eigen::Index>(curves.size()), horizon);
    result.records.push_back(std::move(rec));
  }
  for (const auto& row : rows) {
    result.records[run_index[row.run_id]].values(static_cast<Eigen::Index>(row.curve), row.k - 1) =
        row.value;
  }
  result.summary = summarize(result.curves, result.horizon, result.records);
  return result;
}

ExperimentResult read_records_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open records file '" + path + "'");
  return read_records_csv(in);
}

}  // namespace iukf
