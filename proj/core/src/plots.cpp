#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mcflab/scenario.hpp"

namespace mcf {

namespace fs = std::filesystem;

namespace {

struct Table {
  std::map<std::string, std::size_t> column;
  std::vector<std::vector<std::string>> rows;

  std::string get(std::size_t row, const std::string& name, const std::string& fallback) const {
    return column.count(name) ? at(row, name) : fallback;
  }
  const std::string& at(std::size_t row, const std::string& name) const {
    const auto c = column.find(name);
    if (c == column.end()) throw MissingArtifact("column '" + name + "' missing");
    return rows[row].at(c->second);
  }
  double num(std::size_t row, const std::string& name) const {
    const std::string& s = at(row, name);
    try {
      return std::stod(s);
    } catch (const std::logic_error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(cell);
  return out;
}

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact("cannot read " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw MissingArtifact(path.string() + " is empty");
  const auto head = split(line);
  for (std::size_t i = 0; i < head.size(); ++i) t.column[head[i]] = i;
  while (std::getline(in, line))
    if (!line.empty()) t.rows.push_back(split(line));
  return t;
}

class LongTable {
 public:
  explicit LongTable(const fs::path& path) : out_(path) {
    if (!out_) throw Error("cannot write " + path.string());
    out_.precision(17);
    out_ << "series,x,y\n";
  }
  void add(const std::string& series, double x, double y) { out_ << series << ',' << x << ',' << y << '\n'; }

 private:
  std::ofstream out_;
};

}  // namespace

std::vector<std::string> emit_plots(const std::string& report_dir) {
  const fs::path dir(report_dir);
  if (!fs::exists(dir / "report.json")) throw MissingArtifact("no report.json in " + report_dir);
  std::vector<std::string> written;
  const auto out = [&](const std::string& name) {
    written.push_back((dir / name).string());
    return LongTable(dir / name);
  };

  if (fs::exists(dir / "ratio.csv")) {
    const Table t = read_csv(dir / "ratio.csv");
    auto p = out("plot_ratio.csv");
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      p.add("ratio", 0.5 * (t.num(i, "lo") + t.num(i, "hi")), t.num(i, "mean"));
  }
  if (fs::exists(dir / "frequency.csv")) {
    const Table t = read_csv(dir / "frequency.csv");
    auto p = out("plot_frequency.csv");
    for (std::size_t i = 0; i < t.rows.size(); ++i) p.add(t.at(i, "series"), t.num(i, "r"), t.num(i, "U"));
  }
  if (fs::exists(dir / "dichotomy.csv")) {
    const Table t = read_csv(dir / "dichotomy.csv");
    auto p = out("plot_dichotomy.csv");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const std::string series = t.get(i, "series", "dichotomy");
      p.add(series, t.num(i, "r"), t.num(i, "U"));
      p.add(series + "_bound", t.num(i, "r"), t.num(i, "bound"));
    }
  }
  if (fs::exists(dir / "trace.csv")) {
    const Table t = read_csv(dir / "trace.csv");
    auto p = out("plot_delta.csv");
    double partial = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const double j = t.num(i, "j"), d = t.num(i, "delta");
      if (!std::isfinite(d)) continue;
      partial += std::pow(d, 0.9);
      p.add("delta", j, d);
      p.add("delta_pow_0.9_partial_sum", j, partial);
    }
  }
  if (fs::exists(dir / "limits.csv")) {
    const Table t = read_csv(dir / "limits.csv");
    auto p = out("plot_oscillation.csv");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const std::string line = "line" + t.at(i, "line");
      p.add(line + "_secant", t.num(i, "tail_s"), t.num(i, "secant_osc"));
      p.add(line + "_tangent", t.num(i, "tail_s"), t.num(i, "tangent_osc"));
    }
  }
  std::vector<fs::path> lines;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("flowline_", 0) == 0 && e.path().extension() == ".csv") lines.push_back(e.path());
  }
  std::sort(lines.begin(), lines.end());
  if (!lines.empty()) {
    auto p = out("plot_axis.csv");
    for (const auto& path : lines) {
      const Table t = read_csv(path);
      const std::string series = path.stem().string();
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double a = t.num(i, "axis_projection");
        if (std::isfinite(a)) p.add(series, t.num(i, "s"), a);
      }
    }
  }
  if (written.empty()) throw MissingArtifact("no plottable artifacts in " + report_dir);
  return written;
}

}  // namespace mcf
