#include "spectral_eta/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spectral_eta/error.hpp"
#include "spectral_eta/experiment.hpp"

namespace spectral_eta {

namespace {

struct Sample {
  double x;
  long index;
  double value;
};

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p, std::size_t columns) {
  std::ifstream in(p);
  if (!in) throw Error(Errc::config_error, "cannot read " + p.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto fields = split_csv_line(line);
    if (fields.size() != columns) throw Error(Errc::config_error, "malformed row in " + p.string() + ": " + line);
    rows.push_back(std::move(fields));
  }
  return rows;
}

double to_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw Error(Errc::config_error, "not a number: '" + s + "'");
  }
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

ReportSummary write_report(const std::filesystem::path& dir) {
  for (const char* name : {"results.csv", "samples.csv", "meta.json"})
    if (!std::filesystem::is_regular_file(dir / name))
      throw Error(Errc::config_error, "missing " + (dir / name).string());

  const auto results = read_csv(dir / "results.csv", 4);
  std::map<std::string, double> value_of;
  ReportSummary summary;
  std::ostringstream table;
  std::string pipeline = "?";
  {
    std::ifstream in(dir / "meta.json");
    try {
      nlohmann::json meta;
      in >> meta;
      pipeline = meta.value("pipeline", pipeline);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::config_error, std::string("cannot parse meta.json: ") + e.what());
    }
  }
  table << "pipeline: " << pipeline << "\n";
  std::size_t width = 8;
  for (const auto& r : results) width = std::max(width, r[0].size());
  for (const auto& r : results) {
    value_of[r[0]] = to_double(r[1]);
    if (r[3] == "PASS") ++summary.passed;
    else if (r[3] == "FAIL") ++summary.failed;
    else ++summary.informational;
    table << r[3] << "  " << r[0] << std::string(width + 2 - r[0].size(), ' ') << r[1];
    if (r[3] != "INFO") table << "  (tol " << r[2] << ")";
    table << "\n";
  }
  table << summary.passed << " passed, " << summary.failed << " failed, " << summary.informational
        << " informational\n";
  summary.table = table.str();

  std::map<std::string, std::vector<Sample>> series;
  for (const auto& s : read_csv(dir / "samples.csv", 4))
    series[s[0]].push_back({to_double(s[1]), std::stol(s[2]), to_double(s[3])});

  auto emit = [&](const std::string& name, const std::string& body) {
    atomic_write(dir / name, body);
    summary.written.push_back(dir / name);
  };

  if (auto it = series.find("flow"); it != series.end()) {
    std::set<long> columns;
    std::map<double, std::map<long, double>> by_r;
    for (const auto& s : it->second) {
      columns.insert(s.index);
      by_r[s.x][s.index] = s.value;
    }
    std::ostringstream os;
    os << "# r";
    for (long c : columns) os << " lambda_" << c;
    os << "\n";
    for (const auto& [r, row] : by_r) {
      os << format_number(r);
      for (long c : columns) {
        const auto v = row.find(c);
        os << " " << (v == row.end() ? std::string("NaN") : format_number(v->second));
      }
      os << "\n";
    }
    emit("flow.dat", os.str());
    series.erase(it);
  }
  if (auto it = series.find("crossing"); it != series.end()) {
    std::ostringstream os;
    os << "# r direction\n";
    for (const auto& s : it->second) os << format_number(s.x) << " " << format_number(s.value) << "\n";
    emit("crossings.dat", os.str());
    series.erase(it);
  }
  if (auto it = series.find("decay"); it != series.end()) {
    std::ostringstream os;
    os << "# t log|trace|\n";
    if (value_of.count("decay_rate"))
      os << "# fit: log|trace| = intercept - rate*t, rate = " << format_number(value_of["decay_rate"])
         << ", intercept = " << format_number(value_of["decay_intercept"]) << "\n";
    for (const auto& s : it->second) os << format_number(s.x) << " " << format_number(s.value) << "\n";
    emit("decay.dat", os.str());
    series.erase(it);
  }
  {
    auto xb = series.find("theta_xi_bar");
    auto xi = series.find("theta_xi");
    if (xb != series.end()) {
      std::map<long, double> raw;
      if (xi != series.end())
        for (const auto& s : xi->second) raw[s.index] = s.value;
      std::ostringstream os;
      os << "# theta xi_bar xi\n";
      for (const auto& s : xb->second)
        os << format_number(s.x) << " " << format_number(s.value) << " "
           << (raw.count(s.index) ? format_number(raw[s.index]) : std::string("NaN")) << "\n";
      emit("theta.dat", os.str());
      series.erase(xb);
      if (xi != series.end()) series.erase(series.find("theta_xi"));
    }
  }
  if (auto it = series.find("ssf"); it != series.end()) {
    std::ostringstream os;
    os << "# lambda sigma\n";
    for (const auto& s : it->second) os << format_number(s.x) << " " << format_number(s.value) << "\n";
    emit("ssf.dat", os.str());
    series.erase(it);
  }
  {
    auto cn = series.find("c_n");
    if (cn != series.end()) {
      std::map<double, double> deriv;
      if (auto d = series.find("eta_derivative"); d != series.end()) {
        for (const auto& s : d->second) deriv[s.x] = s.value;
        series.erase(d);
      }
      std::ostringstream os;
      os << "# r c_n deta_dr\n";
      for (const auto& s : series.find("c_n")->second)
        os << format_number(s.x) << " " << format_number(s.value) << " "
           << (deriv.count(s.x) ? format_number(deriv[s.x]) : std::string("NaN")) << "\n";
      emit("variation.dat", os.str());
      series.erase(series.find("c_n"));
    }
  }
  for (const auto& [name, rows] : series) {
    std::ostringstream os;
    os << "# x index value\n";
    for (const auto& s : rows) os << format_number(s.x) << " " << s.index << " " << format_number(s.value) << "\n";
    emit(name + ".dat", os.str());
  }
  emit("summary.txt", summary.table);
  return summary;
}

}  // namespace spectral_eta
