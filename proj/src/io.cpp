#include "qsample/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <system_error>

#include "qsample/errors.hpp"

namespace qsample::io {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot move output into place at '" + path + "'");
  }
}

namespace {

std::string trim(std::string s) {
  s.erase(0, s.find_first_not_of(" \t"));
  const auto last = s.find_last_not_of(" \t");
  s.erase(last == std::string::npos ? 0 : last + 1);
  return s;
}

std::string describe_widths(const std::vector<std::size_t>& widths) {
  std::string out;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i) out += i + 1 == widths.size() ? " or " : ", ";
    out += std::to_string(widths[i]);
  }
  return out;
}

}  // namespace

NumericCsv read_numeric_csv(const std::string& path, const std::vector<std::size_t>& widths) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  NumericCsv csv;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;

    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(trim(f));
    if (line.back() == ',') fields.emplace_back();

    std::vector<double> vals;
    std::size_t bad_col = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto& s = fields[c];
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        bad_col = c + 1;
        break;
      }
      vals.push_back(v);
    }
    if (bad_col) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw InputError(path + ": row " + std::to_string(lineno) + ", column " + std::to_string(bad_col) +
                       ": not a finite number");
    }
    first = false;
    if (csv.width == 0) {
      if (std::find(widths.begin(), widths.end(), vals.size()) == widths.end()) {
        throw InputError(path + ": row " + std::to_string(lineno) + ", column " + std::to_string(vals.size()) +
                         ": expected " + describe_widths(widths) + " columns, found " + std::to_string(vals.size()));
      }
      csv.width = vals.size();
    } else if (vals.size() != csv.width) {
      throw InputError(path + ": row " + std::to_string(lineno) + ", column " +
                       std::to_string(std::min(vals.size(), csv.width) + 1) + ": expected " +
                       std::to_string(csv.width) + " columns, found " + std::to_string(vals.size()));
    }
    csv.rows.push_back(std::move(vals));
    csv.line_numbers.push_back(lineno);
  }
  if (csv.rows.empty()) throw InputError(path + ": no data rows");
  return csv;
}

SampledSignal read_samples_csv(const std::string& path) {
  const auto csv = read_numeric_csv(path, {5, 6});
  SampledSignal s;
  s.dim = csv.width == 5 ? 1 : 2;
  const std::size_t off = static_cast<std::size_t>(s.dim);
  for (const auto& r : csv.rows) {
    s.points.push_back({r[0], s.dim == 2 ? r[1] : 0.0});
    s.values.push_back({r[off], r[off + 1], r[off + 2], r[off + 3]});
  }
  try {
    validate(s);
  } catch (const std::invalid_argument& e) {
    throw InputError(path + ": " + e.what());
  }
  return s;
}

std::vector<Point> read_points_csv(const std::string& path, int dim) {
  const auto csv = read_numeric_csv(path, {static_cast<std::size_t>(dim)});
  std::vector<Point> pts;
  for (const auto& r : csv.rows) pts.push_back({r[0], dim == 2 ? r[1] : 0.0});
  return pts;
}

std::string points_values_csv(int dim, const std::vector<Point>& points, const std::vector<Quaternion>& values) {
  std::string out = dim == 1 ? "x1,w,x,y,z\n" : "x1,x2,w,x,y,z\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    out += fmt(points[i][0]);
    if (dim == 2) out += "," + fmt(points[i][1]);
    const auto& q = values[i];
    out += "," + fmt(q.w) + "," + fmt(q.x) + "," + fmt(q.y) + "," + fmt(q.z) + "\n";
  }
  return out;
}

std::string eigenfunctions_csv(const PsqwsBasis& basis) {
  const int dim = basis.grid.dim;
  std::string out = dim == 1 ? "node_index,x1,n,w,x,y,z\n" : "node_index,x1,x2,n,w,x,y,z\n";
  for (std::size_t n = 0; n < basis.count(); ++n) {
    for (std::size_t k = 0; k < basis.grid.size(); ++k) {
      const auto& p = basis.grid.nodes[k];
      const auto q = basis.phi_at_node(n, k);
      out += std::to_string(k) + "," + fmt(p[0]);
      if (dim == 2) out += "," + fmt(p[1]);
      out += "," + std::to_string(n) + "," + fmt(q.w) + "," + fmt(q.x) + "," + fmt(q.y) + "," + fmt(q.z) + "\n";
    }
  }
  return out;
}

std::string spectrum_json(const PsqwsBasis& basis, double kernel_trace) {
  nlohmann::ordered_json j;
  j["kernel"] = kernel_name(basis.spec);
  if (const auto s = kernel_sigma(basis.spec)) j["sigma"] = *s;
  j["tau"] = kernel_tau(basis.spec);
  j["dim"] = basis.grid.dim;
  j["nodes_per_axis"] = basis.grid.n_per_axis;
  j["retention_floor"] = basis.retention_floor;
  j["count"] = basis.count();
  const double all = std::accumulate(basis.all_mu.begin(), basis.all_mu.end(), 0.0);
  j["trace"] = {{"kernel_diagonal", kernel_trace}, {"sum_all_mu", all}};
  auto modes = nlohmann::ordered_json::array();
  for (std::size_t n = 0; n < basis.count(); ++n) {
    nlohmann::ordered_json m;
    m["n"] = n;
    m["mu"] = basis.mu[n];
    const auto& l = basis.lambda[n];
    m["lambda"] = {l.w, l.x, l.y, l.z};
    if (n < basis.residuals.size()) m["residual"] = basis.residuals[n];
    if (n < basis.tensor_index.size()) m["tensor_index"] = {basis.tensor_index[n].first, basis.tensor_index[n].second};
    modes.push_back(std::move(m));
  }
  j["modes"] = std::move(modes);
  j["all_mu"] = basis.all_mu;
  return j.dump(2) + "\n";
}

}  // namespace qsample::io
