#include "smelab/csv.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace smelab {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_weak_error_csv(std::ostream& out, std::span<const WeakErrorRow> rows, const std::vector<bool>& excluded) {
  out << "# smelab weak_error v1\n";
  out << "eta,err,mcse,n,excluded\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const bool ex = i < excluded.size() && excluded[i];
    out << format_real(r.eta) << ',' << format_real(r.err) << ',' << format_real(r.mcse_combined) << ',' << r.n << ','
        << (ex ? 1 : 0) << '\n';
  }
}

void write_mc_csv(std::ostream& out, std::span<const McRow> rows) {
  out << "# smelab mc_convergence v1\n";
  out << "n,err,mcse,repeats\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_real(r.err) << ',' << format_real(r.mcse) << ',' << r.repeats << '\n';
  }
}

void write_field_csv(std::ostream& out, const Field<double>& field, const GridSpec& grid) {
  require_same_dim(field.rows(), grid.n(), "write_field_csv");
  out << "# smelab field v1\n";
  out << "x1,x2,value\n";
  for (int i = 0; i < grid.n(); ++i)
    for (int j = 0; j < grid.n(); ++j)
      out << format_real(grid.coord(i)) << ',' << format_real(grid.coord(j)) << ',' << format_real(field(i, j)) << '\n';
}

void write_coeff_csv(std::ostream& out, const VectorXd& coeffs, const ModeSet& modes) {
  require_same_dim(coeffs.size(), modes.size(), "write_coeff_csv");
  out << "# smelab coefficients v1\n";
  out << "k1,k2,coeff\n";
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
    const auto mode = modes.mode(k);
    out << mode.k1 << ',' << mode.k2 << ',' << format_real(coeffs(k)) << '\n';
  }
}

std::string slope_json(const SlopeFit& fit, const std::string& extra_json) {
  nlohmann::ordered_json j;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["points_used"] = fit.points_used;
  j["points_excluded"] = fit.points_excluded_saturated;
  const auto extra = nlohmann::ordered_json::parse(extra_json);
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j.dump(2) + "\n";
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# smelab ", 0) != 0) throw IoError("csv: missing schema comment line");
  t.schema = line.substr(2);
  if (!std::getline(in, line)) throw IoError("csv: missing header row");
  t.columns = split(line, ',');
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != t.columns.size()) throw IoError("csv: wrong column count on line " + std::to_string(lineno));
    std::vector<double> row;
    for (const auto& c : cells) {
      double v;
      if (!parse_double(c, v)) throw IoError("csv: non-numeric cell '" + c + "' on line " + std::to_string(lineno));
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

VectorXd read_coefficients(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    for (char& c : line)
      if (c == ';' || c == '\t' || c == ' ') c = ',';
    auto cells = split(line, ',');
    std::erase_if(cells, [](const std::string& s) { return s.empty(); });
    if (cells.empty()) continue;
    double v;
    if (!parse_double(cells.back(), v)) {
      if (values.empty()) continue;  // header row
      throw IoError("coefficients: non-numeric value on line " + std::to_string(lineno));
    }
    values.push_back(v);
  }
  VectorXd out(Eigen::Index(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out(Eigen::Index(i)) = values[i];
  return out;
}

}  // namespace smelab
