#pragma once

// CSV and JSON artifacts. Every CSV starts with a "# smelab <schema> v1"
// comment line, then the column header; reals use 17 significant digits.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "smelab/coeffspace.hpp"
#include "smelab/montecarlo.hpp"

namespace smelab {

std::string format_real(double v);

void write_weak_error_csv(std::ostream& out, std::span<const WeakErrorRow> rows, const std::vector<bool>& excluded);
void write_mc_csv(std::ostream& out, std::span<const McRow> rows);
void write_field_csv(std::ostream& out, const Field<double>& field, const GridSpec& grid);
void write_coeff_csv(std::ostream& out, const VectorXd& coeffs, const ModeSet& modes);

/// {"slope", "intercept", "points_used", "points_excluded"} plus any extra
/// members given as a JSON object string.
std::string slope_json(const SlopeFit& fit, const std::string& extra_json = "{}");

struct CsvTable {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Parses a file written by the functions above; throws IoError on any
/// deviation from the schema line / header / numeric rows layout.
CsvTable read_csv(std::istream& in);

/// Coefficients from a `k1,k2,coeff` CSV or a plain list of numbers.
VectorXd read_coefficients(std::istream& in);

}  // namespace smelab
