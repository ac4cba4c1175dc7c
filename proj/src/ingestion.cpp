#include "smelab/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

#include "smelab/errors.hpp"

namespace smelab {

GrayImage::GrayImage(int w, int h, double fill) : width(w), height(h) {
  if (w < 1 || h < 1) throw std::invalid_argument("GrayImage: dimensions must be positive");
  pixels.assign(std::size_t(w) * h, fill);
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in, const std::string& path) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(char(c));
  }
  if (tok.empty()) throw IoError(path + ": truncated PNM header");
  return tok;
}

int header_int(std::istream& in, const std::string& path, const char* field) {
  const std::string tok = header_token(in, path);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError(path + ": invalid " + field + " '" + tok + "' in PNM header");
  }
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(name + ": cannot open image");

  const std::string magic = header_token(in, name);
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw IoError(name + ": unsupported format (magic '" + magic + "'; expected binary PGM P5 or PPM P6)");
  }
  const int width = header_int(in, name, "width");
  const int height = header_int(in, name, "height");
  const int maxval = header_int(in, name, "maxval");
  if (maxval > 65535) throw IoError(name + ": maxval " + std::to_string(maxval) + " exceeds 65535");
  // header_token consumed the single whitespace byte after maxval.

  const int bytes_per_sample = maxval > 255 ? 2 : 1;
  const std::size_t samples = std::size_t(width) * height * channels;
  std::vector<unsigned char> raw(samples * bytes_per_sample);
  in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
  if (std::size_t(in.gcount()) != raw.size()) {
    throw IoError(name + ": truncated pixel data (expected " + std::to_string(raw.size()) + " bytes, got " +
                  std::to_string(in.gcount()) + ")");
  }

  auto sample = [&](std::size_t i) -> double {
    const unsigned v = bytes_per_sample == 1 ? raw[i] : (unsigned(raw[2 * i]) << 8) | raw[2 * i + 1];
    return std::min(1.0, double(v) / maxval);
  };

  GrayImage img(width, height);
  for (std::size_t p = 0; p < img.pixels.size(); ++p) {
    if (channels == 1) {
      img.pixels[p] = sample(p);
    } else {
      const double r = sample(3 * p), g = sample(3 * p + 1), b = sample(3 * p + 2);
      img.pixels[p] = std::clamp(0.299 * r + 0.587 * g + 0.114 * b, 0.0, 1.0);
    }
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img, int maxval) {
  if (maxval < 1 || maxval > 65535) throw std::invalid_argument("write_pgm: maxval out of range");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << "P5\n" << img.width << ' ' << img.height << '\n' << maxval << '\n';
  for (double v : img.pixels) {
    const auto q = unsigned(std::lround(std::clamp(v, 0.0, 1.0) * maxval));
    if (maxval > 255) out.put(char(q >> 8));
    out.put(char(q & 0xffu));
  }
  if (!out) throw IoError(path.string() + ": write failed");
}

double lanczos_kernel(double t, int a) {
  t = std::abs(t);
  if (t >= a) return 0.0;
  if (t < 1e-12) return 1.0;
  const double pt = std::numbers::pi * t;
  return a * std::sin(pt) * std::sin(pt / a) / (pt * pt);
}

namespace {

struct Taps {
  int first = 0;
  std::vector<double> weights;
};

// Weights mapping `src` samples onto `dst` output samples along one axis.
std::vector<Taps> axis_taps(int src, int dst) {
  constexpr int a = 3;
  const double scale = double(src) / dst;
  const double stretch = std::max(1.0, scale);
  const double support = a * stretch;
  std::vector<Taps> taps(dst);
  for (int j = 0; j < dst; ++j) {
    const double centre = (j + 0.5) * scale - 0.5;
    const int lo = std::max(0, int(std::ceil(centre - support)));
    const int hi = std::min(src - 1, int(std::floor(centre + support)));
    Taps& t = taps[j];
    t.first = lo;
    double sum = 0.0;
    for (int i = lo; i <= hi; ++i) {
      const double w = lanczos_kernel((i - centre) / stretch, a);
      t.weights.push_back(w);
      sum += w;
    }
    if (std::abs(sum) < 1e-300) throw NumericalError("lanczos_resample: degenerate kernel weights");
    for (double& w : t.weights) w /= sum;
  }
  return taps;
}

}  // namespace

GrayImage lanczos_resample(const GrayImage& img, int n) {
  if (n < 2) throw std::invalid_argument("lanczos_resample: target side must be >= 2");
  const auto col_taps = axis_taps(img.width, n);
  const auto row_taps = axis_taps(img.height, n);

  // Horizontal pass: height x n.
  std::vector<double> tmp(std::size_t(img.height) * n);
  for (int r = 0; r < img.height; ++r) {
    for (int j = 0; j < n; ++j) {
      const Taps& t = col_taps[j];
      double acc = 0.0;
      for (std::size_t i = 0; i < t.weights.size(); ++i) acc += t.weights[i] * img.at(r, t.first + int(i));
      tmp[std::size_t(r) * n + j] = acc;
    }
  }
  GrayImage out(n, n);
  for (int j = 0; j < n; ++j) {
    const Taps& t = row_taps[j];
    for (int c = 0; c < n; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < t.weights.size(); ++i) acc += t.weights[i] * tmp[std::size_t(t.first + int(i)) * n + c];
      out.at(j, c) = std::clamp(acc, 0.0, 1.0);
    }
  }
  return out;
}

Field<double> image_to_field(const GrayImage& img) {
  if (img.width != img.height) throw DimensionError("image_to_field: image must be square");
  const int n = img.width;
  Field<double> f(n, n);
  for (int m1 = 0; m1 < n; ++m1)
    for (int m2 = 0; m2 < n; ++m2) f(m1, m2) = img.at(n - 1 - m2, m1);
  return f;
}

GrayImage field_to_image(const Field<double>& field) {
  if (field.rows() != field.cols()) throw DimensionError("field_to_image: field must be square");
  const int n = int(field.rows());
  GrayImage img(n, n);
  for (int m1 = 0; m1 < n; ++m1)
    for (int m2 = 0; m2 < n; ++m2) img.at(n - 1 - m2, m1) = field(m1, m2);
  return img;
}

ProjectionResult project_sine(const Field<double>& values, int modes_per_axis) {
  if (values.rows() != values.cols()) throw DimensionError("project_sine: grid data must be square");
  const int n = int(values.rows());
  if (n < 2 * modes_per_axis) {
    throw std::invalid_argument("project_sine: grid with " + std::to_string(n) + " points per axis cannot resolve " +
                                std::to_string(modes_per_axis) + " modes (need n >= 2K)");
  }
  const ModeSet modes(modes_per_axis);
  const GridSpec grid(n);
  const MatrixXd e = basis_table<double>(modes, grid);
  const VectorXd v = flat_from_field(values);
  const double m = double(grid.size());

  const MatrixXd gram = (e.transpose() * e) / m;
  const VectorXd rhs = (e.transpose() * v) / m;
  Eigen::LLT<MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw NumericalError("project_sine: singular Gram matrix");

  ProjectionResult out;
  out.coeffs = llt.solve(rhs);
  out.residual_norm = std::sqrt((v - e * out.coeffs).squaredNorm() / m);
  return out;
}

}  // namespace smelab
