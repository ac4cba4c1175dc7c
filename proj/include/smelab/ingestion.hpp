#pragma once

// Grayscale image loading (binary PGM/PPM), Lanczos-3 resampling and the
// discrete L2 projection of grid data onto the first K x K sine modes.

#include <filesystem>
#include <vector>

#include "smelab/coeffspace.hpp"

namespace smelab {

/// Row-major pixels in [0, 1], row 0 at the top.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0);

  double at(int row, int col) const { return pixels[std::size_t(row) * width + col]; }
  double& at(int row, int col) { return pixels[std::size_t(row) * width + col]; }
};

/// Binary PGM (P5) or PPM (P6), maxval up to 65535. RGB is reduced with the
/// Rec. 601 luma weights.
GrayImage load_image(const std::filesystem::path& path);

/// Binary PGM writer (8-bit when maxval <= 255, 16-bit big-endian otherwise).
void write_pgm(const std::filesystem::path& path, const GrayImage& img, int maxval = 255);

/// Lanczos kernel sinc(t) sinc(t/a) on |t| < a.
double lanczos_kernel(double t, int a = 3);

/// Separable Lanczos-3 resampling to n x n. Source pixels are sampled at cell
/// centres; when shrinking, the kernel is stretched by the scale factor. Each
/// output pixel's weights are renormalized to sum to one and the result is
/// clamped to [0, 1].
GrayImage lanczos_resample(const GrayImage& img, int n);

/// Square image to grid field: node (m1, m2) takes column m1 and row
/// n - 1 - m2, so x2 points up the image.
Field<double> image_to_field(const GrayImage& img);
GrayImage field_to_image(const Field<double>& field);

struct ProjectionResult {
  VectorXd coeffs;
  /// sqrt(mean over nodes of (data - reconstruction)^2).
  double residual_norm = 0.0;
};

/// Least-squares fit of the K x K sine modes to n x n cell-centred data:
/// solves G c = E^T v / n^2 with G = E^T E / n^2. Requires n >= 2K.
ProjectionResult project_sine(const Field<double>& values, int modes_per_axis);

}  // namespace smelab
