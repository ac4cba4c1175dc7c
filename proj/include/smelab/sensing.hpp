#pragma once

// Gaussian-kernel sensing inverse problem on [0,1]^2, truncated to the first
// K x K sine modes. With u = phi - target, the measurement residual at node
// x_m is r_m = sum_k d_k u_k e_k(x_m), d_k = exp(-eps^2 lambda_k / 2), and the
// sampled gradient is r_m p_m with node profile p_m = (d_k e_k(x_m))_k.
// Expectations over x are means over the uniform grid law.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>

#include "smelab/coeffspace.hpp"
#include "smelab/ingestion.hpp"
#include "smelab/problem.hpp"

namespace smelab {

/// x1(1-x1) x2(1-x2) sum_n a_n exp(-beta_n |x - c_n|^2).
struct TargetSpec {
  std::array<double, 3> amplitudes{1.0, 0.8, 0.65};
  std::array<double, 3> widths{35.0, 30.0, 28.0};
  std::array<Point2, 3> centers{Point2{0.2, 0.8}, Point2{0.6, 0.4}, Point2{0.3, 0.2}};

  double operator()(const Point2& x) const {
    double bumps = 0.0;
    for (std::size_t n = 0; n < amplitudes.size(); ++n) {
      const double dx = x.x1 - centers[n].x1;
      const double dy = x.x2 - centers[n].x2;
      bumps += amplitudes[n] * std::exp(-widths[n] * (dx * dx + dy * dy));
    }
    return x.x1 * (1.0 - x.x1) * x.x2 * (1.0 - x.x2) * bumps;
  }
};

inline Field<double> sample_target(const TargetSpec& spec, const GridSpec& grid) {
  Field<double> f(grid.n(), grid.n());
  for (int i = 0; i < grid.n(); ++i)
    for (int j = 0; j < grid.n(); ++j) f(i, j) = spec({grid.coord(i), grid.coord(j)});
  return f;
}

/// Samples the analytic target on `grid` and projects it onto the modes.
inline VectorXd build_target(const TargetSpec& spec, const ModeSet& modes, const GridSpec& grid) {
  return project_sine(sample_target(spec, grid), modes.modes_per_axis()).coeffs;
}

template <typename Scalar = double>
class SensingProblem final : public StochasticObjective<Scalar> {
 public:
  using Vec = CoeffVec<Scalar>;
  using Mat = Matrix<Scalar>;

  SensingProblem(int modes_per_axis, int grid_points_per_axis, Scalar epsilon, const Vec& target)
      : modes_(modes_per_axis), grid_(grid_points_per_axis), epsilon_(epsilon), target_(target) {
    if (!(epsilon > Scalar(0))) throw ConfigError("sensing problem: epsilon must be positive");
    require_same_dim(target.size(), modes_.size(), "sensing problem target");
    require_finite(target, "sensing problem target");

    decay_.resize(modes_.size());
    for (Eigen::Index k = 0; k < modes_.size(); ++k) {
      decay_(k) = std::exp(-epsilon * epsilon * laplacian_eigenvalue<Scalar>(modes_.mode(k)) / Scalar(2));
    }
    basis_ = basis_table<Scalar>(modes_, grid_);
    profiles_ = basis_ * decay_.asDiagonal();
  }

  Eigen::Index dim() const override { return modes_.size(); }
  const ModeSet& modes() const { return modes_; }
  const GridSpec& grid() const { return grid_; }
  Scalar epsilon() const { return epsilon_; }
  const Vec& target() const { return target_; }
  const Vec& decay() const { return decay_; }
  /// E[m, k] = e_k(x_m).
  const Mat& basis() const { return basis_; }
  /// Row m is the node profile p_m.
  const Mat& profiles() const { return profiles_; }
  Eigen::Index nodes() const { return grid_.size(); }

  Scalar residual(const Vec& phi, Eigen::Index m) const {
    require_same_dim(phi.size(), dim(), "sensing residual");
    return profiles_.row(m).dot(phi - target_);
  }

  /// Residuals at every node.
  Vec residuals(const Vec& phi) const {
    require_same_dim(phi.size(), dim(), "sensing residuals");
    return profiles_ * (phi - target_);
  }

  SampleId draw_sample(RngStream& rng) const override { return rng.uniform_index(std::uint64_t(nodes())); }

  Vec stochastic_gradient(const Vec& phi, SampleId s) const override {
    const auto m = Eigen::Index(s);
    if (m < 0 || m >= nodes()) throw std::out_of_range("sensing stochastic_gradient: node index");
    return residual(phi, m) * profiles_.row(m).transpose();
  }

  Vec full_gradient(const Vec& phi) const override {
    return profiles_.transpose() * residuals(phi) / Scalar(nodes());
  }

  /// (1/M) sum_m (gbar - g_m)(gbar - g_m)^T assembled as a Gram matrix.
  Mat noise_covariance(const Vec& phi) const override {
    const Vec r = residuals(phi);
    const Vec gbar = profiles_.transpose() * r / Scalar(nodes());
    Mat centred = (r.asDiagonal() * profiles_).eval();
    centred.rowwise() -= gbar.transpose();
    Mat q = Mat::Zero(dim(), dim());
    q.template selfadjointView<Eigen::Lower>().rankUpdate(centred.transpose(), Scalar(1) / Scalar(nodes()));
    return q.template selfadjointView<Eigen::Lower>();
  }

  bool is_homogeneous() const override { return false; }

  /// (1/2M) sum_m r_m^2.
  Scalar objective(const Vec& phi) const override {
    return residuals(phi).squaredNorm() / (Scalar(2) * Scalar(nodes()));
  }

  std::uint64_t law_size() const override { return std::uint64_t(nodes()); }
  Scalar law_probability(SampleId) const override { return Scalar(1) / Scalar(nodes()); }

 private:
  ModeSet modes_;
  GridSpec grid_;
  Scalar epsilon_;
  Vec target_;
  Vec decay_;
  Mat basis_;
  Mat profiles_;
};

/// Grid resolution used to project the analytic target: the problem's own grid
/// unless it is too coarse to resolve K modes.
inline int target_projection_points(int modes_per_axis, int grid_points_per_axis) {
  return std::max(grid_points_per_axis, 2 * modes_per_axis);
}

inline SensingProblem<double> make_analytic_sensing_problem(int modes_per_axis, int grid_points_per_axis,
                                                            double epsilon, const TargetSpec& spec = {}) {
  const ModeSet modes(modes_per_axis);
  const GridSpec proj(target_projection_points(modes_per_axis, grid_points_per_axis));
  return SensingProblem<double>(modes_per_axis, grid_points_per_axis, epsilon, build_target(spec, modes, proj));
}

}  // namespace smelab
