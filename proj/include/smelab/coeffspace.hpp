#pragma once

// Truncated Hilbert-space coefficient vectors, the 2-D Dirichlet sine basis
// on the unit square, and the test functionals used for weak errors.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>

#include "smelab/errors.hpp"

namespace smelab {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Element of H_D as coefficients over an ordered basis.
template <typename Scalar>
using CoeffVec = Vector<Scalar>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& v, const char* where) {
  if (!v.allFinite()) {
    throw NumericalError(std::string(where) + ": non-finite coefficient");
  }
}

template <typename Scalar>
CoeffVec<Scalar> make_coeff_vec(const Vector<Scalar>& values) {
  require_finite(values, "make_coeff_vec");
  return values;
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar inner(const Eigen::MatrixBase<DerivedA>& u,
                                const Eigen::MatrixBase<DerivedB>& v) {
  require_same_dim(u.size(), v.size(), "inner");
  return u.dot(v);
}

/// g(u) = ||u||^4.
template <typename Derived>
typename Derived::Scalar g_norm4(const Eigen::MatrixBase<Derived>& u) {
  const auto s = u.squaredNorm();
  return s * s;
}

/// Mode (k1, k2) of the sine basis, both >= 1.
struct BasisIndex2D {
  int k1 = 1;
  int k2 = 1;

  BasisIndex2D() = default;
  BasisIndex2D(int a, int b) : k1(a), k2(b) {
    if (a < 1 || b < 1) {
      throw std::invalid_argument("BasisIndex2D: mode numbers must be >= 1");
    }
  }
  friend bool operator==(const BasisIndex2D&, const BasisIndex2D&) = default;
};

/// The first K x K modes, flattened row-major with k1 outer.
class ModeSet {
 public:
  explicit ModeSet(int modes_per_axis) : k_(modes_per_axis) {
    if (k_ < 1) throw std::invalid_argument("ModeSet: modes_per_axis must be >= 1");
  }

  int modes_per_axis() const { return k_; }
  Eigen::Index size() const { return Eigen::Index(k_) * k_; }

  Eigen::Index flat(const BasisIndex2D& k) const {
    if (k.k1 > k_ || k.k2 > k_) throw std::out_of_range("ModeSet: mode outside K x K");
    return Eigen::Index(k.k1 - 1) * k_ + (k.k2 - 1);
  }
  BasisIndex2D mode(Eigen::Index flat_index) const {
    if (flat_index < 0 || flat_index >= size()) throw std::out_of_range("ModeSet: flat index");
    return {int(flat_index / k_) + 1, int(flat_index % k_) + 1};
  }

 private:
  int k_;
};

struct Point2 {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// n x n cell-centred nodes ((m1 - 1/2)/n, (m2 - 1/2)/n). Flat node index is
/// m1 * n + m2 (zero-based, m1 outer).
class GridSpec {
 public:
  explicit GridSpec(int points_per_axis) : n_(points_per_axis) {
    if (n_ < 1) throw std::invalid_argument("GridSpec: points_per_axis must be >= 1");
  }

  int n() const { return n_; }
  Eigen::Index size() const { return Eigen::Index(n_) * n_; }
  double coord(int i) const { return (i + 0.5) / n_; }
  Point2 node(Eigen::Index m) const {
    return {coord(int(m / n_)), coord(int(m % n_))};
  }

 private:
  int n_;
};

template <typename Scalar = double>
Scalar eval_sine(const BasisIndex2D& k, const Point2& x) {
  using std::sin;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  return Scalar(2) * sin(k.k1 * pi * Scalar(x.x1)) * sin(k.k2 * pi * Scalar(x.x2));
}

/// Dirichlet Laplacian eigenvalue pi^2 (k1^2 + k2^2).
template <typename Scalar = double>
Scalar laplacian_eigenvalue(const BasisIndex2D& k) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  return pi * pi * Scalar(k.k1 * k.k1 + k.k2 * k.k2);
}

/// M x D table E[m, k] = e_k(x_m).
template <typename Scalar = double>
Matrix<Scalar> basis_table(const ModeSet& modes, const GridSpec& grid) {
  Matrix<Scalar> e(grid.size(), modes.size());
  for (Eigen::Index m = 0; m < grid.size(); ++m) {
    const Point2 x = grid.node(m);
    for (Eigen::Index k = 0; k < modes.size(); ++k) {
      e(m, k) = eval_sine<Scalar>(modes.mode(k), x);
    }
  }
  return e;
}

/// Field values on a grid; entry (m1, m2) sits at node (coord(m1), coord(m2)).
template <typename Scalar>
using Field = Matrix<Scalar>;

template <typename Scalar>
Field<Scalar> field_from_flat(const Vector<Scalar>& flat, const GridSpec& grid) {
  require_same_dim(flat.size(), grid.size(), "field_from_flat");
  Field<Scalar> f(grid.n(), grid.n());
  for (Eigen::Index m = 0; m < grid.size(); ++m) f(m / grid.n(), m % grid.n()) = flat(m);
  return f;
}

template <typename Scalar>
Vector<Scalar> flat_from_field(const Field<Scalar>& f) {
  const Eigen::Index n = f.rows();
  if (f.cols() != n) throw DimensionError("flat_from_field: field must be square");
  Vector<Scalar> flat(n * n);
  for (Eigen::Index m = 0; m < n * n; ++m) flat(m) = f(m / n, m % n);
  return flat;
}

template <typename Scalar>
Field<Scalar> synthesize(const CoeffVec<Scalar>& u, const ModeSet& modes, const GridSpec& grid) {
  require_same_dim(u.size(), modes.size(), "synthesize");
  return field_from_flat<Scalar>(basis_table<Scalar>(modes, grid) * u, grid);
}

}  // namespace smelab
