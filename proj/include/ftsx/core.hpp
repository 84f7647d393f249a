#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ftsx {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error taxonomy. The CLI maps these onto exit codes 2, 3 and 4.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Sampling abscissae in [0,1], strictly increasing, at least two points.
class Grid {
 public:
  explicit Grid(std::vector<double> points);

  /// n equally spaced points i/(n-1), i = 0..n-1.
  static Grid uniform(int n);

  int size() const { return static_cast<int>(points_.size()); }
  double operator[](int i) const { return points_[static_cast<size_t>(i)]; }
  const std::vector<double>& points() const { return points_; }
  double first() const { return points_.front(); }
  double last() const { return points_.back(); }

  bool operator==(const Grid&) const = default;

 private:
  std::vector<double> points_;
};

/// T curves on a shared grid; row t holds curve t.
class FunctionalSeries {
 public:
  FunctionalSeries(Grid grid, Matrix values);

  const Grid& grid() const { return grid_; }
  const Matrix& values() const { return values_; }
  int length() const { return static_cast<int>(values_.rows()); }
  int points() const { return grid_.size(); }
  Vector curve(int t) const { return values_.row(t).transpose(); }

  /// Rows [begin, begin + count).
  FunctionalSeries slice(int begin, int count) const;

 private:
  Grid grid_;
  Matrix values_;
};

/// Square surface on the grid. Lagged autocovariances are not symmetric, so
/// symmetry is checked by the consumers that need it.
class CovSurface {
 public:
  CovSurface(Grid grid, Matrix values);

  const Grid& grid() const { return grid_; }
  const Matrix& values() const { return values_; }
  bool is_symmetric(double rel_tol = 1e-10) const;

 private:
  Grid grid_;
  Matrix values_;
};

/// Trapezoid weights; they sum to last - first.
Vector quad_weights(const Grid& grid);

/// Trapezoid-rule L2 inner product.
double inner(std::span<const double> f, std::span<const double> g, const Grid& grid);
double inner(const Vector& f, const Vector& g, const Grid& grid);

double l2_norm(const Vector& f, const Grid& grid);

/// Modified Gram-Schmidt with one re-orthogonalization pass. Throws
/// NumericError when a residual drops below 1e-12 of its input norm.
std::vector<Vector> gram_schmidt(const std::vector<Vector>& basis, const Grid& grid);

struct Centered {
  Vector mean;
  FunctionalSeries centered;
};

Centered center(const FunctionalSeries& series);

/// Double integral of f(u,s)^2 over the grid.
double surface_norm2(const Matrix& surface, const Grid& grid);

/// Integral of the surface diagonal.
double surface_trace(const Matrix& surface, const Grid& grid);

}  // namespace ftsx
