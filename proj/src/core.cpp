#include "ftsx/core.hpp"

#include <cmath>
#include <string>

namespace ftsx {

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw InputError("grid needs at least two points");
  for (size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw InputError("grid point " + std::to_string(i) + " is not finite");
    if (i > 0 && !(points_[i] > points_[i - 1]))
      throw InputError("grid not strictly increasing at index " + std::to_string(i));
  }
  if (points_.front() < 0.0 || points_.back() > 1.0) throw InputError("grid must lie in [0,1]");
}

Grid Grid::uniform(int n) {
  if (n < 2) throw InputError("grid needs at least two points");
  std::vector<double> pts(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) pts[static_cast<size_t>(i)] = static_cast<double>(i) / (n - 1);
  pts.back() = 1.0;
  return Grid(std::move(pts));
}

FunctionalSeries::FunctionalSeries(Grid grid, Matrix values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.rows() < 1) throw InputError("functional series needs at least one curve");
  if (values_.cols() != grid_.size())
    throw InputError("series has " + std::to_string(values_.cols()) + " columns but grid has " +
                     std::to_string(grid_.size()) + " points");
  if (!values_.allFinite()) throw InputError("functional series contains non-finite values");
}

FunctionalSeries FunctionalSeries::slice(int begin, int count) const {
  if (begin < 0 || count < 1 || begin + count > length()) throw PreconditionError("slice out of range");
  return FunctionalSeries(grid_, values_.middleRows(begin, count));
}

CovSurface::CovSurface(Grid grid, Matrix values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.rows() != grid_.size() || values_.cols() != grid_.size())
    throw InputError("surface shape does not match grid");
  if (!values_.allFinite()) throw NumericError("surface contains non-finite values");
}

bool CovSurface::is_symmetric(double rel_tol) const {
  const double scale = values_.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return (values_ - values_.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Vector quad_weights(const Grid& grid) {
  const int n = grid.size();
  Vector w = Vector::Zero(n);
  for (int i = 0; i + 1 < n; ++i) {
    const double half = 0.5 * (grid[i + 1] - grid[i]);
    w[i] += half;
    w[i + 1] += half;
  }
  return w;
}

double inner(std::span<const double> f, std::span<const double> g, const Grid& grid) {
  const auto n = static_cast<size_t>(grid.size());
  if (f.size() != n || g.size() != n) throw InputError("inner product length mismatch");
  const Vector w = quad_weights(grid);
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += f[i] * g[i] * w[static_cast<Eigen::Index>(i)];
  return acc;
}

double inner(const Vector& f, const Vector& g, const Grid& grid) {
  return inner(std::span<const double>(f.data(), static_cast<size_t>(f.size())),
               std::span<const double>(g.data(), static_cast<size_t>(g.size())), grid);
}

double l2_norm(const Vector& f, const Grid& grid) { return std::sqrt(std::max(inner(f, f, grid), 0.0)); }

std::vector<Vector> gram_schmidt(const std::vector<Vector>& basis, const Grid& grid) {
  std::vector<Vector> out;
  out.reserve(basis.size());
  for (size_t k = 0; k < basis.size(); ++k) {
    const double input_norm = l2_norm(basis[k], grid);
    if (input_norm == 0.0) throw NumericError("gram_schmidt: zero input curve " + std::to_string(k));
    Vector v = basis[k];
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : out) v -= inner(v, q, grid) * q;
    const double norm = l2_norm(v, grid);
    if (norm < 1e-12 * input_norm) throw NumericError("gram_schmidt: rank deficient at input " + std::to_string(k));
    out.push_back(v / norm);
  }
  return out;
}

Centered center(const FunctionalSeries& series) {
  Vector mean = series.values().colwise().mean().transpose();
  Matrix centered = series.values().rowwise() - mean.transpose();
  return {std::move(mean), FunctionalSeries(series.grid(), std::move(centered))};
}

double surface_norm2(const Matrix& surface, const Grid& grid) {
  const Vector w = quad_weights(grid);
  return w.dot(surface.cwiseAbs2() * w);
}

double surface_trace(const Matrix& surface, const Grid& grid) {
  const Vector w = quad_weights(grid);
  return w.dot(surface.diagonal());
}

}  // namespace ftsx
