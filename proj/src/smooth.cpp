#include "ftsx/smooth.hpp"

#include <algorithm>
#include <cmath>

#include "ftsx/wavelet.hpp"

namespace ftsx {
namespace {

constexpr int kMinPoints = 10;

void check_grid(const Grid& grid) {
  if (grid.size() < kMinPoints)
    throw PreconditionError("smoothing needs at least " + std::to_string(kMinPoints) + " grid points");
}

void check_lambda(double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) throw InputError("smoothing parameter must be finite and >= 0");
}

struct Fit {
  Matrix hat;
  double trace;
};

Fit fit(const Grid& grid, double lambda) {
  const Matrix B = bspline_basis(grid, smoother_knots(grid.size()));
  const Eigen::Index m = B.cols();
  Matrix D = Matrix::Zero(m - 2, m);
  for (Eigen::Index i = 0; i + 2 < m; ++i) {
    D(i, i) = 1.0;
    D(i, i + 1) = -2.0;
    D(i, i + 2) = 1.0;
  }
  const Matrix BtB = B.transpose() * B;
  Matrix A = BtB + lambda * D.transpose() * D;
  // tiny ridge keeps lambda = 0 solvable on uneven grids
  A.diagonal().array() += 1e-12 * BtB.trace() / static_cast<double>(m);
  const Eigen::LDLT<Matrix> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw NumericError("P-spline system is singular");
  const Matrix coef_map = ldlt.solve(B.transpose());  // m x n
  Matrix hat = B * coef_map;
  const double tr = hat.trace();
  return {std::move(hat), tr};
}

}  // namespace

int smoother_knots(int n) { return std::min(n / 2, 100); }

Matrix bspline_basis(const Grid& grid, int knots) {
  if (knots < 2) throw PreconditionError("B-spline basis needs at least two knots");
  const int degree = 3;
  const double a = grid.first();
  const double b = grid.last();
  const int intervals = knots - 1;
  const double step = (b - a) / intervals;
  // clamped-free uniform extension: knots extend beyond [a, b] by `degree` steps
  std::vector<double> t(static_cast<size_t>(knots + 2 * degree));
  for (int i = 0; i < static_cast<int>(t.size()); ++i) t[static_cast<size_t>(i)] = a + (i - degree) * step;
  const int nb = knots + degree - 1;  // = knots + 2
  Matrix B = Matrix::Zero(grid.size(), nb);
  for (int r = 0; r < grid.size(); ++r) {
    const double x = grid[r];
    int span = static_cast<int>(std::floor((x - a) / step));
    span = std::clamp(span, 0, intervals - 1) + degree;  // t[span] <= x < t[span+1]
    // Cox-de Boor on the nonzero span
    double N[degree + 1] = {1.0, 0.0, 0.0, 0.0};
    double left[degree + 1];
    double right[degree + 1];
    for (int j = 1; j <= degree; ++j) {
      left[j] = x - t[static_cast<size_t>(span + 1 - j)];
      right[j] = t[static_cast<size_t>(span + j)] - x;
      double saved = 0.0;
      for (int k = 0; k < j; ++k) {
        const double tmp = N[k] / (right[k + 1] + left[j - k]);
        N[k] = saved + right[k + 1] * tmp;
        saved = left[j - k] * tmp;
      }
      N[j] = saved;
    }
    for (int j = 0; j <= degree; ++j) B(r, span - degree + j) = N[j];
  }
  return B;
}

Matrix smoother_matrix(const Grid& grid, double lambda) {
  check_grid(grid);
  check_lambda(lambda);
  return fit(grid, lambda).hat;
}

FunctionalSeries smooth_fixed(const FunctionalSeries& series, double lambda) {
  const Matrix H = smoother_matrix(series.grid(), lambda);
  return FunctionalSeries(series.grid(), series.values() * H.transpose());
}

SmoothResult smooth_curves(const FunctionalSeries& series, const std::vector<double>& lambda_grid) {
  check_grid(series.grid());
  if (lambda_grid.empty()) throw InputError("lambda grid is empty");
  for (double l : lambda_grid) check_lambda(l);
  const int T = series.length();
  const double n = series.points();
  std::vector<int> best(static_cast<size_t>(T), -1);
  std::vector<double> best_gcv(static_cast<size_t>(T), 0.0);
  std::vector<double> mean_gcv(lambda_grid.size(), 0.0);
  for (size_t g = 0; g < lambda_grid.size(); ++g) {
    const Fit f = fit(series.grid(), lambda_grid[g]);
    const double dof = n - f.trace;
    if (dof <= 0.0) throw NumericError("smoother has no residual degrees of freedom");
    const Matrix resid = series.values() - series.values() * f.hat.transpose();
    for (int t = 0; t < T; ++t) {
      const double gcv = n * resid.row(t).squaredNorm() / (dof * dof);
      mean_gcv[g] += gcv / T;
      if (best[static_cast<size_t>(t)] < 0 || gcv < best_gcv[static_cast<size_t>(t)]) {
        best[static_cast<size_t>(t)] = static_cast<int>(g);
        best_gcv[static_cast<size_t>(t)] = gcv;
      }
    }
  }
  std::vector<double> curve_lambda;
  curve_lambda.reserve(best.size());
  for (int g : best) curve_lambda.push_back(lambda_grid[static_cast<size_t>(g)]);
  const double lambda = median(curve_lambda);
  return {smooth_fixed(series, lambda), lambda, std::move(curve_lambda), std::move(mean_gcv)};
}

}  // namespace ftsx
