#pragma once

#include <vector>

#include "ftsx/core.hpp"

namespace ftsx {

/// Cubic B-spline design matrix (n x (knots + 2)) on `knots` equally spaced
/// knots spanning the grid.
Matrix bspline_basis(const Grid& grid, int knots);

/// Basis knots used by the smoother: min(n/2, 100).
int smoother_knots(int n);

/// Hat matrix of the P-spline fit with a second-difference coefficient penalty.
Matrix smoother_matrix(const Grid& grid, double lambda);

struct SmoothResult {
  FunctionalSeries smoothed;
  double lambda = 0.0;                  // shared across curves
  std::vector<double> curve_lambda;     // per-curve GCV optimum
  std::vector<double> mean_gcv;         // per grid value, averaged over curves
};

/// GCV(lambda) = n RSS / (n - tr H)^2 per curve; the shared lambda is the
/// median of the per-curve optima.
SmoothResult smooth_curves(const FunctionalSeries& series, const std::vector<double>& lambda_grid);

FunctionalSeries smooth_fixed(const FunctionalSeries& series, double lambda);

}  // namespace ftsx
