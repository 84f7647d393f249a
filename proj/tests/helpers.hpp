#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "ftsx/core.hpp"

namespace ftsx::testing {

inline Vector on_grid(const Grid& g, auto&& f) {
  Vector v(g.size());
  for (int i = 0; i < g.size(); ++i) v[i] = f(g[i]);
  return v;
}

inline Matrix random_matrix(int rows, int cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> z(0.0, sd);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = z(rng);
  return m;
}

inline Vector random_vector(int n, std::mt19937_64& rng, double sd = 1.0) {
  return random_matrix(n, 1, rng, sd).col(0);
}

/// FAR-style series: AR(1) scores on two sine harmonics plus white noise.
inline FunctionalSeries far_series(int T, int n, double theta, std::mt19937_64& rng, double noise = 0.1,
                                   double theta2 = 0.3) {
  const Grid g = Grid::uniform(n);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix x(T, n);
  double b1 = 0.0, b2 = 0.0;
  for (int t = -50; t < T; ++t) {
    b1 = theta * b1 + z(rng);
    b2 = theta2 * b2 + 0.5 * z(rng);
    if (t < 0) continue;
    for (int i = 0; i < n; ++i)
      x(t, i) = b1 * std::sqrt(2.0) * std::sin(std::numbers::pi * g[i]) +
                b2 * std::sqrt(2.0) * std::sin(2 * std::numbers::pi * g[i]) + noise * z(rng);
  }
  return FunctionalSeries(g, x);
}

inline double correlation(const Vector& a, const Vector& b) {
  const Vector ac = a.array() - a.mean();
  const Vector bc = b.array() - b.mean();
  return ac.dot(bc) / std::sqrt(ac.squaredNorm() * bc.squaredNorm());
}

}  // namespace ftsx::testing
