#include "ftsx/fpca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ftsx {

std::string_view to_string(Mode mode) { return mode == Mode::Dynamic ? "dynamic" : "static"; }

Mode parse_mode(std::string_view text) {
  if (text == "dynamic") return Mode::Dynamic;
  if (text == "static") return Mode::Static;
  throw InputError("unknown mode '" + std::string(text) + "' (expected dynamic or static)");
}

EigenSystem eigendecompose(const CovSurface& surface) {
  if (!surface.is_symmetric(1e-10)) throw PreconditionError("eigendecompose: surface is not symmetric");
  const Grid& grid = surface.grid();
  const Vector w = quad_weights(grid);
  const Vector root = w.cwiseSqrt();
  const Matrix weighted = root.asDiagonal() * surface.values() * root.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (weighted + weighted.transpose()));
  if (solver.info() != Eigen::Success) throw NumericError("eigendecompose: eigensolver failed");

  const int n = grid.size();
  EigenSystem out{grid, Vector(n), Vector(n), Matrix(n, n)};
  // Eigen returns ascending order.
  for (int k = 0; k < n; ++k) {
    const int src = n - 1 - k;
    out.raw_eigenvalues[k] = solver.eigenvalues()[src];
    out.eigenvalues[k] = std::max(solver.eigenvalues()[src], 0.0);
    Vector phi = solver.eigenvectors().col(src).cwiseQuotient(root);
    Eigen::Index arg = 0;
    phi.cwiseAbs().maxCoeff(&arg);
    if (phi[arg] < 0.0) phi = -phi;
    out.eigenfunctions.col(k) = phi;
  }
  return out;
}

int select_k_max(const Vector& eigenvalues, int T) {
  const auto available = static_cast<int>(eigenvalues.size());
  const auto positive = static_cast<int>((eigenvalues.array() > 0.0).count());
  const int t_prime = std::min(T, positive);
  const double mean = eigenvalues.head(t_prime).sum() / t_prime;
  int k_max = static_cast<int>((eigenvalues.array() >= mean).count());
  return std::clamp(k_max, 1, available - 1);
}

int select_k(const Vector& eigenvalues, int T) {
  if (eigenvalues.size() < 2) throw PreconditionError("select_k: need at least two eigenvalues");
  if (T < 2) throw PreconditionError("select_k: need T >= 2");
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    if (eigenvalues[k] < 0.0 || !std::isfinite(eigenvalues[k]))
      throw PreconditionError("select_k: eigenvalues must be finite and nonnegative");
    if (k > 0 && eigenvalues[k] > eigenvalues[k - 1]) throw PreconditionError("select_k: eigenvalues must be nonincreasing");
  }
  const double lead = eigenvalues[0];
  if (!(lead > 0.0)) throw NumericError("select_k: all eigenvalues are zero");

  const int k_max = select_k_max(eigenvalues, T);
  const double tau = 1.0 / std::log(std::max(lead, static_cast<double>(T)));
  int best = 1;
  double best_value = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    const double lk = eigenvalues[k - 1];
    const double value = (lk / lead >= tau) ? eigenvalues[k] / lk : 1.0;
    if (value < best_value) {
      best_value = value;
      best = k;
    }
  }
  return best;
}

Matrix project_scores(const FunctionalSeries& series, const GlobalFeatures& features) {
  if (series.points() != features.grid.size()) throw InputError("project_scores: grid mismatch");
  const Vector w = quad_weights(features.grid);
  const Matrix centered = series.values().rowwise() - features.mean.transpose();
  return centered * w.asDiagonal() * features.eigenfunctions;
}

GlobalFeatures extract_global(const FunctionalSeries& series, Mode mode) {
  const int T = series.length();
  if (mode == Mode::Dynamic && T < 4) throw PreconditionError("dynamic mode needs T >= 4, got " + std::to_string(T));
  if (mode == Mode::Static && T < 2) throw PreconditionError("static mode needs T >= 2, got " + std::to_string(T));

  GlobalFeatures out{series.grid(), mode, {}, {}, {}, {}, {}, std::nullopt};
  out.mean = series.values().colwise().mean().transpose();

  // Identical curves: no variation to decompose. Keep one component with zero
  // scores so downstream steps still see K >= 1.
  if ((series.values().rowwise() - out.mean.transpose()).isZero(0.0)) {
    const int n = series.points();
    const EigenSystem eig = eigendecompose(CovSurface(series.grid(), Matrix::Zero(n, n)));
    out.eigenfunctions = eig.eigenfunctions.leftCols(1);
    out.eigenvalues = Vector::Zero(1);
    out.all_eigenvalues = eig.eigenvalues;
    out.scores = Matrix::Zero(T, 1);
    return out;
  }

  std::optional<CovSurface> surface;
  if (mode == Mode::Dynamic) {
    auto [lr, report] = long_run_cov(series);
    surface.emplace(std::move(lr));
    out.bandwidth = report;
  } else {
    surface.emplace(static_cov(series));
  }
  const EigenSystem eig = eigendecompose(*surface);
  const int K = select_k(eig.eigenvalues, T);

  out.eigenfunctions = eig.eigenfunctions.leftCols(K);
  out.eigenvalues = eig.eigenvalues.head(K);
  out.all_eigenvalues = eig.eigenvalues;
  out.scores = project_scores(series, out);
  return out;
}

FunctionalSeries reconstruct(const GlobalFeatures& features) {
  Matrix values = features.scores * features.eigenfunctions.transpose();
  values.rowwise() += features.mean.transpose();
  return FunctionalSeries(features.grid, std::move(values));
}

FunctionalSeries residuals(const FunctionalSeries& series, const GlobalFeatures& features) {
  if (series.length() != features.length() || series.points() != features.grid.size())
    throw InputError("residuals: series and features have different shapes");
  return FunctionalSeries(series.grid(), series.values() - reconstruct(features).values());
}

}  // namespace ftsx
