#include "ftsx/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

namespace ftsx {
namespace {

double variance(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(x.size());
}

std::vector<double> difference(std::span<const double> x) {
  std::vector<double> out;
  if (x.size() < 2) return out;
  out.reserve(x.size() - 1);
  for (size_t i = 1; i < x.size(); ++i) out.push_back(x[i] - x[i - 1]);
  return out;
}

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

// Levinson-Durbin recursion on autocovariances gamma[0..p].
std::vector<double> yule_walker(const std::vector<double>& gamma, int p) {
  std::vector<double> phi(static_cast<size_t>(p), 0.0);
  double err = gamma[0];
  for (int k = 1; k <= p; ++k) {
    double acc = gamma[static_cast<size_t>(k)];
    for (int i = 1; i < k; ++i) acc -= phi[static_cast<size_t>(i - 1)] * gamma[static_cast<size_t>(k - i)];
    const double kappa = err > 0.0 ? acc / err : 0.0;
    std::vector<double> next = phi;
    next[static_cast<size_t>(k - 1)] = kappa;
    for (int i = 1; i < k; ++i)
      next[static_cast<size_t>(i - 1)] = phi[static_cast<size_t>(i - 1)] - kappa * phi[static_cast<size_t>(k - i - 1)];
    phi = std::move(next);
    err *= (1.0 - kappa * kappa);
  }
  return phi;
}

struct OrderFit {
  std::vector<double> phi;
  double intercept = 0.0;
  double rss = 0.0;
};

// Conditional least squares for order p on observations start..m-1; falls
// back to Yule-Walker when the least-squares polynomial is not stationary.
OrderFit fit_order(const std::vector<double>& y, int p, int start, const std::vector<double>& gamma, double mean) {
  const int m = static_cast<int>(y.size());
  const int rows = m - start;
  OrderFit fit;
  if (p > 0) {
    Matrix X(rows, p + 1);
    Vector target(rows);
    for (int r = 0; r < rows; ++r) {
      const int t = start + r;
      X(r, 0) = 1.0;
      for (int i = 1; i <= p; ++i) X(r, i) = y[static_cast<size_t>(t - i)];
      target[r] = y[static_cast<size_t>(t)];
    }
    const Vector beta = X.colPivHouseholderQr().solve(target);
    fit.intercept = beta[0];
    fit.phi.assign(beta.data() + 1, beta.data() + 1 + p);
    ArimaFit probe;
    probe.p = p;
    probe.coefficients = fit.phi;
    if (!beta.allFinite() || !probe.is_stationary()) {
      fit.phi = yule_walker(gamma, p);
      double s = 0.0;
      for (double c : fit.phi) s += c;
      fit.intercept = mean * (1.0 - s);
    }
  } else {
    // sample mean over the rows every order is scored on
    double acc = 0.0;
    for (int t = start; t < m; ++t) acc += y[static_cast<size_t>(t)];
    fit.intercept = acc / rows;
  }
  for (int t = start; t < m; ++t) {
    double pred = fit.intercept;
    for (int i = 1; i <= p; ++i) pred += fit.phi[static_cast<size_t>(i - 1)] * y[static_cast<size_t>(t - i)];
    const double r = y[static_cast<size_t>(t)] - pred;
    fit.rss += r * r;
  }
  return fit;
}

}  // namespace

bool ArimaFit::is_stationary() const {
  if (p == 0) return true;
  // Roots of 1 - sum phi_i z^i outside the unit circle <=> companion
  // eigenvalues inside it.
  Matrix companion = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i) companion(0, i) = coefficients[static_cast<size_t>(i)];
  for (int i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Matrix> solver(companion, false);
  for (Eigen::Index i = 0; i < p; ++i)
    if (!(std::abs(solver.eigenvalues()[i]) < 1.0)) return false;
  return true;
}

ArimaFit fit_arima(std::span<const double> series, const ArimaOptions& options) {
  if (static_cast<int>(series.size()) < options.min_length)
    throw PreconditionError("fit_arima: series length " + std::to_string(series.size()) + " is below " +
                            std::to_string(options.min_length));
  for (double v : series)
    if (!std::isfinite(v)) throw InputError("fit_arima: non-finite value");

  ArimaFit fit;
  if (is_constant(series)) {
    fit.intercept = series.front();
    return fit;
  }

  std::vector<double> y(series.begin(), series.end());
  while (fit.d < options.max_d) {
    std::vector<double> next = difference(y);
    if (!(variance(next) <= options.variance_ratio * variance(y))) break;
    y = std::move(next);
    ++fit.d;
  }

  const int m = static_cast<int>(y.size());
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= m;
  const int max_p = std::clamp(std::min(options.max_p, m / 2 - 1), 0, options.max_p);
  std::vector<double> gamma(static_cast<size_t>(max_p + 1), 0.0);
  for (int k = 0; k <= max_p; ++k) {
    double acc = 0.0;
    for (int t = k; t < m; ++t) acc += (y[static_cast<size_t>(t)] - mean) * (y[static_cast<size_t>(t - k)] - mean);
    gamma[static_cast<size_t>(k)] = acc / m;
  }
  if (gamma[0] == 0.0) {
    fit.intercept = mean;
    return fit;
  }

  // All orders are scored on the same effective sample.
  const int start = max_p;
  const int rows = m - start;
  double best_aic = std::numeric_limits<double>::infinity();
  for (int p = 0; p <= max_p; ++p) {
    OrderFit of = fit_order(y, p, start, gamma, mean);
    const double sigma2 = of.rss / rows;
    const double aic = rows * std::log(std::max(sigma2, std::numeric_limits<double>::min())) + 2.0 * (p + 1);
    if (aic < best_aic) {
      best_aic = aic;
      fit.p = p;
      fit.coefficients = std::move(of.phi);
      fit.intercept = of.intercept;
      fit.innovation_variance = sigma2;
    }
  }
  fit.aic = best_aic;
  return fit;
}

ArimaFit fit_arima_or_mean(std::span<const double> series, const ArimaOptions& options) {
  if (static_cast<int>(series.size()) >= options.min_length) return fit_arima(series, options);
  if (series.empty()) throw PreconditionError("fit_arima_or_mean: empty series");
  ArimaFit fit;
  double mean = 0.0;
  for (double v : series) mean += v;
  fit.intercept = mean / static_cast<double>(series.size());
  fit.innovation_variance = variance(series);
  return fit;
}

std::vector<double> forecast_arima(const ArimaFit& fit, std::span<const double> series, int h) {
  if (h < 1) throw PreconditionError("forecast_arima: horizon must be at least 1");
  if (static_cast<int>(series.size()) < fit.d + std::max(fit.p, 1))
    throw PreconditionError("forecast_arima: series too short for the fitted model");

  std::vector<std::vector<double>> levels;
  levels.emplace_back(series.begin(), series.end());
  for (int k = 0; k < fit.d; ++k) levels.push_back(difference(levels.back()));

  std::vector<double> y = levels.back();
  const size_t m = y.size();
  for (int s = 0; s < h; ++s) {
    double next = fit.intercept;
    for (int i = 1; i <= fit.p; ++i) next += fit.coefficients[static_cast<size_t>(i - 1)] * y[y.size() - static_cast<size_t>(i)];
    y.push_back(next);
  }
  std::vector<double> out(y.begin() + static_cast<std::ptrdiff_t>(m), y.end());
  for (int k = fit.d - 1; k >= 0; --k) {
    double level = levels[static_cast<size_t>(k)].back();
    for (double& v : out) {
      level += v;
      v = level;
    }
  }
  return out;
}

namespace {

template <typename Fitter>
std::vector<double> fit_and_forecast(std::span<const double> history, int h, Fitter&& fitter) {
  const ArimaFit fit = fitter(history);
  return forecast_arima(fit, history, h);
}

// Forecasts of steps 1..h from the first `length` observations.
ForecastParts forecast_from(const GlobalFeatures& features, const Matrix& coeff_matrix, const NrsiMap& map,
                            const WaveletBasis& basis, int length, int h, bool allow_short) {
  const int n = features.grid.size();
  const int K = features.dimension();
  auto fitter = [allow_short](std::span<const double> s) { return allow_short ? fit_arima_or_mean(s) : fit_arima(s); };

  Matrix scores(h, K);
  std::vector<double> column(static_cast<size_t>(length));
  for (int k = 0; k < K; ++k) {
    for (int t = 0; t < length; ++t) column[static_cast<size_t>(t)] = features.scores(t, k);
    const auto f = fit_and_forecast(column, h, fitter);
    for (int s = 0; s < h; ++s) scores(s, k) = f[static_cast<size_t>(s)];
  }
  ForecastParts parts;
  parts.global = scores * features.eigenfunctions.transpose();
  parts.global.rowwise() += features.mean.transpose();

  const int N = map.N;
  Matrix coeff_forecast = Matrix::Zero(h, N);
  const double min_nonzero = std::max(4.0, 0.1 * length);
  std::vector<double> row(static_cast<size_t>(length));
  for (int r = 0; r < N; ++r) {
    int nonzero = 0;
    for (int t = 0; t < length; ++t) {
      row[static_cast<size_t>(t)] = coeff_matrix(r, t);
      if (coeff_matrix(r, t) != 0.0) ++nonzero;
    }
    if (nonzero < min_nonzero) continue;
    const auto f = fit_and_forecast(row, h, fitter);
    for (int s = 0; s < h; ++s) coeff_forecast(s, r) = f[static_cast<size_t>(s)];
  }
  parts.local = Matrix::Zero(h, n);
  for (int s = 0; s < h; ++s) {
    if (coeff_forecast.row(s).isZero(0.0)) continue;
    const CoeffSet c(coeff_forecast.row(s).transpose(), basis.depth(), basis.coarsest_level());
    parts.local.row(s) = nrsi_inverse(c, map, basis).transpose();
  }
  return parts;
}

void check_shapes(const GlobalFeatures& features, const Matrix& coeff_matrix, const NrsiMap& map) {
  if (coeff_matrix.rows() != map.N || coeff_matrix.cols() != features.length())
    throw InputError("coefficient matrix must be N x T (" + std::to_string(map.N) + " x " +
                     std::to_string(features.length()) + ")");
  if (!(map.grid == features.grid)) throw InputError("wavelet map grid differs from feature grid");
}

}  // namespace

ForecastParts forecast_parts(const GlobalFeatures& features, const Matrix& coeff_matrix, const NrsiMap& map,
                             const WaveletBasis& basis, int h) {
  if (h < 1) throw PreconditionError("forecast horizon must be at least 1");
  if (features.length() < 8) throw PreconditionError("forecasting needs T >= 8");
  check_shapes(features, coeff_matrix, map);
  return forecast_from(features, coeff_matrix, map, basis, features.length(), h, false);
}

ForecastBundle forecast_curves(const GlobalFeatures& features, const Matrix& coeff_matrix, const NrsiMap& map,
                               const WaveletBasis& basis, int h) {
  ForecastParts parts = forecast_parts(features, coeff_matrix, map, basis, h);
  ForecastBundle bundle;
  bundle.horizon = h;
  bundle.point = parts.global + parts.local;
  return bundle;
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw PreconditionError("quantile of empty set");
  std::sort(values.begin(), values.end());
  const double pos = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

ScaleCalibration calibrate_scale(const Matrix& errors, const Vector& lower, const Vector& upper, double coverage) {
  const double total = static_cast<double>(errors.size());
  auto fraction = [&](double pi) {
    Eigen::Index inside = 0;
    for (Eigen::Index i = 0; i < errors.cols(); ++i)
      for (Eigen::Index z = 0; z < errors.rows(); ++z) {
        const double e = errors(z, i);
        if (pi * lower[i] <= e && e <= pi * upper[i]) ++inside;
      }
    return static_cast<double>(inside) / total;
  };
  double lo = 0.1;
  double hi = 10.0;
  if (fraction(lo) >= coverage) return {lo, fraction(lo)};
  if (fraction(hi) < coverage) return {hi, fraction(hi)};
  for (int iter = 0; iter < 200 && hi - lo > 1e-13 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (fraction(mid) >= coverage ? hi : lo) = mid;
  }
  return {hi, fraction(hi)};
}

ForecastBundle calibrate_intervals(const FunctionalSeries& series, const GlobalFeatures& features,
                                   const Matrix& coeff_matrix, const NrsiMap& map, const WaveletBasis& basis, int h,
                                   double coverage) {
  if (!(coverage > 0.0 && coverage < 1.0)) throw PreconditionError("coverage must lie in (0,1)");
  if (h < 1) throw PreconditionError("forecast horizon must be at least 1");
  if (series.length() != features.length() || !(series.grid() == features.grid))
    throw InputError("series does not match the extracted features");
  check_shapes(features, coeff_matrix, map);
  const int T = features.length();
  const int K = features.dimension();
  const int M = T - h - K + 1;
  if (M < 10) throw PreconditionError("interval calibration needs at least 10 in-sample errors, have " + std::to_string(M));
  if (M * (1.0 - coverage) < 1.0)
    throw PreconditionError("too few in-sample errors (" + std::to_string(M) + ") for coverage " +
                            std::to_string(coverage));

  ForecastBundle bundle = forecast_curves(features, coeff_matrix, map, basis, h);
  bundle.nominal_coverage = coverage;
  bundle.calibration_errors = M;
  const int n = features.grid.size();

  // errors[s] collects step-(s+1) in-sample errors, one row per origin.
  std::vector<std::vector<Vector>> errors(static_cast<size_t>(h));
  for (int xi = K; xi <= T - 1; ++xi) {
    const int steps = std::min(h, T - xi);
    const ForecastParts parts = forecast_from(features, coeff_matrix, map, basis, xi, steps, true);
    for (int s = 0; s < steps; ++s) {
      const Vector actual = series.curve(xi + s);
      errors[static_cast<size_t>(s)].push_back(actual - (parts.global.row(s) + parts.local.row(s)).transpose());
    }
  }

  bundle.lower = Matrix(h, n);
  bundle.upper = Matrix(h, n);
  const double lo_prob = (1.0 - coverage) / 2.0;
  const double hi_prob = (1.0 + coverage) / 2.0;
  for (int s = 0; s < h; ++s) {
    const auto& rows = errors[static_cast<size_t>(s)];
    Matrix e(static_cast<Eigen::Index>(rows.size()), n);
    for (size_t z = 0; z < rows.size(); ++z) e.row(static_cast<Eigen::Index>(z)) = rows[z].transpose();
    Vector lower(n), upper(n);
    std::vector<double> column(rows.size());
    for (int i = 0; i < n; ++i) {
      for (size_t z = 0; z < rows.size(); ++z) column[z] = e(static_cast<Eigen::Index>(z), i);
      // Bounds must bracket the point forecast.
      lower[i] = std::min(quantile(column, lo_prob), 0.0);
      upper[i] = std::max(quantile(column, hi_prob), 0.0);
      if (lower[i] == 0.0 && upper[i] == 0.0) {
        const double eps = std::numeric_limits<double>::epsilon() * std::max(1.0, e.col(i).cwiseAbs().maxCoeff());
        lower[i] = -eps;
        upper[i] = eps;
      }
    }
    const ScaleCalibration cal = calibrate_scale(e, lower, upper, coverage);
    bundle.pi.push_back(cal.pi);
    bundle.achieved_coverage.push_back(cal.achieved);
    bundle.lower->row(s) = bundle.point.row(s) + cal.pi * lower.transpose();
    bundle.upper->row(s) = bundle.point.row(s) + cal.pi * upper.transpose();
  }
  return bundle;
}

double interval_score(const Vector& lower, const Vector& upper, const Vector& actual, double a) {
  if (!(a > 0.0 && a < 1.0)) throw PreconditionError("interval_score: a must lie in (0,1)");
  if (lower.size() != upper.size() || lower.size() != actual.size() || lower.size() == 0)
    throw InputError("interval_score: length mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (lower[i] > upper[i]) throw PreconditionError("interval_score: lower bound exceeds upper bound");
    double s = upper[i] - lower[i];
    if (actual[i] < lower[i]) s += 2.0 / a * (lower[i] - actual[i]);
    if (actual[i] > upper[i]) s += 2.0 / a * (actual[i] - upper[i]);
    total += s;
  }
  return total / static_cast<double>(lower.size());
}

}  // namespace ftsx
