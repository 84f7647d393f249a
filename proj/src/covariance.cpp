#include "ftsx/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace ftsx {
namespace {

constexpr double kPi = std::numbers::pi;

// c_l for l >= 0 from an already centered matrix.
Matrix lag_product(const Matrix& centered, int lag) {
  const auto T = centered.rows();
  const auto m = T - lag;
  return centered.topRows(m).transpose() * centered.bottomRows(m) / static_cast<double>(T);
}

int qs_max_lag(int T, double h) {
  const double cap = std::ceil(50.0 * h);
  return static_cast<int>(std::min<double>(T - 1, cap));
}

double integrate_qs(bool squared) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [squared](double x) {
    const double w = kernel_eval(KernelKind::QuadraticSpectral, x);
    return squared ? w * w : w;
  };
  // Unit panels keep each adaptive integration away from many oscillations.
  double total = 0.0;
  for (int a = -64; a < 64; ++a)
    total += gauss_kronrod<double, 31>::integrate(f, a, a + 1, 10, 1e-14);
  return total;
}

}  // namespace

CovSurface autocov(const FunctionalSeries& series, int lag) {
  const int T = series.length();
  if (std::abs(lag) >= T)
    throw PreconditionError("autocov: |lag| = " + std::to_string(std::abs(lag)) + " must be below T = " +
                            std::to_string(T));
  const Matrix centered = center(series).centered.values();
  Matrix c = lag_product(centered, std::abs(lag));
  if (lag < 0) c.transposeInPlace();
  return CovSurface(series.grid(), std::move(c));
}

double kernel_eval(KernelKind kind, double x) {
  const double a = std::abs(x);
  switch (kind) {
    case KernelKind::FlatTop:
      if (a <= 0.5) return 1.0;
      if (a < 1.0) return 2.0 - 2.0 * a;
      return 0.0;
    case KernelKind::QuadraticSpectral: {
      if (a < 1e-4) {
        // Series expansion around 0: 1 - (6 pi x / 5)^2 / 10 + ...
        const double z = 6.0 * kPi * a / 5.0;
        return 1.0 - z * z / 10.0 + z * z * z * z / 280.0;
      }
      const double z = 6.0 * kPi * a / 5.0;
      return 25.0 / (12.0 * kPi * kPi * a * a) * (std::sin(z) / z - std::cos(z));
    }
  }
  return 0.0;
}

double qs_kernel_integral() {
  static const double value = integrate_qs(false);
  return value;
}

double qs_kernel_square_integral() {
  static const double value = integrate_qs(true);
  return value;
}

CovSurface weighted_lrcov(const FunctionalSeries& series, KernelKind kind, double h, int moment_power) {
  if (!(h > 0.0) || !std::isfinite(h)) throw PreconditionError("weighted_lrcov: bandwidth must be positive");
  if (moment_power != 0 && moment_power != 2) throw PreconditionError("weighted_lrcov: moment power must be 0 or 2");
  const int T = series.length();
  const Matrix centered = center(series).centered.values();
  const int n = series.points();
  Matrix acc = Matrix::Zero(n, n);

  const int max_lag = kind == KernelKind::QuadraticSpectral ? qs_max_lag(T, h) : T - 1;
  if (moment_power == 0) acc += lag_product(centered, 0);
  for (int lag = 1; lag <= max_lag; ++lag) {
    const double w = kernel_eval(kind, lag / h);
    if (w == 0.0) {
      if (kind == KernelKind::FlatTop) break;  // support is [-h, h]
      continue;
    }
    const double scale = moment_power == 2 ? w * lag * lag : w;
    const Matrix c = lag_product(centered, lag);
    // c_{-l} = c_l^T and the weight is even in l.
    acc += scale * (c + c.transpose());
  }
  return CovSurface(series.grid(), std::move(acc));
}

BandwidthReport plugin_bandwidth(const FunctionalSeries& series) {
  const int T = series.length();
  if (T < 4) throw PreconditionError("plugin_bandwidth: need T >= 4, got " + std::to_string(T));
  const Grid& grid = series.grid();

  BandwidthReport report;
  report.pilot_bandwidth = std::pow(static_cast<double>(T), 0.2);
  const Matrix pilot0 = weighted_lrcov(series, KernelKind::FlatTop, report.pilot_bandwidth, 0).values();
  const Matrix pilot2 = weighted_lrcov(series, KernelKind::FlatTop, report.pilot_bandwidth, 2).values();

  const double omega = 18.0 * kPi * kPi / 125.0;
  const double norm0 = surface_norm2(pilot0, grid);
  const double trace0 = surface_trace(pilot0, grid);
  const double denom = (norm0 + trace0 * trace0) * qs_kernel_integral();
  if (!(norm0 > 0.0) || !(denom > 0.0))
    throw NumericError("plugin_bandwidth: degenerate pilot covariance (constant input?)");
  const double numer = 4.0 * surface_norm2(omega * pilot2, grid);

  report.c0_hat = std::pow(numer, 0.2) * std::pow(denom, -0.2);
  report.h_opt = report.c0_hat * std::pow(static_cast<double>(T), 0.2);
  if (!(report.h_opt > 0.0) || !std::isfinite(report.h_opt))
    throw NumericError("plugin_bandwidth: non-positive bandwidth (no serial structure in pilot)");
  report.lags_used = qs_max_lag(T, report.h_opt);
  return report;
}

std::pair<CovSurface, BandwidthReport> long_run_cov(const FunctionalSeries& series) {
  BandwidthReport report = plugin_bandwidth(series);
  Matrix s = weighted_lrcov(series, KernelKind::QuadraticSpectral, report.h_opt, 0).values();
  Matrix sym = 0.5 * (s + s.transpose());
  return {CovSurface(series.grid(), std::move(sym)), report};
}

CovSurface static_cov(const FunctionalSeries& series) {
  if (series.length() < 2) throw PreconditionError("static_cov: need T >= 2");
  return autocov(series, 0);
}

}  // namespace ftsx
