#pragma once

#include <optional>
#include <vector>

#include "ftsx/core.hpp"
#include "ftsx/fpca.hpp"
#include "ftsx/wavelet.hpp"

namespace ftsx {

/// AR(p) on the d-times differenced series: y_t = intercept + sum phi_i y_{t-i} + e_t.
struct ArimaFit {
  int d = 0;
  int p = 0;
  std::vector<double> coefficients;
  double intercept = 0.0;
  double innovation_variance = 0.0;
  double aic = 0.0;

  /// All roots of 1 - sum phi_i z^i outside the unit circle.
  bool is_stationary() const;
};

struct ArimaOptions {
  int max_d = 2;
  int max_p = 5;
  // Difference again while the differenced variance is at most this fraction
  // of the current variance.
  double variance_ratio = 0.1;
  int min_length = 8;
};

ArimaFit fit_arima(std::span<const double> series, const ArimaOptions& options = {});

/// Iterated h-step forecasts, undifferenced against the observed tail.
std::vector<double> forecast_arima(const ArimaFit& fit, std::span<const double> series, int h);

/// Fits like fit_arima but degrades to a mean forecast on series shorter than
/// options.min_length.
ArimaFit fit_arima_or_mean(std::span<const double> series, const ArimaOptions& options = {});

struct ForecastBundle {
  int horizon = 0;
  Matrix point;                  // h x n
  std::optional<Matrix> lower;   // h x n
  std::optional<Matrix> upper;
  double nominal_coverage = 0.0;
  // Interval calibration diagnostics.
  std::vector<double> pi;                // per step
  std::vector<double> achieved_coverage; // per step
  int calibration_errors = 0;            // M
};

/// Global (FPCA) and local (wavelet) components of the point forecast.
struct ForecastParts {
  Matrix global;  // h x n, includes the mean
  Matrix local;   // h x n
};

ForecastParts forecast_parts(const GlobalFeatures& features, const Matrix& coeff_matrix, const NrsiMap& map,
                             const WaveletBasis& basis, int h);

/// Point forecasts of steps 1..h: mean + forecast scores on the eigenfunctions
/// + inverse NRSI of forecast coefficients. Coefficient rows with fewer than
/// max(4, 0.1 T) nonzeros forecast as zero.
ForecastBundle forecast_curves(const GlobalFeatures& features, const Matrix& coeff_matrix, const NrsiMap& map,
                               const WaveletBasis& basis, int h);

/// Point forecasts plus pointwise bootstrap intervals calibrated on rolling
/// in-sample h-step errors with a single scale factor per step.
ForecastBundle calibrate_intervals(const FunctionalSeries& series, const GlobalFeatures& features,
                                   const Matrix& coeff_matrix, const NrsiMap& map, const WaveletBasis& basis, int h,
                                   double coverage);

struct ScaleCalibration {
  double pi = 1.0;
  double achieved = 0.0;
};

/// Minimal pi in [0.1, 10] (bisection) such that the fraction of errors
/// inside [pi * lower, pi * upper] is at least coverage. errors is M x n.
ScaleCalibration calibrate_scale(const Matrix& errors, const Vector& lower, const Vector& upper, double coverage);

/// Linear-interpolation empirical quantile.
double quantile(std::vector<double> values, double prob);

double interval_score(const Vector& lower, const Vector& upper, const Vector& actual, double a);

}  // namespace ftsx
