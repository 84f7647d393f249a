#pragma once

#include <utility>

#include "ftsx/core.hpp"

namespace ftsx {

enum class KernelKind { FlatTop, QuadraticSpectral };

struct BandwidthReport {
  double pilot_bandwidth = 0.0;  // h1 = T^{1/5}
  double c0_hat = 0.0;
  double h_opt = 0.0;
  int lags_used = 0;             // largest |lag| summed in the final QS estimate
};

/// Lag-l sample autocovariance surface, divisor T for every lag.
/// c_{-l}(u,s) == c_l(s,u).
CovSurface autocov(const FunctionalSeries& series, int lag);

double kernel_eval(KernelKind kind, double x);

/// Integrals of W_QS and W_QS^2 over the real line, computed once by adaptive
/// Gauss-Kronrod quadrature on [-64, 64].
double qs_kernel_integral();
double qs_kernel_square_integral();

/// Sum over lags of W(l/h) |l|^p c_l(u,s), p in {0, 2}. QS lags are truncated
/// at min(T-1, ceil(50 h)).
CovSurface weighted_lrcov(const FunctionalSeries& series, KernelKind kind, double h, int moment_power);

/// Two-stage plug-in bandwidth: flat-top pilot at T^{1/5}, then
/// h_opt = C0(h1) * T^{1/5} for the QS kernel.
BandwidthReport plugin_bandwidth(const FunctionalSeries& series);

/// QS-weighted long-run covariance at the plug-in bandwidth, symmetrized.
std::pair<CovSurface, BandwidthReport> long_run_cov(const FunctionalSeries& series);

/// Lag-0 covariance, for the static mode.
CovSurface static_cov(const FunctionalSeries& series);

}  // namespace ftsx
