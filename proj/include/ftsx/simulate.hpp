#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ftsx/core.hpp"
#include "ftsx/fpca.hpp"

namespace ftsx {

/// Per-replication random stream derived from (seed, stream).
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  double normal(double sd = 1.0);
  double uniform(double lo, double hi);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// AR(1) path of length T after discarding burn_in steps from a zero start.
std::vector<double> simulate_ar1(double theta, double innovation_sd, int T, int burn_in, Rng& rng);

/// Standard Brownian motion on the grid: B(0) = 0, N(0, du) increments.
Vector brownian_path(const Grid& grid, Rng& rng);

/// Donoho-Johnstone bumps with kernel (1 + |u|)^-4.
Vector bumps(const Grid& grid);

// ---------------------------------------------------------------------------
// Experiment 1: sin(pi u) global component plus a bumps local component.

struct Exp1Params {
  double theta1 = 0.8;
  double innovation_var1 = 4.0;
  double theta2 = 0.2;
  double innovation_var2 = 0.01;
  double noise_scale = 0.01;
  int burn_in = 200;
};

struct Exp1Data {
  FunctionalSeries observed;
  FunctionalSeries clean;  // beta1 phi1 + beta2 phi2
  FunctionalSeries local;  // beta2 phi2
  std::vector<double> beta1;
};

Exp1Data gen_exp1(int T, int n, Rng& rng, const Exp1Params& params = {});

// ---------------------------------------------------------------------------
// Experiment 2: Gaussian-density global component plus an AR(1) Brownian bump
// on [0.25, 0.5).

struct Exp2Params {
  double theta_global = 0.2487;
  double theta_local = 0.5;
  double local_scale = 0.1;
  double noise_var = 0.001;
  double local_start = 0.25;
  double local_end = 0.5;
  int burn_in = 200;
};

struct Exp2Data {
  FunctionalSeries observed;
  CovSurface theoretical_lrcov;
};

Exp2Data gen_exp2(int T, int n, Rng& rng, const Exp2Params& params = {});

/// Closed-form long-run covariance of the Experiment 2 process.
CovSurface exp2_theoretical_lrcov(const Grid& grid, const Exp2Params& params = {});

// ---------------------------------------------------------------------------
// Forecasting experiment: two sine components plus an ARIMA(0,2,0)-driven
// two-window local component.

struct ForecastDgpData {
  FunctionalSeries observed;
  double a1 = 0.0;
  double a2 = 0.0;
};

ForecastDgpData gen_exp_forecast(int T, int n, Rng& rng);

/// Unnormalized two-window local basis function.
Vector forecast_local_basis(const Grid& grid, double a1, double a2);

// ---------------------------------------------------------------------------
// Metrics.

/// Ratio of total squared errors with and without the local estimate.
double rse(const FunctionalSeries& clean, const FunctionalSeries& global_fit, const FunctionalSeries& local_fit);

struct RelativeError {
  double value = 0.0;
  int included = 0;
  int excluded = 0;  // cells with |C| <= 1e-12
};

RelativeError re(const CovSurface& theoretical, const CovSurface& estimated);

// ---------------------------------------------------------------------------
// Replication runner.

enum class Experiment { Exp1 = 1, Exp2 = 2, Forecast = 3 };

struct ExperimentConfig {
  Experiment experiment = Experiment::Exp1;
  int T = 100;
  int n_grid = 0;  // 0 selects the experiment default (100, 40, 100)
  int reps = 100;
  std::uint64_t seed = 1;
  Mode mode = Mode::Dynamic;
  int j0 = 3;
  int horizons = 5;        // forecasting experiment only
  bool intervals = true;   // forecasting experiment: one-step interval score
  double coverage = 0.8;
  std::optional<double> noise_scale;  // Exp1 noise multiplier override


  int grid_points() const;
};

struct MetricSeries {
  std::string name;
  std::vector<double> values;  // one per replication
  double mean = 0.0;
  double sd = 0.0;
};

struct MetricsReport {
  ExperimentConfig config;
  std::vector<MetricSeries> metrics;
  double runtime_seconds = 0.0;  // not part of the persisted report

  const MetricSeries& metric(const std::string& name) const;
};

/// Exp1: rse, mse_fpca, mse_btw, recon_error, k_hat, sparsity.
/// Exp2: re_fpca, re_btw, k_hat.
/// Forecast: mafe_{fpca,btw}_h{s}, rmsfe_{fpca,btw}_h{s}, interval_score_h1, k_hat.
MetricsReport run_experiment(const ExperimentConfig& config);

/// Expanding-window forecast evaluation for the forecasting experiment.
MetricsReport run_forecast_eval(const ExperimentConfig& config);

struct HorizonErrors {
  std::vector<double> mafe;   // index h-1
  std::vector<double> rmsfe;
};

/// MAFE and RMSFE by horizon from per-origin forecasts. forecasts[o][s] is the
/// (s+1)-step forecast from origin o (training length T - H + o) and actual
/// rows are the last H observations.
HorizonErrors forecast_errors(const std::vector<std::vector<Vector>>& forecasts, const Matrix& actual_tail);

std::string to_string(Experiment e);

}  // namespace ftsx
