#include "ftsx/simulate.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ftsx/covariance.hpp"
#include "ftsx/forecast.hpp"
#include "ftsx/parallel.hpp"
#include "ftsx/pipeline.hpp"

namespace ftsx {
namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<double, 11> kBumpLocations = {0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81};
constexpr std::array<double, 11> kBumpHeights = {4, 5, 3, 4, 5, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2};
constexpr std::array<double, 11> kBumpWidths = {0.005, 0.005, 0.006, 0.01, 0.01, 0.03,
                                                0.01,  0.01,  0.005, 0.008, 0.005};

Vector on_grid(const Grid& grid, auto&& f) {
  Vector v(grid.size());
  for (int i = 0; i < grid.size(); ++i) v[i] = f(grid[i]);
  return v;
}

MetricSeries summarize(std::string name, std::vector<double> values) {
  MetricSeries m{std::move(name), std::move(values), 0.0, 0.0};
  const auto n = static_cast<double>(m.values.size());
  if (m.values.empty()) return m;
  double sum = 0.0;
  for (double v : m.values) sum += v;
  m.mean = sum / n;
  if (m.values.size() > 1) {
    double ss = 0.0;
    for (double v : m.values) ss += (v - m.mean) * (v - m.mean);
    m.sd = std::sqrt(ss / (n - 1.0));
  }
  return m;
}

double mean_curve_distance(const Matrix& a, const Matrix& b, const Grid& grid) {
  const Vector w = quad_weights(grid);
  double acc = 0.0;
  for (Eigen::Index t = 0; t < a.rows(); ++t) {
    const Vector d = (a.row(t) - b.row(t)).transpose();
    acc += std::sqrt(d.cwiseAbs2().dot(w));
  }
  return acc / static_cast<double>(a.rows());
}

CovSurface covariance_of(const FunctionalSeries& series, Mode mode, double h) {
  if (mode == Mode::Static) return static_cov(series);
  Matrix s = weighted_lrcov(series, KernelKind::QuadraticSpectral, h, 0).values();
  return CovSurface(series.grid(), 0.5 * (s + s.transpose()));
}

CovSurface exp2_theoretical_cov(const Grid& grid, Mode mode, const Exp2Params& params) {
  if (mode == Mode::Dynamic) return exp2_theoretical_lrcov(grid, params);
  // Lag-0 covariance for the static comparison.
  const int n = grid.size();
  const double g = 1.0 / (1.0 - params.theta_global * params.theta_global);
  const double l = params.local_scale * params.local_scale / (1.0 - params.theta_local * params.theta_local);
  Matrix c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double u = grid[i];
      const double s = grid[j];
      const double pu = std::exp(-u * u / 2.0) / std::sqrt(2.0 * kPi);
      const double ps = std::exp(-s * s / 2.0) / std::sqrt(2.0 * kPi);
      const bool inside = u >= params.local_start && u < params.local_end && s >= params.local_start &&
                          s < params.local_end;
      c(i, j) = g * (pu * ps) + (inside ? l * (std::min(u, s) - params.local_start) : 0.0) +
                params.noise_var * std::min(u, s);
    }
  return CovSurface(grid, std::move(c));
}

using Row = std::vector<std::pair<std::string, double>>;

Row exp1_replication(const ExperimentConfig& config, Rng& rng) {
  Exp1Params params;
  if (config.noise_scale) params.noise_scale = *config.noise_scale;
  const Exp1Data data = gen_exp1(config.T, config.grid_points(), rng, params);
  const Extraction ex = extract_features(data.observed, config.mode, config.j0);
  const FunctionalSeries combined = ex.combined();
  const Grid& grid = data.observed.grid();
  const double n_cells = static_cast<double>(data.clean.values().size());
  return {
      {"rse", rse(data.clean, ex.global_fit, ex.local.curves)},
      {"mse_fpca", (data.clean.values() - ex.global_fit.values()).squaredNorm() / n_cells},
      {"mse_btw", (data.clean.values() - combined.values()).squaredNorm() / n_cells},
      {"recon_error", mean_curve_distance(data.clean.values(), combined.values(), grid)},
      {"k_hat", static_cast<double>(ex.global.dimension())},
      {"sparsity", ex.local.sparsity},
  };
}

Row exp2_replication(const ExperimentConfig& config, Rng& rng) {
  const Exp2Data data = gen_exp2(config.T, config.grid_points(), rng);
  const Extraction ex = extract_features(data.observed, config.mode, config.j0);
  const double h = ex.global.bandwidth ? ex.global.bandwidth->h_opt : 1.0;
  const CovSurface truth = exp2_theoretical_cov(data.observed.grid(), config.mode, Exp2Params{});
  const CovSurface fpca = covariance_of(ex.global_fit, config.mode, h);
  const CovSurface btw = covariance_of(ex.combined(), config.mode, h);
  return {
      {"re_fpca", re(truth, fpca).value},
      {"re_btw", re(truth, btw).value},
      {"k_hat", static_cast<double>(ex.global.dimension())},
  };
}

Row forecast_replication(const ExperimentConfig& config, Rng& rng) {
  const int H = config.horizons;
  const ForecastDgpData data = gen_exp_forecast(config.T, config.grid_points(), rng);
  const int T = config.T;
  std::vector<std::vector<Vector>> fpca(static_cast<size_t>(H));
  std::vector<std::vector<Vector>> btw(static_cast<size_t>(H));
  double interval_total = 0.0;
  double k_total = 0.0;
  for (int o = 0; o < H; ++o) {
    const int train = T - H + o;
    const FunctionalSeries history = data.observed.slice(0, train);
    const Extraction ex = extract_features(history, config.mode, config.j0);
    const int steps = H - o;
    const ForecastParts parts = forecast_parts(ex.global, ex.local.coeffs, ex.map, ex.basis, steps);
    for (int s = 0; s < steps; ++s) {
      fpca[static_cast<size_t>(o)].push_back(parts.global.row(s).transpose());
      btw[static_cast<size_t>(o)].push_back((parts.global.row(s) + parts.local.row(s)).transpose());
    }
    k_total += ex.global.dimension();
    if (config.intervals) {
      const ForecastBundle b =
          calibrate_intervals(history, ex.global, ex.local.coeffs, ex.map, ex.basis, 1, config.coverage);
      interval_total += interval_score(b.lower->row(0).transpose(), b.upper->row(0).transpose(),
                                       data.observed.curve(train), 1.0 - config.coverage);
    }
  }
  const Matrix tail = data.observed.values().bottomRows(H);
  const HorizonErrors ef = forecast_errors(fpca, tail);
  const HorizonErrors eb = forecast_errors(btw, tail);
  Row row;
  for (int h = 1; h <= H; ++h) {
    const auto i = static_cast<size_t>(h - 1);
    const std::string tag = "_h" + std::to_string(h);
    row.emplace_back("mafe_fpca" + tag, ef.mafe[i]);
    row.emplace_back("mafe_btw" + tag, eb.mafe[i]);
    row.emplace_back("rmsfe_fpca" + tag, ef.rmsfe[i]);
    row.emplace_back("rmsfe_btw" + tag, eb.rmsfe[i]);
  }
  if (config.intervals) row.emplace_back("interval_score_h1", interval_total / H);
  row.emplace_back("k_hat", k_total / H);
  return row;
}

MetricsReport run_replications(const ExperimentConfig& config, Row (*replicate)(const ExperimentConfig&, Rng&)) {
  if (config.reps < 1) throw PreconditionError("reps must be at least 1");
  if (config.T < 8) throw PreconditionError("T must be at least 8");
  const auto start = std::chrono::steady_clock::now();
  std::vector<Row> rows(static_cast<size_t>(config.reps));
  parallel_for(config.reps, [&](int rep) {
    Rng rng(config.seed, static_cast<std::uint64_t>(rep));
    rows[static_cast<size_t>(rep)] = replicate(config, rng);
  });
  MetricsReport report;
  report.config = config;
  for (size_t m = 0; m < rows.front().size(); ++m) {
    std::vector<double> values;
    values.reserve(rows.size());
    for (const Row& r : rows) values.push_back(r[m].second);
    report.metrics.push_back(summarize(rows.front()[m].first, std::move(values)));
  }
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x66747378u};
  engine_.seed(seq);
}

double Rng::normal(double sd) { return sd * normal_(engine_); }

double Rng::uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

std::vector<double> simulate_ar1(double theta, double innovation_sd, int T, int burn_in, Rng& rng) {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(T));
  double x = 0.0;
  for (int t = 0; t < burn_in + T; ++t) {
    x = theta * x + rng.normal(innovation_sd);
    if (t >= burn_in) out.push_back(x);
  }
  return out;
}

Vector brownian_path(const Grid& grid, Rng& rng) {
  Vector b(grid.size());
  double level = 0.0;
  double prev = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    level += rng.normal(std::sqrt(grid[i] - prev));
    prev = grid[i];
    b[i] = level;
  }
  return b;
}

Vector bumps(const Grid& grid) {
  return on_grid(grid, [](double u) {
    double acc = 0.0;
    for (size_t j = 0; j < kBumpLocations.size(); ++j)
      acc += kBumpHeights[j] * std::pow(1.0 + std::abs((u - kBumpLocations[j]) / kBumpWidths[j]), -4.0);
    return acc;
  });
}

Exp1Data gen_exp1(int T, int n, Rng& rng, const Exp1Params& params) {
  const Grid grid = Grid::uniform(n);
  const auto basis = gram_schmidt({on_grid(grid, [](double u) { return std::sin(kPi * u); }), bumps(grid)}, grid);
  const auto beta1 = simulate_ar1(params.theta1, std::sqrt(params.innovation_var1), T, params.burn_in, rng);
  const auto beta2 = simulate_ar1(params.theta2, std::sqrt(params.innovation_var2), T, params.burn_in, rng);
  Matrix clean(T, n), local(T, n), observed(T, n);
  for (int t = 0; t < T; ++t) {
    const Vector z = beta2[static_cast<size_t>(t)] * basis[1];
    const Vector x = beta1[static_cast<size_t>(t)] * basis[0] + z;
    local.row(t) = z.transpose();
    clean.row(t) = x.transpose();
    observed.row(t) = (x + params.noise_scale * brownian_path(grid, rng)).transpose();
  }
  return {FunctionalSeries(grid, std::move(observed)), FunctionalSeries(grid, std::move(clean)),
          FunctionalSeries(grid, std::move(local)), beta1};
}

CovSurface exp2_theoretical_lrcov(const Grid& grid, const Exp2Params& params) {
  const int n = grid.size();
  const double g = 1.0 / ((1.0 - params.theta_global) * (1.0 - params.theta_global));
  const double l = params.local_scale * params.local_scale / ((1.0 - params.theta_local) * (1.0 - params.theta_local));
  Matrix c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double u = grid[i];
      const double s = grid[j];
      const double pu = std::exp(-u * u / 2.0) / std::sqrt(2.0 * kPi);
      const double ps = std::exp(-s * s / 2.0) / std::sqrt(2.0 * kPi);
      const bool inside = u >= params.local_start && u < params.local_end && s >= params.local_start &&
                          s < params.local_end;
      c(i, j) = g * (pu * ps) + (inside ? l * (std::min(u, s) - params.local_start) : 0.0) +
                params.noise_var * std::min(u, s);
    }
  return CovSurface(grid, std::move(c));
}

Exp2Data gen_exp2(int T, int n, Rng& rng, const Exp2Params& params) {
  const Grid grid = Grid::uniform(n);
  const Vector phi = on_grid(grid, [](double u) { return std::exp(-u * u / 2.0) / std::sqrt(2.0 * kPi); });
  const auto beta = simulate_ar1(params.theta_global, 1.0, T, params.burn_in, rng);

  std::vector<int> window;
  for (int i = 0; i < n; ++i)
    if (grid[i] >= params.local_start && grid[i] < params.local_end) window.push_back(i);

  // Brownian innovation pinned at local_start, zero outside the window.
  auto innovation = [&] {
    Vector b = Vector::Zero(n);
    double level = 0.0;
    double prev = params.local_start;
    for (int i : window) {
      level += rng.normal(std::sqrt(grid[i] - prev));
      prev = grid[i];
      b[i] = level;
    }
    return b;
  };
  Vector z = Vector::Zero(n);
  for (int t = 0; t < params.burn_in; ++t) z = params.theta_local * z + params.local_scale * innovation();

  Matrix observed(T, n);
  const double noise_sd = std::sqrt(params.noise_var);
  for (int t = 0; t < T; ++t) {
    z = params.theta_local * z + params.local_scale * innovation();
    observed.row(t) = (beta[static_cast<size_t>(t)] * phi + z + noise_sd * brownian_path(grid, rng)).transpose();
  }
  return {FunctionalSeries(grid, std::move(observed)), exp2_theoretical_lrcov(grid, params)};
}

Vector forecast_local_basis(const Grid& grid, double a1, double a2) {
  return on_grid(grid, [=](double u) {
    if (u >= a1 && u < a1 + 0.1) return std::sin(kPi * (u - a1) / 0.1);
    if (u >= a2 && u < a2 + 0.1) return 2.0 * std::sin(kPi * (u - a2) / 0.1);
    return 0.0;
  });
}

ForecastDgpData gen_exp_forecast(int T, int n, Rng& rng) {
  const Grid grid = Grid::uniform(n);
  ForecastDgpData out{FunctionalSeries(grid, Matrix::Zero(1, n)), 0.0, 0.0};
  out.a1 = rng.uniform(0.05, 0.4);
  out.a2 = rng.uniform(0.55, 0.8);
  const auto basis = gram_schmidt({on_grid(grid, [](double u) { return std::sin(kPi * u); }),
                                   on_grid(grid, [](double u) { return std::sin(2.0 * kPi * u); }),
                                   forecast_local_basis(grid, out.a1, out.a2)},
                                  grid);
  const auto beta1 = simulate_ar1(0.2, std::sqrt(10.0), T, 200, rng);
  const auto beta2 = simulate_ar1(0.8, 2.0, T, 200, rng);
  std::vector<double> beta3(static_cast<size_t>(T));
  double slope = 0.0;
  double level = 0.0;
  for (int t = 0; t < T; ++t) {
    slope += rng.normal(1.0);
    level += slope;
    beta3[static_cast<size_t>(t)] = level;
  }
  Matrix values(T, n);
  const double noise_sd = std::sqrt(0.1);
  for (int t = 0; t < T; ++t) {
    const auto i = static_cast<size_t>(t);
    values.row(t) = (beta1[i] * basis[0] + beta2[i] * basis[1] + beta3[i] * basis[2] +
                     noise_sd * brownian_path(grid, rng))
                        .transpose();
  }
  out.observed = FunctionalSeries(grid, std::move(values));
  return out;
}

double rse(const FunctionalSeries& clean, const FunctionalSeries& global_fit, const FunctionalSeries& local_fit) {
  if (clean.values().rows() != global_fit.values().rows() || clean.values().cols() != global_fit.values().cols() ||
      clean.values().rows() != local_fit.values().rows() || clean.values().cols() != local_fit.values().cols())
    throw InputError("rse: shape mismatch");
  const Matrix base = clean.values() - global_fit.values();
  const double denom = base.squaredNorm();
  if (!(denom > 0.0)) throw NumericError("rse: zero denominator");
  return (base - local_fit.values()).squaredNorm() / denom;
}

RelativeError re(const CovSurface& theoretical, const CovSurface& estimated) {
  const Matrix& c = theoretical.values();
  const Matrix& e = estimated.values();
  if (c.rows() != e.rows() || c.cols() != e.cols()) throw InputError("re: surfaces have different shapes");
  RelativeError out;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      if (std::abs(c(i, j)) <= 1e-12) {
        ++out.excluded;
        continue;
      }
      const double r = (c(i, j) - e(i, j)) / c(i, j);
      acc += r * r;
      ++out.included;
    }
  if (out.included == 0) throw NumericError("re: every theoretical cell is below the guard");
  out.value = std::sqrt(acc);
  return out;
}

HorizonErrors forecast_errors(const std::vector<std::vector<Vector>>& forecasts, const Matrix& actual_tail) {
  const auto H = static_cast<int>(forecasts.size());
  if (actual_tail.rows() != H) throw InputError("forecast_errors: tail rows must equal the number of origins");
  HorizonErrors out;
  for (int h = 1; h <= H; ++h) {
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    double count = 0.0;
    for (int o = 0; o + h - 1 < H; ++o) {
      const auto& f = forecasts[static_cast<size_t>(o)];
      if (static_cast<int>(f.size()) < h) throw InputError("forecast_errors: missing forecast step");
      const Vector err = actual_tail.row(o + h - 1).transpose() - f[static_cast<size_t>(h - 1)];
      abs_sum += err.cwiseAbs().sum();
      sq_sum += err.squaredNorm();
      count += static_cast<double>(err.size());
    }
    out.mafe.push_back(abs_sum / count);
    out.rmsfe.push_back(std::sqrt(sq_sum / count));
  }
  return out;
}

int ExperimentConfig::grid_points() const {
  if (n_grid > 0) return n_grid;
  return experiment == Experiment::Exp2 ? 40 : 100;
}

const MetricSeries& MetricsReport::metric(const std::string& name) const {
  for (const auto& m : metrics)
    if (m.name == name) return m;
  throw std::out_of_range("no metric named " + name);
}

MetricsReport run_experiment(const ExperimentConfig& config) {
  switch (config.experiment) {
    case Experiment::Exp1:
      return run_replications(config, exp1_replication);
    case Experiment::Exp2:
      return run_replications(config, exp2_replication);
    case Experiment::Forecast:
      return run_forecast_eval(config);
  }
  throw InputError("unknown experiment");
}

MetricsReport run_forecast_eval(const ExperimentConfig& config) {
  if (config.experiment != Experiment::Forecast) throw PreconditionError("run_forecast_eval needs the forecast experiment");
  if (config.horizons < 1) throw PreconditionError("horizons must be at least 1");
  if (config.T - config.horizons < 12)
    throw PreconditionError("T too small for the expanding window (need T - horizons >= 12)");
  return run_replications(config, forecast_replication);
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Exp1:
      return "exp1";
    case Experiment::Exp2:
      return "exp2";
    case Experiment::Forecast:
      return "forecast";
  }
  return "unknown";
}

}  // namespace ftsx
