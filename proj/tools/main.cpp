// ftsx command-line front end: extract, forecast, simulate, smooth.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ftsx/forecast.hpp"
#include "ftsx/io.hpp"
#include "ftsx/parallel.hpp"
#include "ftsx/pipeline.hpp"
#include "ftsx/simulate.hpp"
#include "ftsx/smooth.hpp"

namespace fs = std::filesystem;
using namespace ftsx;

namespace {

enum Exit { kOk = 0, kInput = 2, kPrecondition = 3, kNumeric = 4 };

fs::path sibling(const fs::path& path, const std::string& suffix, const std::string& ext) {
  fs::path out = path;
  const std::string e = path.has_extension() ? path.extension().string() : ext;
  out.replace_filename(path.stem().string() + suffix + e);
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

struct ExtractArgs {
  std::string input, output, mode = "dynamic";
  int j0 = 3;
};

int run_extract(const ExtractArgs& a) {
  const FunctionalSeries series = read_curve_csv(a.input);
  const Mode mode = parse_mode(a.mode);
  const Extraction ex = extract_features(series, mode, a.j0);
  write_feature_file(a.output, FeatureFile::from_extraction(ex));

  const auto& g = ex.global;
  std::cout << "curves: " << series.length() << "  grid points: " << series.points() << "  mode: " << a.mode << "\n";
  std::cout << "K_hat: " << g.dimension() << "\n";
  if (g.bandwidth)
    std::cout << "h_opt: " << fmt(g.bandwidth->h_opt) << "  (pilot " << fmt(g.bandwidth->pilot_bandwidth) << ", lags "
              << g.bandwidth->lags_used << ")\n";
  else
    std::cout << "h_opt: n/a (static)\n";
  std::vector<double> s = ex.local.sigma;
  std::sort(s.begin(), s.end());
  std::cout << "sigma_hat: min " << fmt(s.front()) << "  median " << fmt(median(s)) << "  max " << fmt(s.back())
            << "\n";
  std::cout << "coefficient sparsity: " << fmt(ex.local.sparsity) << "\n";
  return kOk;
}

struct ForecastArgs {
  std::string features, input, output;
  int horizon = 1;
  double coverage = 0.8;
};

int run_forecast(const ForecastArgs& a) {
  if (a.horizon < 1) throw PreconditionError("--horizon must be at least 1");
  const FeatureFile f = read_feature_file(a.features);
  const FunctionalSeries series = read_curve_csv(a.input);
  if (!(series.grid() == f.global.grid)) throw InputError("input grid differs from the feature file grid");
  if (series.length() != f.global.length())
    throw InputError("input has " + std::to_string(series.length()) + " curves, feature file has " +
                     std::to_string(f.global.length()));
  const WaveletBasis basis = f.basis();
  const ForecastBundle b = calibrate_intervals(series, f.global, f.coeffs, f.map(), basis, a.horizon, a.coverage);
  const fs::path out(a.output);
  write_curve_csv(out, series.grid(), b.point);
  write_curve_csv(sibling(out, "_lower", ".csv"), series.grid(), *b.lower);
  write_curve_csv(sibling(out, "_upper", ".csv"), series.grid(), *b.upper);
  std::cout << "calibration errors M: " << b.calibration_errors << "  nominal coverage: " << fmt(b.nominal_coverage)
            << "\n";
  for (int s = 0; s < b.horizon; ++s)
    std::cout << "h=" << s + 1 << "  pi: " << fmt(b.pi[static_cast<size_t>(s)])
              << "  achieved: " << fmt(b.achieved_coverage[static_cast<size_t>(s)]) << "\n";
  return kOk;
}

struct SimulateArgs {
  int experiment = 1;
  std::vector<int> sizes;
  int reps = 100;
  std::uint64_t seed = 1;
  std::string mode;
  std::string output;
};

int run_simulate(const SimulateArgs& a) {
  if (a.experiment < 1 || a.experiment > 3) throw InputError("--experiment must be 1, 2 or 3");
  if (a.reps < 1) throw InputError("--reps must be positive");
  const auto exp = static_cast<Experiment>(a.experiment);
  std::vector<int> sizes = a.sizes;
  if (sizes.empty()) {
    if (exp == Experiment::Exp1) sizes = {25, 50, 100};
    else if (exp == Experiment::Exp2) sizes = {200, 500, 1000};
    else sizes = {45};
  }
  std::vector<MetricsReport> reports;
  for (int T : sizes) {
    ExperimentConfig c;
    c.experiment = exp;
    c.T = T;
    c.reps = a.reps;
    c.seed = a.seed;
    c.mode = a.mode.empty() ? (exp == Experiment::Forecast ? Mode::Static : Mode::Dynamic) : parse_mode(a.mode);
    MetricsReport r = run_experiment(c);
    std::cerr << to_string(exp) << " T=" << T << ": " << a.reps << " reps in " << fmt(r.runtime_seconds) << " s\n";
    for (const auto& m : r.metrics) std::cout << "T=" << T << "  " << m.name << "  " << fmt(m.mean) << " (" << fmt(m.sd) << ")\n";
    reports.push_back(std::move(r));
  }
  const fs::path out(a.output);
  fs::path csv = out, json = out;
  if (out.extension() == ".json") csv.replace_extension(".csv");
  else if (out.extension() == ".csv") json.replace_extension(".json");
  else {
    csv += ".csv";
    json += ".json";
  }
  write_text(csv, reports_to_csv(reports));
  write_text(json, reports_to_json(reports).dump(1) + "\n");
  return kOk;
}

struct SmoothArgs {
  std::string input, output;
  std::vector<double> lambdas;
};

int run_smooth(const SmoothArgs& a) {
  std::vector<double> grid = a.lambdas;
  if (grid.empty())
    for (int k = -6; k <= 6; ++k) grid.push_back(std::pow(10.0, k));
  const FunctionalSeries series = read_curve_csv(a.input);
  const SmoothResult r = smooth_curves(series, grid);
  write_curve_csv(a.output, series.grid(), r.smoothed.values());
  std::cout << "knots: " << smoother_knots(series.points()) << "  lambda: " << fmt(r.lambda) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional time series: global FPCA plus local wavelet features"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  app.footer("Environment: FTSX_THREADS caps the worker count.\nExit codes: 0 ok, 2 input error, 3 precondition, 4 numeric failure.");

  ExtractArgs ea;
  auto* extract = app.add_subcommand("extract", "Extract global and local features from a curve file");
  extract->add_option("--input", ea.input, "Curve CSV (header = grid)")->required();
  extract->add_option("--mode", ea.mode, "Covariance operator")->check(CLI::IsMember({"dynamic", "static"}));
  extract->add_option("--j0", ea.j0, "Coarsest wavelet level")->check(CLI::NonNegativeNumber);
  extract->add_option("--output", ea.output, "Feature file (JSON)")->required();

  ForecastArgs fa;
  auto* forecast = app.add_subcommand("forecast", "Point and interval forecasts from a feature file");
  forecast->add_option("--features", fa.features, "Feature file from extract")->required();
  forecast->add_option("--input", fa.input, "The curve file the features came from")->required();
  forecast->add_option("--horizon", fa.horizon, "Steps ahead")->required();
  forecast->add_option("--coverage", fa.coverage, "Nominal interval coverage")->capture_default_str();
  forecast->add_option("--output", fa.output, "Point forecast CSV; _lower/_upper files are written next to it")
      ->required();

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo experiments");
  simulate->add_option("--experiment", sa.experiment, "1 reconstruction, 2 long-run covariance, 3 forecasting")
      ->required();
  simulate->add_option("--sizes", sa.sizes, "Sample sizes T, comma separated")->delimiter(',');
  simulate->add_option("--reps", sa.reps, "Replications per size")->capture_default_str();
  simulate->add_option("--seed", sa.seed, "Master seed")->capture_default_str();
  simulate->add_option("--mode", sa.mode, "Covariance operator (default static for 3, else dynamic)")
      ->check(CLI::IsMember({"dynamic", "static"}));
  simulate->add_option("--output", sa.output, "Report path; .csv and .json are both written")->required();

  SmoothArgs ma;
  auto* smooth = app.add_subcommand("smooth", "P-spline smoothing with GCV");
  smooth->add_option("--input", ma.input, "Curve CSV")->required();
  smooth->add_option("--lambda-grid", ma.lambdas, "Candidate penalties, comma separated (default 1e-6..1e6)")
      ->delimiter(',');
  smooth->add_option("--output", ma.output, "Smoothed curve CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    if (*extract) return run_extract(ea);
    if (*forecast) return run_forecast(fa);
    if (*simulate) return run_simulate(sa);
    if (*smooth) return run_smooth(ma);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return kPrecondition;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  }
  return kOk;
}
