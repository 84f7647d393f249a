#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ftsx/covariance.hpp"
#include "ftsx/forecast.hpp"
#include "ftsx/io.hpp"
#include "ftsx/pipeline.hpp"
#include "ftsx/simulate.hpp"
#include "ftsx/smooth.hpp"
#include "ftsx/wavelet.hpp"

namespace py = pybind11;
using namespace ftsx;

namespace {

Grid make_grid(const std::optional<std::vector<double>>& grid, int n) {
  return grid ? Grid(*grid) : Grid::uniform(n);
}

FunctionalSeries make_series(const Matrix& values, const std::optional<std::vector<double>>& grid) {
  return FunctionalSeries(make_grid(grid, static_cast<int>(values.cols())), values);
}

py::object bandwidth_dict(const std::optional<BandwidthReport>& b) {
  if (!b) return py::none();
  py::dict d;
  d["pilot_bandwidth"] = b->pilot_bandwidth;
  d["c0_hat"] = b->c0_hat;
  d["h_opt"] = b->h_opt;
  d["lags_used"] = b->lags_used;
  return d;
}

py::dict extract(const Matrix& values, const std::optional<std::vector<double>>& grid, const std::string& mode,
                 int j0) {
  const Extraction ex = extract_features(make_series(values, grid), parse_mode(mode), j0);
  py::dict d;
  d["grid"] = ex.global.grid.points();
  d["mean"] = ex.global.mean;
  d["eigenvalues"] = ex.global.eigenvalues;
  d["all_eigenvalues"] = ex.global.all_eigenvalues;
  d["eigenfunctions"] = ex.global.eigenfunctions;
  d["scores"] = ex.global.scores;
  d["k"] = ex.global.dimension();
  d["bandwidth"] = bandwidth_dict(ex.global.bandwidth);
  d["global_fit"] = ex.global_fit.values();
  d["local"] = ex.local.curves.values();
  d["coefficients"] = ex.local.coeffs;
  d["sigma"] = ex.local.sigma;
  d["sparsity"] = ex.local.sparsity;
  d["reconstruction"] = ex.combined().values();
  return d;
}

py::dict forecast(const Matrix& values, int horizon, const std::optional<std::vector<double>>& grid,
                  const std::string& mode, double coverage, int j0) {
  const FunctionalSeries series = make_series(values, grid);
  const Extraction ex = extract_features(series, parse_mode(mode), j0);
  const ForecastBundle b =
      calibrate_intervals(series, ex.global, ex.local.coeffs, ex.map, ex.basis, horizon, coverage);
  py::dict d;
  d["point"] = b.point;
  d["lower"] = b.lower ? py::cast(*b.lower) : py::none();
  d["upper"] = b.upper ? py::cast(*b.upper) : py::none();
  d["pi"] = b.pi;
  d["achieved_coverage"] = b.achieved_coverage;
  d["calibration_errors"] = b.calibration_errors;
  return d;
}

py::dict simulate(int experiment, int T, int reps, std::uint64_t seed, const std::optional<std::string>& mode,
                  int n_grid) {
  if (experiment < 1 || experiment > 3) throw InputError("experiment must be 1, 2 or 3");
  ExperimentConfig c;
  c.experiment = static_cast<Experiment>(experiment);
  c.T = T;
  c.reps = reps;
  c.seed = seed;
  c.n_grid = n_grid;
  c.mode = mode ? parse_mode(*mode) : (c.experiment == Experiment::Forecast ? Mode::Static : Mode::Dynamic);
  const MetricsReport r = run_experiment(c);
  py::dict metrics;
  for (const auto& m : r.metrics) {
    py::dict e;
    e["mean"] = m.mean;
    e["sd"] = m.sd;
    e["values"] = m.values;
    metrics[py::str(m.name)] = e;
  }
  py::dict d;
  d["metrics"] = metrics;
  d["csv"] = reports_to_csv({r});
  d["json"] = reports_to_json({r}).dump();
  return d;
}

std::pair<Matrix, py::object> lrcov(const Matrix& values, const std::optional<std::vector<double>>& grid) {
  auto [surface, band] = long_run_cov(make_series(values, grid));
  return {surface.values(), bandwidth_dict(band)};
}

py::dict smooth(const Matrix& values, const std::vector<double>& lambda_grid,
                const std::optional<std::vector<double>>& grid) {
  const SmoothResult r = smooth_curves(make_series(values, grid), lambda_grid);
  py::dict d;
  d["smoothed"] = r.smoothed.values();
  d["lambda"] = r.lambda;
  d["curve_lambda"] = r.curve_lambda;
  d["mean_gcv"] = r.mean_gcv;
  return d;
}

Vector dwt_flat(const Vector& signal, int j0) {
  const int N = static_cast<int>(signal.size());
  const int J = WaveletBasis::depth_for(N);
  if ((1 << J) != N) throw InputError("signal length must be a power of two");
  return dwt(signal, WaveletBasis::sym10(J, j0)).flat();
}

Vector idwt_flat(const Vector& flat, int j0) {
  const int N = static_cast<int>(flat.size());
  const int J = WaveletBasis::depth_for(N);
  if ((1 << J) != N) throw InputError("coefficient length must be a power of two");
  const WaveletBasis basis = WaveletBasis::sym10(J, j0);
  return idwt(CoeffSet(flat, J, j0), basis);
}

}  // namespace

PYBIND11_MODULE(_ftsx, m) {
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  using opt_grid = std::optional<std::vector<double>>;
  m.def("extract", &extract, py::arg("values"), py::arg("grid") = opt_grid{}, py::arg("mode") = "dynamic",
        py::arg("j0") = 3, "Global and local feature extraction for a T x n curve matrix.");
  m.def("forecast", &forecast, py::arg("values"), py::arg("horizon"), py::arg("grid") = opt_grid{},
        py::arg("mode") = "dynamic", py::arg("coverage") = 0.8, py::arg("j0") = 3,
        "Point forecasts with calibrated pointwise intervals.");
  m.def("simulate", &simulate, py::arg("experiment"), py::arg("T"), py::arg("reps") = 10, py::arg("seed") = 1,
        py::arg("mode") = std::optional<std::string>{}, py::arg("n_grid") = 0,
        "Monte Carlo replications of one simulation experiment.");
  m.def("long_run_cov", &lrcov, py::arg("values"), py::arg("grid") = opt_grid{},
        "Kernel long-run covariance surface and the plug-in bandwidth report.");
  m.def("smooth", &smooth, py::arg("values"), py::arg("lambda_grid"), py::arg("grid") = opt_grid{},
        "Penalized B-spline smoothing with a GCV-selected shared lambda.");
  m.def("dwt", &dwt_flat, py::arg("signal"), py::arg("j0") = 3, "Periodized sym10 transform of a dyadic signal.");
  m.def("idwt", &idwt_flat, py::arg("coefficients"), py::arg("j0") = 3, "Inverse of dwt.");
  m.def("select_k", &select_k, py::arg("eigenvalues"), py::arg("T"), "Eigenvalue-ratio dimension choice.");
}
