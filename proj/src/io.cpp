#include "ftsx/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ftsx {
namespace {

using nlohmann::json;

// RFC 4180 record splitter; quoted fields may contain commas and "".
std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty()) {
          record.push_back(std::move(field));
          records.push_back(std::move(record));
        }
        record.clear();
        field.clear();
        any = false;
        break;
      default:
        field += c;
        any = true;
    }
  }
  if (quoted) throw InputError("unterminated quoted CSV field");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

double parse_number(const std::string& raw, size_t row, size_t col) {
  std::string s = raw;
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
    throw InputError("row " + std::to_string(row + 1) + ", column " + std::to_string(col + 1) +
                     ": not a finite number: '" + raw + "'");
  return v;
}

json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix rows_matrix(const json& rows, Eigen::Index cols) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
  for (size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != cols) throw InputError("feature file: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<size_t>(c)].get<double>();
  }
  return m;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector json_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

FunctionalSeries parse_curve_csv(const std::string& text) {
  const auto records = split_csv(text);
  if (records.empty()) throw InputError("curve file is empty");
  const size_t n = records[0].size();
  std::vector<double> grid(n);
  for (size_t c = 0; c < n; ++c) grid[c] = parse_number(records[0][c], 0, c);
  if (records.size() < 2) throw InputError("curve file has a header but no curves");
  Matrix values(static_cast<Eigen::Index>(records.size() - 1), static_cast<Eigen::Index>(n));
  for (size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != n)
      throw InputError("row " + std::to_string(r + 1) + ": expected " + std::to_string(n) + " columns, found " +
                       std::to_string(records[r].size()));
    for (size_t c = 0; c < n; ++c)
      values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) = parse_number(records[r][c], r, c);
  }
  return FunctionalSeries(Grid(std::move(grid)), std::move(values));
}

FunctionalSeries read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_curve_csv(buf.str());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed for " + path.string());
}

void write_curve_csv(const std::filesystem::path& path, const Grid& grid, const Matrix& rows) {
  std::string text;
  for (int i = 0; i < grid.size(); ++i) text += (i ? "," : "") + format_double(grid[i]);
  text += '\n';
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) text += (c ? "," : "") + format_double(rows(r, c));
    text += '\n';
  }
  write_text(path, text);
}

FeatureFile FeatureFile::from_extraction(const Extraction& ex) {
  FeatureFile f;
  f.global = ex.global;
  f.depth = ex.basis.depth();
  f.coarsest_level = ex.basis.coarsest_level();
  f.coeffs = ex.local.coeffs;
  f.sigma = ex.local.sigma;
  f.sparsity = ex.local.sparsity;
  return f;
}

WaveletBasis FeatureFile::basis() const { return WaveletBasis::sym10(depth, coarsest_level); }

NrsiMap FeatureFile::map() const { return build_nrsi(global.grid, basis()); }

FunctionalSeries FeatureFile::reconstruction() const {
  const WaveletBasis b = basis();
  const NrsiMap m = build_nrsi(global.grid, b);
  Matrix values = reconstruct(global).values();
  for (Eigen::Index t = 0; t < coeffs.cols(); ++t) {
    const CoeffSet c(coeffs.col(t), b.depth(), b.coarsest_level());
    values.row(t) += nrsi_inverse(c, m, b).transpose();
  }
  return FunctionalSeries(global.grid, std::move(values));
}

json to_json(const FeatureFile& f) {
  const GlobalFeatures& g = f.global;
  json doc;
  doc["format"] = "ftsx-features";
  doc["metadata"] = {{"version", f.version}, {"mode", std::string(to_string(g.mode))}, {"seed", f.seed}};
  doc["grid"] = g.grid.points();
  doc["T"] = g.length();
  doc["K"] = g.dimension();
  doc["mean"] = vector_json(g.mean);
  doc["eigenvalues"] = vector_json(g.eigenvalues);
  doc["all_eigenvalues"] = vector_json(g.all_eigenvalues);
  doc["eigenfunctions"] = matrix_rows(g.eigenfunctions.transpose());  // one row per component
  doc["scores"] = matrix_rows(g.scores);
  if (g.bandwidth) {
    const auto& b = *g.bandwidth;
    doc["bandwidth"] = {{"pilot_bandwidth", b.pilot_bandwidth},
                        {"c0_hat", b.c0_hat},
                        {"h_opt", b.h_opt},
                        {"lags_used", b.lags_used}};
  } else {
    doc["bandwidth"] = nullptr;
  }

  json approx = json::array();
  json details = json::array();
  const int j0 = f.coarsest_level;
  for (Eigen::Index t = 0; t < f.coeffs.cols(); ++t) {
    for (int p = 0; p < (1 << j0); ++p)
      if (f.coeffs(p, t) != 0.0) approx.push_back({p, t, f.coeffs(p, t)});
    for (int j = j0; j < f.depth; ++j)
      for (int p = 0; p < (1 << j); ++p) {
        const double v = f.coeffs(CoeffSet::detail_offset(j) + p, t);
        if (v != 0.0) details.push_back({j, p, t, v});
      }
  }
  doc["wavelet"] = {{"filter", "sym10"},
                    {"J", f.depth},
                    {"j0", j0},
                    {"N", 1 << f.depth},
                    {"sigma", f.sigma},
                    {"sparsity", f.sparsity},
                    {"approx", std::move(approx)},     // [p, t, value]
                    {"details", std::move(details)}};  // [j, p, t, value]
  return doc;
}

FeatureFile feature_file_from_json(const json& doc) {
  try {
    if (doc.value("format", "") != "ftsx-features") throw InputError("not an ftsx feature file");
    FeatureFile f;
    GlobalFeatures& g = f.global;
    g.grid = Grid(doc.at("grid").get<std::vector<double>>());
    g.mode = parse_mode(doc.at("metadata").at("mode").get<std::string>());
    f.version = doc.at("metadata").value("version", "");
    f.seed = doc.at("metadata").value("seed", std::uint64_t{0});
    const int n = g.grid.size();
    const int T = doc.at("T").get<int>();
    const int K = doc.at("K").get<int>();
    g.mean = json_vector(doc.at("mean"));
    g.eigenvalues = json_vector(doc.at("eigenvalues"));
    g.all_eigenvalues = json_vector(doc.at("all_eigenvalues"));
    g.eigenfunctions = rows_matrix(doc.at("eigenfunctions"), n).transpose();
    g.scores = rows_matrix(doc.at("scores"), K);
    if (g.mean.size() != n || g.eigenfunctions.cols() != K || g.scores.rows() != T || g.eigenvalues.size() != K)
      throw InputError("feature file: inconsistent dimensions");
    if (!doc.at("bandwidth").is_null()) {
      const auto& b = doc.at("bandwidth");
      g.bandwidth = BandwidthReport{b.at("pilot_bandwidth").get<double>(), b.at("c0_hat").get<double>(),
                                    b.at("h_opt").get<double>(), b.at("lags_used").get<int>()};
    }
    const auto& w = doc.at("wavelet");
    f.depth = w.at("J").get<int>();
    f.coarsest_level = w.at("j0").get<int>();
    if (f.coarsest_level < 0 || f.coarsest_level >= f.depth || f.depth > 30) throw InputError("feature file: bad wavelet levels");
    const int N = 1 << f.depth;
    f.sigma = w.at("sigma").get<std::vector<double>>();
    f.sparsity = w.at("sparsity").get<double>();
    f.coeffs = Matrix::Zero(N, T);
    for (const auto& e : w.at("approx")) {
      const int p = e.at(0).get<int>();
      const int t = e.at(1).get<int>();
      if (p < 0 || p >= (1 << f.coarsest_level) || t < 0 || t >= T) throw InputError("feature file: approx index out of range");
      f.coeffs(p, t) = e.at(2).get<double>();
    }
    for (const auto& e : w.at("details")) {
      const int j = e.at(0).get<int>();
      const int p = e.at(1).get<int>();
      const int t = e.at(2).get<int>();
      if (j < f.coarsest_level || j >= f.depth || p < 0 || p >= (1 << j) || t < 0 || t >= T)
        throw InputError("feature file: detail index out of range");
      f.coeffs(CoeffSet::detail_offset(j) + p, t) = e.at(3).get<double>();
    }
    return f;
  } catch (const json::exception& e) {
    throw InputError(std::string("feature file: ") + e.what());
  }
}

void write_feature_file(const std::filesystem::path& path, const FeatureFile& features) {
  write_text(path, to_json(features).dump(1) + "\n");
}

FeatureFile read_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return feature_file_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw InputError(std::string("feature file is not valid JSON: ") + e.what());
  }
}

std::string reports_to_csv(const std::vector<MetricsReport>& reports) {
  std::string text = "experiment,mode,T,n_grid,reps,seed,metric,mean,sd\n";
  for (const auto& r : reports) {
    const auto& c = r.config;
    for (const auto& m : r.metrics) {
      text += to_string(c.experiment) + "," + std::string(to_string(c.mode)) + "," + std::to_string(c.T) + "," +
              std::to_string(c.grid_points()) + "," + std::to_string(c.reps) + "," + std::to_string(c.seed) + "," +
              m.name + "," + format_double(m.mean) + "," + format_double(m.sd) + "\n";
    }
  }
  return text;
}

json reports_to_json(const std::vector<MetricsReport>& reports) {
  json out = json::array();
  for (const auto& r : reports) {
    const auto& c = r.config;
    json metrics = json::object();
    for (const auto& m : r.metrics) metrics[m.name] = {{"mean", m.mean}, {"sd", m.sd}, {"values", m.values}};
    out.push_back({{"experiment", to_string(c.experiment)},
                   {"mode", std::string(to_string(c.mode))},
                   {"T", c.T},
                   {"n_grid", c.grid_points()},
                   {"reps", c.reps},
                   {"seed", c.seed},
                   {"j0", c.j0},
                   {"metrics", std::move(metrics)}});
  }
  return {{"format", "ftsx-metrics"},
          {"version", kVersion},
          {"qs_kernel_integral", qs_kernel_integral()},
          {"qs_kernel_square_integral", qs_kernel_square_integral()},
          {"reports", std::move(out)}};
}

}  // namespace ftsx
