#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftsx/core.hpp"
#include "ftsx/fpca.hpp"
#include "ftsx/pipeline.hpp"
#include "ftsx/simulate.hpp"

namespace ftsx {

inline constexpr const char* kVersion = "0.1.0";

/// 17 significant digits, round-trip exact.
std::string format_double(double x);

/// CSV curve file: header row holds the grid, each later row one curve.
FunctionalSeries read_curve_csv(const std::filesystem::path& path);
FunctionalSeries parse_curve_csv(const std::string& text);
void write_curve_csv(const std::filesystem::path& path, const Grid& grid, const Matrix& rows);

/// Serialized extraction result.
struct FeatureFile {
  GlobalFeatures global{Grid::uniform(2), Mode::Dynamic, {}, {}, {}, {}, {}, std::nullopt};
  int depth = 0;           // J
  int coarsest_level = 3;  // j0
  Matrix coeffs;           // N x T, stored sparsely on disk
  std::vector<double> sigma;
  double sparsity = 0.0;
  std::uint64_t seed = 0;
  std::string version = kVersion;

  static FeatureFile from_extraction(const Extraction& ex);
  WaveletBasis basis() const;
  NrsiMap map() const;

  /// Global fit plus local curves, rebuilt from the stored fields.
  FunctionalSeries reconstruction() const;
};

nlohmann::json to_json(const FeatureFile& features);
FeatureFile feature_file_from_json(const nlohmann::json& doc);
void write_feature_file(const std::filesystem::path& path, const FeatureFile& features);
FeatureFile read_feature_file(const std::filesystem::path& path);

/// One summary row per (report, metric).
std::string reports_to_csv(const std::vector<MetricsReport>& reports);
/// Summaries plus per-replication values.
nlohmann::json reports_to_json(const std::vector<MetricsReport>& reports);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace ftsx
