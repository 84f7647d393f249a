#pragma once

#include <optional>
#include <string_view>

#include "ftsx/core.hpp"
#include "ftsx/covariance.hpp"

namespace ftsx {

enum class Mode { Dynamic, Static };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

/// Eigenpairs of a surface viewed as an integral operator on the grid.
struct EigenSystem {
  Grid grid;
  Vector eigenvalues;      // nonincreasing, negatives clipped to 0
  Vector raw_eigenvalues;  // before clipping
  Matrix eigenfunctions;   // n x m, column k is L2-normalized
};

struct GlobalFeatures {
  Grid grid;
  Mode mode = Mode::Dynamic;
  Vector mean;
  Matrix eigenfunctions;  // n x K
  Vector eigenvalues;     // length K
  Matrix scores;          // T x K
  Vector all_eigenvalues; // full clipped spectrum, for reporting
  std::optional<BandwidthReport> bandwidth;

  int dimension() const { return static_cast<int>(eigenfunctions.cols()); }
  int length() const { return static_cast<int>(scores.rows()); }
};

/// Discretized operator eigenproblem: eigenpairs of Q^{1/2} C Q^{1/2} with
/// Q = diag(quad_weights), eigenfunctions mapped back by Q^{-1/2}. Each
/// eigenfunction has its largest-magnitude entry positive.
EigenSystem eigendecompose(const CovSurface& surface);

/// Eigenvalue-ratio dimension selector with the relative-magnitude guard
/// tau = 1 / ln(max(lambda_1, T)).
int select_k(const Vector& eigenvalues, int T);

/// Largest admissible k for select_k.
int select_k_max(const Vector& eigenvalues, int T);

GlobalFeatures extract_global(const FunctionalSeries& series, Mode mode);

/// Scores of arbitrary curves on the stored eigenfunctions.
Matrix project_scores(const FunctionalSeries& series, const GlobalFeatures& features);

FunctionalSeries reconstruct(const GlobalFeatures& features);
FunctionalSeries residuals(const FunctionalSeries& series, const GlobalFeatures& features);

}  // namespace ftsx
