#pragma once

#include <utility>
#include <vector>

#include "ftsx/core.hpp"

namespace ftsx {

/// Block-threshold constant: the root of x - ln x - 3 = 0.
inline constexpr double kLambdaStar = 4.5052;

/// Periodized orthogonal wavelet basis on N = 2^J dyadic points.
class WaveletBasis {
 public:
  WaveletBasis(std::vector<double> scaling_filter, int J, int j0);

  /// Daubechies least-asymmetric, 10 vanishing moments (20 taps).
  static WaveletBasis sym10(int J, int j0 = 3);

  /// Smallest J with 2^J >= n.
  static int depth_for(int n);

  const std::vector<double>& scaling_filter() const { return lo_; }
  const std::vector<double>& wavelet_filter() const { return hi_; }
  int depth() const { return J_; }
  int coarsest_level() const { return j0_; }
  int size() const { return 1 << J_; }

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
  int J_;
  int j0_;
};

/// Flat coefficient vector of length N: 2^j0 approximation coefficients, then
/// detail level j in [j0, J) occupying [2^j, 2^{j+1}).
class CoeffSet {
 public:
  CoeffSet(Vector flat, int J, int j0);

  const Vector& flat() const { return flat_; }
  Vector& flat() { return flat_; }
  int depth() const { return J_; }
  int coarsest_level() const { return j0_; }
  int size() const { return static_cast<int>(flat_.size()); }

  auto approx() const { return flat_.head(1 << j0_); }
  auto detail(int j) const { return flat_.segment(detail_offset(j), 1 << j); }
  static int detail_offset(int j) { return 1 << j; }

 private:
  Vector flat_;
  int J_;
  int j0_;
};

CoeffSet dwt(const Vector& signal, const WaveletBasis& basis);
Vector idwt(const CoeffSet& coeffs, const WaveletBasis& basis);

/// Nearest-dyadic-slot mapping of grid points onto N = 2^J positions.
struct NrsiMap {
  Grid grid;
  int N = 0;
  std::vector<int> slot;  // 0-based dyadic index per grid point
  Vector v_diag;          // diag(A^T A), one entry per coefficient
};

/// Point u is assigned to the 1-based slot round(u N) clamped to [1, N].
NrsiMap build_nrsi(const Grid& grid, const WaveletBasis& basis);

/// Scatter into a length-N vector (collisions summed).
Vector scatter(const Vector& residual, const NrsiMap& map);
/// Read the mapped slots of a length-N vector.
Vector gather(const Vector& dyadic, const NrsiMap& map);

/// A^T e.
CoeffSet nrsi_forward(const Vector& residual, const NrsiMap& map, const WaveletBasis& basis);
/// A D.
Vector nrsi_inverse(const CoeffSet& coeffs, const NrsiMap& map, const WaveletBasis& basis);

/// MAD/0.6745 over the finest-level coefficients with v > 1e-4, each divided
/// by sqrt(v).
double estimate_sigma(const CoeffSet& coeffs, const NrsiMap& map);

double median(std::vector<double> values);

/// L = 2^{floor(log2(ln N))}, at least 1.
int block_length(int N);

/// Keep-or-kill block thresholding of the detail levels. Energies are taken
/// on the L2([0,1]) coefficient scale D / sqrt(N), so a block of length m is
/// kept iff sum(D^2) / N > lambda* m sigma^2 / N. Approximation coefficients
/// pass through.
CoeffSet block_threshold(const CoeffSet& coeffs, double sigma, int N);

struct LocalEstimate {
  CoeffSet coeffs;  // final thresholded coefficients
  Vector curve;     // local feature on the observation grid
  double sigma = 0.0;
};

/// Two-round block thresholding of one residual curve.
LocalEstimate extract_local(const Vector& residual, const NrsiMap& map, const WaveletBasis& basis);

struct LocalMatrix {
  Matrix coeffs;             // N x T
  FunctionalSeries curves;   // T x n local features
  std::vector<double> sigma; // per curve
  double sparsity = 0.0;     // fraction of exact zeros in coeffs
};

LocalMatrix local_matrix(const FunctionalSeries& residual_series, const NrsiMap& map, const WaveletBasis& basis);

}  // namespace ftsx
