#include "ftsx/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ftsx {
namespace {

// Least-asymmetric Daubechies scaling filter, 10 vanishing moments.
const std::vector<double> kSym10 = {
    -0.0004593294210046588, 5.7036083618494284e-05, 0.004593173585311828,  -0.0008043589320165449,
    -0.02035493981231129,   0.005764912033581909,   0.04999497207737669,   -0.0319900568824278,
    -0.03553674047381755,   0.38382676106708546,    0.7695100370211071,    0.47169066693843925,
    -0.07088053578324385,   -0.15949427888491757,   0.011609893903711381,  0.0459272392310922,
    -0.0014653825813050513, -0.008641299277022422,  9.563267072289475e-05, 0.0007701598091144901,
};

bool is_power_of_two(Eigen::Index n) { return n >= 1 && (n & (n - 1)) == 0; }

int log2_exact(Eigen::Index n) {
  int J = 0;
  while ((Eigen::Index{1} << J) < n) ++J;
  return J;
}

// One analysis step on data[0, m): smooth part to [0, m/2), detail to [m/2, m).
void analysis_step(Vector& data, int m, const std::vector<double>& lo, const std::vector<double>& hi, Vector& scratch) {
  const int half = m / 2;
  const int taps = static_cast<int>(lo.size());
  for (int k = 0; k < half; ++k) {
    double s = 0.0;
    double d = 0.0;
    for (int i = 0; i < taps; ++i) {
      const double x = data[(2 * k + i) % m];
      s += lo[static_cast<size_t>(i)] * x;
      d += hi[static_cast<size_t>(i)] * x;
    }
    scratch[k] = s;
    scratch[half + k] = d;
  }
  data.head(m) = scratch.head(m);
}

void synthesis_step(Vector& data, int m, const std::vector<double>& lo, const std::vector<double>& hi, Vector& scratch) {
  const int half = m / 2;
  const int taps = static_cast<int>(lo.size());
  scratch.head(m).setZero();
  for (int k = 0; k < half; ++k) {
    const double s = data[k];
    const double d = data[half + k];
    for (int i = 0; i < taps; ++i)
      scratch[(2 * k + i) % m] += lo[static_cast<size_t>(i)] * s + hi[static_cast<size_t>(i)] * d;
  }
  data.head(m) = scratch.head(m);
}

}  // namespace

WaveletBasis::WaveletBasis(std::vector<double> scaling_filter, int J, int j0)
    : lo_(std::move(scaling_filter)), J_(J), j0_(j0) {
  if (lo_.size() < 2 || lo_.size() % 2 != 0) throw InputError("wavelet filter needs an even number of taps");
  if (j0 < 0 || j0 >= J) throw PreconditionError("wavelet levels need 0 <= j0 < J (j0=" + std::to_string(j0) +
                                                 ", J=" + std::to_string(J) + ")");
  if (J > 30) throw PreconditionError("wavelet depth too large");
  const auto L = lo_.size();
  hi_.resize(L);
  for (size_t i = 0; i < L; ++i) hi_[i] = ((i % 2 == 0) ? 1.0 : -1.0) * lo_[L - 1 - i];
}

WaveletBasis WaveletBasis::sym10(int J, int j0) { return WaveletBasis(kSym10, J, j0); }

int WaveletBasis::depth_for(int n) { return log2_exact(std::max(n, 2)); }

CoeffSet::CoeffSet(Vector flat, int J, int j0) : flat_(std::move(flat)), J_(J), j0_(j0) {
  if (flat_.size() != (Eigen::Index{1} << J)) throw InputError("coefficient vector length must be 2^J");
  if (j0 < 0 || j0 >= J) throw PreconditionError("coefficient levels need 0 <= j0 < J");
}

CoeffSet dwt(const Vector& signal, const WaveletBasis& basis) {
  if (!is_power_of_two(signal.size()) || signal.size() < 2)
    throw InputError("dwt: signal length " + std::to_string(signal.size()) + " is not a power of two");
  if (signal.size() != basis.size()) throw InputError("dwt: signal length does not match basis size 2^J");
  Vector data = signal;
  Vector scratch(signal.size());
  for (int m = basis.size(); m > (1 << basis.coarsest_level()); m /= 2)
    analysis_step(data, m, basis.scaling_filter(), basis.wavelet_filter(), scratch);
  return CoeffSet(std::move(data), basis.depth(), basis.coarsest_level());
}

Vector idwt(const CoeffSet& coeffs, const WaveletBasis& basis) {
  if (coeffs.size() != basis.size() || coeffs.coarsest_level() != basis.coarsest_level())
    throw InputError("idwt: coefficient layout does not match basis");
  Vector data = coeffs.flat();
  Vector scratch(data.size());
  for (int m = 2 << basis.coarsest_level(); m <= basis.size(); m *= 2)
    synthesis_step(data, m, basis.scaling_filter(), basis.wavelet_filter(), scratch);
  return data;
}

NrsiMap build_nrsi(const Grid& grid, const WaveletBasis& basis) {
  const int N = basis.size();
  if (N < grid.size())
    throw PreconditionError("build_nrsi: dyadic size " + std::to_string(N) + " is below grid size " +
                            std::to_string(grid.size()));
  NrsiMap map{grid, N, std::vector<int>(static_cast<size_t>(grid.size())), Vector::Zero(N)};
  Vector unit = Vector::Zero(N);
  for (int i = 0; i < grid.size(); ++i) {
    const auto slot = static_cast<int>(std::clamp(std::lround(grid[i] * N), 1L, static_cast<long>(N)));
    map.slot[static_cast<size_t>(i)] = slot - 1;
    // Row i of A is row slot of W^T, i.e. the transform of a unit impulse.
    unit.setZero();
    unit[slot - 1] = 1.0;
    map.v_diag += dwt(unit, basis).flat().cwiseAbs2();
  }
  return map;
}

Vector scatter(const Vector& residual, const NrsiMap& map) {
  if (residual.size() != map.grid.size()) throw InputError("scatter: residual length does not match grid");
  Vector dyadic = Vector::Zero(map.N);
  for (size_t i = 0; i < map.slot.size(); ++i) dyadic[map.slot[i]] += residual[static_cast<Eigen::Index>(i)];
  return dyadic;
}

Vector gather(const Vector& dyadic, const NrsiMap& map) {
  if (dyadic.size() != map.N) throw InputError("gather: vector length does not match map");
  Vector out(map.grid.size());
  for (size_t i = 0; i < map.slot.size(); ++i) out[static_cast<Eigen::Index>(i)] = dyadic[map.slot[i]];
  return out;
}

CoeffSet nrsi_forward(const Vector& residual, const NrsiMap& map, const WaveletBasis& basis) {
  return dwt(scatter(residual, map), basis);
}

Vector nrsi_inverse(const CoeffSet& coeffs, const NrsiMap& map, const WaveletBasis& basis) {
  return gather(idwt(coeffs, basis), map);
}

double median(std::vector<double> values) {
  if (values.empty()) throw PreconditionError("median of empty set");
  const size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double estimate_sigma(const CoeffSet& coeffs, const NrsiMap& map) {
  const int J = coeffs.depth();
  const int offset = CoeffSet::detail_offset(J - 1);
  std::vector<double> scaled;
  for (int p = 0; p < (1 << (J - 1)); ++p) {
    const double v = map.v_diag[offset + p];
    if (v > 1e-4) scaled.push_back(coeffs.flat()[offset + p] / std::sqrt(v));
  }
  if (scaled.size() < 2) throw NumericError("estimate_sigma: fewer than two usable finest-level coefficients");
  const double centre = median(scaled);
  for (double& x : scaled) x = std::abs(x - centre);
  return median(std::move(scaled)) / 0.6745;
}

int block_length(int N) {
  const double e = std::floor(std::log2(std::log(static_cast<double>(N))));
  return e < 0.0 ? 1 : (1 << static_cast<int>(e));
}

CoeffSet block_threshold(const CoeffSet& coeffs, double sigma, int N) {
  if (!(sigma >= 0.0)) throw PreconditionError("block_threshold: sigma must be nonnegative");
  const int L = block_length(N);
  Vector out = coeffs.flat();
  const double sigma2 = sigma * sigma;
  for (int j = coeffs.coarsest_level(); j < coeffs.depth(); ++j) {
    const int offset = CoeffSet::detail_offset(j);
    const int count = 1 << j;
    for (int start = 0; start < count; start += L) {
      const int len = std::min(L, count - start);
      const double energy = out.segment(offset + start, len).squaredNorm() / N;
      const double threshold = kLambdaStar * len * sigma2 / N;
      if (!(energy > threshold)) out.segment(offset + start, len).setZero();
    }
  }
  return CoeffSet(std::move(out), coeffs.depth(), coeffs.coarsest_level());
}

LocalEstimate extract_local(const Vector& residual, const NrsiMap& map, const WaveletBasis& basis) {
  const CoeffSet first = nrsi_forward(residual, map, basis);
  const double sigma = estimate_sigma(first, map);
  const CoeffSet kept = block_threshold(first, sigma, map.N);

  const Vector remainder = residual - nrsi_inverse(kept, map, basis);
  CoeffSet second = nrsi_forward(remainder, map, basis);
  second.flat() += kept.flat();
  CoeffSet final_coeffs = block_threshold(second, sigma, map.N);
  Vector curve = nrsi_inverse(final_coeffs, map, basis);
  return {std::move(final_coeffs), std::move(curve), sigma};
}

LocalMatrix local_matrix(const FunctionalSeries& residual_series, const NrsiMap& map, const WaveletBasis& basis) {
  if (!(residual_series.grid() == map.grid)) throw InputError("local_matrix: residual grid differs from map grid");
  const int T = residual_series.length();
  Matrix coeffs(map.N, T);
  Matrix curves(T, map.grid.size());
  std::vector<double> sigma(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) {
    LocalEstimate est = extract_local(residual_series.curve(t), map, basis);
    coeffs.col(t) = est.coeffs.flat();
    curves.row(t) = est.curve.transpose();
    sigma[static_cast<size_t>(t)] = est.sigma;
  }
  const double zeros = static_cast<double>((coeffs.array() == 0.0).count());
  const double sparsity = zeros / static_cast<double>(coeffs.size());
  return {std::move(coeffs), FunctionalSeries(map.grid, std::move(curves)), std::move(sigma), sparsity};
}

}  // namespace ftsx
