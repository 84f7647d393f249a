#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ftsx/simulate.hpp"
#include "ftsx/wavelet.hpp"
#include "helpers.hpp"

using namespace ftsx;
using ftsx::testing::random_vector;

namespace {

// Dense analysis matrix for N = 2^J, built as a product of per-level
// periodized filter matrices.
Matrix dense_w(const WaveletBasis& b) {
  const int N = b.size();
  Matrix W = Matrix::Identity(N, N);
  const auto& lo = b.scaling_filter();
  const auto& hi = b.wavelet_filter();
  for (int m = N; m > (1 << b.coarsest_level()); m /= 2) {
    Matrix step = Matrix::Identity(N, N);
    step.topLeftCorner(m, m).setZero();
    for (int k = 0; k < m / 2; ++k)
      for (size_t i = 0; i < lo.size(); ++i) {
        step(k, (2 * k + static_cast<int>(i)) % m) += lo[i];
        step(m / 2 + k, (2 * k + static_cast<int>(i)) % m) += hi[i];
      }
    W = step * W;
  }
  return W;
}

NrsiMap identity_map(int J, const WaveletBasis& b) {
  const int N = 1 << J;
  std::vector<double> u(static_cast<size_t>(N));
  for (int i = 0; i < N; ++i) u[static_cast<size_t>(i)] = static_cast<double>(i + 1) / N;
  return build_nrsi(Grid(u), b);
}

bool keep_or_kill(const CoeffSet& in, const CoeffSet& out, int N) {
  const int L = block_length(N);
  if (in.approx() != out.approx()) return false;
  for (int j = in.coarsest_level(); j < in.depth(); ++j)
    for (int start = 0; start < (1 << j); start += L) {
      const int len = std::min(L, (1 << j) - start);
      const auto a = in.detail(j).segment(start, len);
      const auto c = out.detail(j).segment(start, len);
      if (!(c == a) && !c.isZero(0.0)) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("sym10 filter identities") {
  const auto b = WaveletBasis::sym10(6);
  const auto& h = b.scaling_filter();
  const auto& g = b.wavelet_filter();
  REQUIRE(h.size() == 20);
  CHECK(std::accumulate(h.begin(), h.end(), 0.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  for (int shift = 0; shift < 10; ++shift) {
    double hh = 0.0, hg = 0.0;
    for (size_t i = 0; i + 2 * shift < 20; ++i) {
      hh += h[i] * h[i + 2 * shift];
      hg += h[i] * g[i + 2 * shift];
    }
    CHECK(std::abs(hh - (shift == 0 ? 1.0 : 0.0)) < 1e-12);
    CHECK(std::abs(hg) < 1e-12);
  }
  // ten vanishing moments, scaled by 20^k for a fair tolerance
  for (int k = 0; k < 10; ++k) {
    double m = 0.0;
    for (size_t i = 0; i < 20; ++i) m += g[i] * std::pow(static_cast<double>(i) / 20.0, k);
    CHECK(std::abs(m) < 1e-9);
  }
}

TEST_CASE("basis and coefficient layout") {
  CHECK(WaveletBasis::depth_for(100) == 7);
  CHECK(WaveletBasis::depth_for(128) == 7);
  CHECK(WaveletBasis::depth_for(40) == 6);
  CHECK_THROWS_AS(WaveletBasis::sym10(3, 3), PreconditionError);
  CHECK_THROWS_AS(WaveletBasis({1.0, 2.0, 3.0}, 4, 1), InputError);
  const CoeffSet c(Vector::LinSpaced(64, 0, 63), 6, 3);
  CHECK(c.approx().size() == 8);
  CHECK(c.detail(3)[0] == 8);
  CHECK(c.detail(5)[31] == 63);
  CHECK_THROWS_AS(dwt(Vector::Zero(48), WaveletBasis::sym10(6)), InputError);
}

TEST_CASE("constant signal has no detail") {
  const auto b = WaveletBasis::sym10(8);
  const CoeffSet c = dwt(Vector::Constant(256, 3.0), b);
  CHECK(c.flat().tail(256 - 8).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((c.approx().array() - c.approx()[0]).abs().maxCoeff() < 1e-10);
}

TEST_CASE("round trip and Parseval") {
  std::mt19937_64 rng(1);
  for (int J : {6, 8, 10}) {
    const auto b = WaveletBasis::sym10(J);
    for (int rep = 0; rep < 20; ++rep) {
      const Vector x = random_vector(1 << J, rng);
      const CoeffSet c = dwt(x, b);
      CHECK((idwt(c, b) - x).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(std::abs(c.flat().squaredNorm() - x.squaredNorm()) < 1e-10 * x.squaredNorm());
    }
  }
}

TEST_CASE("dense W oracle at N = 64") {
  for (int j0 : {0, 3, 5}) {
    const auto b = WaveletBasis::sym10(6, j0);
    const Matrix W = dense_w(b);
    CHECK((W.transpose() * W - Matrix::Identity(64, 64)).cwiseAbs().maxCoeff() < 1e-12);
    for (int col = 0; col < 64; ++col) {
      Vector e = Vector::Zero(64);
      e[col] = 1.0;
      CHECK((dwt(e, b).flat() - W.col(col)).cwiseAbs().maxCoeff() < 1e-13);
      CHECK((idwt(CoeffSet(W.col(col), 6, j0), b) - e).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("NRSI mapping") {
  const auto b = WaveletBasis::sym10(3, 1);
  const NrsiMap m = build_nrsi(Grid({0.1, 0.5, 0.9}), b);
  CHECK(m.slot == std::vector<int>{0, 3, 6});  // 1-based {1, 4, 7}
  CHECK(m.v_diag.sum() == doctest::Approx(3.0));

  // clamping at both ends
  const NrsiMap edge = build_nrsi(Grid({0.0, 0.01, 1.0}), b);
  CHECK(edge.slot == std::vector<int>{0, 0, 7});

  CHECK_THROWS_AS(build_nrsi(Grid::uniform(9), b), PreconditionError);
}

TEST_CASE("identity NRSI equals the plain transform") {
  std::mt19937_64 rng(2);
  const auto b = WaveletBasis::sym10(7);
  const NrsiMap m = identity_map(7, b);
  CHECK(m.v_diag.isApproxToConstant(1.0, 1e-12));
  CHECK(m.v_diag.sum() == doctest::Approx(128.0));
  for (int rep = 0; rep < 10; ++rep) {
    const Vector x = random_vector(128, rng);
    CHECK((nrsi_forward(x, m, b).flat() - dwt(x, b).flat()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((nrsi_inverse(dwt(x, b), m, b) - x).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("NRSI forward on impulses matches W columns") {
  const auto b = WaveletBasis::sym10(6);
  const Matrix W = dense_w(b);
  const Grid g = Grid::uniform(40);
  const NrsiMap m = build_nrsi(g, b);
  CHECK(nrsi_forward(Vector::Zero(40), m, b).flat().isZero(0.0));
  for (int i = 0; i < 40; i += 7) {
    Vector e = Vector::Zero(40);
    e[i] = -2.5;
    CHECK((nrsi_forward(e, m, b).flat() - (-2.5) * W.col(m.slot[static_cast<size_t>(i)])).cwiseAbs().maxCoeff() <
          1e-13);
  }
  // v_diag is the diagonal of A^T A
  Matrix A(40, 64);
  for (int i = 0; i < 40; ++i) A.row(i) = W.col(m.slot[static_cast<size_t>(i)]).transpose();
  CHECK((m.v_diag - (A.transpose() * A).diagonal()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(m.v_diag.sum() == doctest::Approx(40.0));
}

TEST_CASE("median") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK_THROWS(median({}));
}

TEST_CASE("sigma estimate") {
  const auto b = WaveletBasis::sym10(4, 1);
  NrsiMap m{Grid::uniform(2), 16, {}, Vector::Zero(16)};
  Vector flat = Vector::Zero(16);
  const double fin[5] = {-1, 0, 1, 2, -2};
  for (int i = 0; i < 5; ++i) {
    flat[8 + i] = fin[i];
    m.v_diag[8 + i] = 1.0;
  }
  flat[14] = 100.0;  // v = 0 there, ignored
  CHECK(estimate_sigma(CoeffSet(flat, 4, 1), m) == doctest::Approx(1.4826).epsilon(1e-4));

  for (int i = 0; i < 5; ++i) flat[8 + i] = 0.7;
  CHECK(estimate_sigma(CoeffSet(flat, 4, 1), m) == 0.0);

  std::mt19937_64 rng(3);
  const auto big = WaveletBasis::sym10(12);
  const NrsiMap id = identity_map(12, big);
  for (double s : {0.1, 1.0, 30.0}) {
    const Vector x = random_vector(4096, rng, s);
    const double ratio = estimate_sigma(nrsi_forward(x, id, big), id) / s;
    CHECK(ratio > 0.9);
    CHECK(ratio < 1.1);
  }
}

TEST_CASE("block length") {
  CHECK(block_length(1024) == 4);
  CHECK(std::log2(std::log(1024.0)) == doctest::Approx(2.793).epsilon(1e-3));
  CHECK(block_length(2) == 1);
  CHECK(block_length(128) == 4);
  CHECK(block_length(1 << 20) == 8);
}

TEST_CASE("lambda star solves x - ln x = 3") {
  CHECK(std::abs(kLambdaStar - std::log(kLambdaStar) - 3.0) < 1e-3);
}

TEST_CASE("block threshold hand cases") {
  // N = 64, L = 4; level 3 holds blocks [8, 12) and [12, 16)
  Vector flat = Vector::Zero(64);
  flat.segment(8, 4) << 1, 2, 2, 1;          // energy 10
  flat.segment(12, 4) << 1, 1, 1, 0;         // energy 3
  flat.head(8).setConstant(0.25);            // approximation passes through
  const CoeffSet c(flat, 6, 3);
  const double sigma = std::sqrt(5.0 / (kLambdaStar * 4));  // threshold energy 5
  const CoeffSet out = block_threshold(c, sigma, 64);
  CHECK(out.flat().segment(8, 4) == flat.segment(8, 4));
  CHECK(out.flat().segment(12, 4).isZero(0.0));
  CHECK(out.approx() == c.approx());

  CHECK(block_threshold(c, 0.0, 64).flat() == flat);
  CHECK_THROWS_AS(block_threshold(c, -1.0, 64), PreconditionError);
}

TEST_CASE("block threshold is keep-or-kill and idempotent") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const int J = 5 + rep % 5;
    const int N = 1 << J;
    Vector flat = random_vector(N, rng);
    for (int i = 0; i < N; ++i)
      if (u(rng) < 0.3) flat[i] *= 10.0;
    const CoeffSet c(flat, J, 3);
    const double sigma = 2.0 * u(rng);
    const CoeffSet once = block_threshold(c, sigma, N);
    CHECK(keep_or_kill(c, once, N));
    CHECK(block_threshold(once, sigma, N).flat() == once.flat());
  }
}

TEST_CASE("local extraction basics") {
  const auto b = WaveletBasis::sym10(7);
  const NrsiMap m = build_nrsi(Grid::uniform(100), b);
  const auto z = extract_local(Vector::Zero(100), m, b);
  CHECK(z.coeffs.flat().isZero(0.0));
  CHECK(z.curve.isZero(0.0));

  const auto lm = local_matrix(FunctionalSeries(Grid::uniform(100), Matrix::Zero(5, 100)), m, b);
  CHECK(lm.coeffs.isZero(0.0));
  CHECK(lm.curves.values().isZero(0.0));
  CHECK(lm.sparsity == 1.0);
}

TEST_CASE("local extraction scales with amplitude") {
  std::mt19937_64 rng(5);
  const Grid g = Grid::uniform(100);
  const auto b = WaveletBasis::sym10(7);
  const NrsiMap m = build_nrsi(g, b);
  const Vector bump = bumps(g);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector e = 0.3 * bump + random_vector(100, rng, 0.2);
    const auto base = extract_local(e, m, b);
    for (double c : {0.5, 4.0}) {  // exact in floating point
      const auto scaled = extract_local(c * e, m, b);
      CHECK(scaled.coeffs.flat() == c * base.coeffs.flat());
      CHECK(scaled.sigma == c * base.sigma);
    }
    const auto odd = extract_local(3.7 * e, m, b);
    CHECK(((odd.coeffs.flat().array() == 0.0) == (base.coeffs.flat().array() == 0.0)).all());
    CHECK((odd.curve - 3.7 * base.curve).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + base.curve.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("pure noise is mostly removed") {
  std::mt19937_64 rng(6);
  const auto b = WaveletBasis::sym10(10);
  const NrsiMap m = identity_map(10, b);
  int quiet = 0;
  const int reps = 100;
  for (int rep = 0; rep < reps; ++rep) {
    const auto est = extract_local(random_vector(1024, rng), m, b);
    const double nonzero = static_cast<double>((est.coeffs.flat().tail(1024 - 8).array() != 0.0).count());
    if (nonzero / (1024 - 8) <= 0.05) ++quiet;
  }
  CHECK(quiet >= 0.9 * reps);
}

TEST_CASE("bumps denoising at SNR 7") {
  std::mt19937_64 rng(7);
  const auto b = WaveletBasis::sym10(11);
  const NrsiMap m = identity_map(11, b);
  const Vector clean = bumps(m.grid);
  const double sd = std::sqrt((clean.array() - clean.mean()).square().mean());
  for (int rep = 0; rep < 10; ++rep) {
    const Vector noisy = clean + random_vector(2048, rng, sd / 7.0);
    CHECK(ftsx::testing::correlation(extract_local(noisy, m, b).curve, clean) > 0.95);
  }
}

TEST_CASE("Experiment 1 residual coefficients are sparse") {
  for (int rep = 0; rep < 5; ++rep) {
    Rng rng(90, static_cast<std::uint64_t>(rep));
    const auto d = gen_exp1(100, 100, rng);
    const auto f = extract_global(d.observed, Mode::Dynamic);
    const auto b = WaveletBasis::sym10(WaveletBasis::depth_for(100));
    const auto lm = local_matrix(residuals(d.observed, f), build_nrsi(d.observed.grid(), b), b);
    CHECK(lm.sparsity > 0.5);
  }
}
