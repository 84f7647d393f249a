#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ftsx/covariance.hpp"
#include "ftsx/fpca.hpp"
#include "ftsx/simulate.hpp"
#include "helpers.hpp"

using namespace ftsx;
using ftsx::testing::far_series;
using ftsx::testing::on_grid;
using std::numbers::pi;

namespace {

Matrix outer(const Vector& a, const Vector& b) { return a * b.transpose(); }

Vector unit(const Vector& f, const Grid& g) { return f / l2_norm(f, g); }

}  // namespace

TEST_CASE("mode parsing") {
  CHECK(parse_mode("dynamic") == Mode::Dynamic);
  CHECK(parse_mode("static") == Mode::Static);
  CHECK(to_string(Mode::Static) == "static");
  CHECK_THROWS_AS(parse_mode("Dynamic!"), InputError);
}

TEST_CASE("rank-1 Mercer recovery") {
  const Grid g = Grid::uniform(81);
  const Vector phi = unit(on_grid(g, [](double u) { return 1.0 + u * u; }), g);
  const auto eig = eigendecompose(CovSurface(g, outer(phi, phi)));
  CHECK(eig.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(eig.eigenvalues[1]) < 1e-10);
  CHECK((eig.eigenfunctions.col(0) - phi).cwiseAbs().maxCoeff() < 1e-8);  // sign fixed positive
}

TEST_CASE("diagonal-in-basis surface") {
  const Grid g = Grid::uniform(101);
  const auto b = gram_schmidt({on_grid(g, [](double u) { return std::sin(pi * u); }),
                               on_grid(g, [](double u) { return std::cos(pi * u); })},
                              g);
  const auto eig = eigendecompose(CovSurface(g, outer(b[0], b[0]) * 1.0 + outer(b[1], b[1]) * 2.0));
  CHECK(eig.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(eig.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(std::abs(inner(eig.eigenfunctions.col(0), b[1], g)) - 1.0) < 1e-9);
}

TEST_CASE("orthonormality, trace identity, sign convention") {
  std::mt19937_64 rng(4);
  const Grid g({0.0, 0.05, 0.11, 0.2, 0.26, 0.4, 0.47, 0.55, 0.7, 0.72, 0.85, 0.93, 1.0});
  for (int rep = 0; rep < 50; ++rep) {
    const FunctionalSeries s(g, ftsx::testing::random_matrix(30, g.size(), rng));
    const CovSurface c = static_cov(s);
    const auto eig = eigendecompose(c);
    const Matrix& f = eig.eigenfunctions;
    for (int j = 0; j < f.cols(); ++j) {
      for (int k = 0; k < f.cols(); ++k)
        CHECK(std::abs(inner(Vector(f.col(j)), Vector(f.col(k)), g) - (j == k)) < 1e-8);
      Eigen::Index at;
      f.col(j).cwiseAbs().maxCoeff(&at);
      CHECK(f(at, j) > 0.0);
    }
    const double tr = surface_trace(c.values(), g);
    CHECK(std::abs(eig.raw_eigenvalues.sum() - tr) < 1e-6 * tr);
    for (int k = 1; k < eig.eigenvalues.size(); ++k) CHECK(eig.eigenvalues[k] <= eig.eigenvalues[k - 1]);
    CHECK(eig.eigenvalues.minCoeff() >= 0.0);
  }
}

TEST_CASE("asymmetric surface rejected") {
  Matrix m = Matrix::Identity(3, 3);
  m(0, 2) = 0.5;
  CHECK_THROWS_AS(eigendecompose(CovSurface(Grid::uniform(3), m)), PreconditionError);
}

TEST_CASE("select_k hand examples") {
  Vector l(4);
  l << 10, 5, 0.01, 0.005;
  CHECK(1.0 / std::log(100.0) == doctest::Approx(0.217).epsilon(1e-3));
  CHECK(select_k(l, 100) == 2);
  Vector two(2);
  two << 1, 1e-9;
  CHECK(select_k(two, 100) == 1);
  // guard: a tiny second eigenvalue with a tiny third should not be chosen
  Vector g(4);
  g << 100, 1, 0.001, 0.0;
  CHECK(select_k(g, 50) == 1);
  CHECK_THROWS_AS(select_k(Vector::Ones(1), 10), PreconditionError);
  Vector up(3);
  up << 1, 2, 0.5;
  CHECK_THROWS_AS(select_k(up, 10), PreconditionError);
  CHECK_THROWS_AS(select_k(Vector::Zero(3), 10), NumericError);
}

TEST_CASE("select_k scale invariance below T") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 300; ++rep) {
    Vector l(8);
    for (int i = 0; i < 8; ++i) l[i] = std::pow(10.0, -4 * u(rng));
    std::sort(l.data(), l.data() + 8, std::greater<>());
    const double c = 0.01 + 50 * u(rng);
    CHECK(select_k(l, 60) == select_k(Vector(c * l), 60));
  }
}

TEST_CASE("select_k planted ladders") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int K = 1 + rep % 5;
    Vector l(20);
    double v = 10.0 + 20.0 * u(rng);
    for (int k = 0; k < K; ++k) l[k] = v, v *= 0.75 + 0.2 * u(rng);
    double tail = l[K - 1] / (100.0 + 900.0 * u(rng));
    for (int k = K; k < 20; ++k) l[k] = tail, tail *= 0.6 + 0.3 * u(rng);
    CHECK(select_k(l, 100) == K);
  }
}

TEST_CASE("noiseless rank-1 series") {
  const Grid g = Grid::uniform(50);
  const Vector mu = on_grid(g, [](double u) { return u; });
  const Vector phi = unit(on_grid(g, [](double u) { return std::cos(2 * pi * u) + 0.2; }), g);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z;
  Matrix x(40, 50);
  double b = 0;
  for (int t = 0; t < 40; ++t) {
    b = 0.5 * b + z(rng);
    x.row(t) = (mu + b * phi).transpose();
  }
  const FunctionalSeries s(g, x);
  for (Mode mode : {Mode::Dynamic, Mode::Static}) {
    const auto f = extract_global(s, mode);
    CHECK(f.dimension() == 1);
    const auto rec = reconstruct(f);
    CHECK((rec.values() - x).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(residuals(s, f).values().cwiseAbs().maxCoeff() < 1e-6);
    CHECK(f.bandwidth.has_value() == (mode == Mode::Dynamic));
  }
}

TEST_CASE("scores, residuals and reconstruction") {
  std::mt19937_64 rng(10);
  const auto s = far_series(60, 30, 0.6, rng, 0.3);
  const auto f = extract_global(s, Mode::Dynamic);
  const Grid& g = s.grid();
  for (int t = 0; t < s.length(); ++t)
    for (int k = 0; k < f.dimension(); ++k) {
      const Vector c = s.curve(t) - f.mean;
      CHECK(std::abs(inner(c, Vector(f.eigenfunctions.col(k)), g) - f.scores(t, k)) < 1e-10);
    }
  CHECK((project_scores(s, f) - f.scores).cwiseAbs().maxCoeff() < 1e-12);

  const auto rec = reconstruct(f);
  const auto res = residuals(s, f);
  CHECK((rec.values() + res.values() - s.values()).cwiseAbs().maxCoeff() < 1e-12);
  for (int t = 0; t < s.length(); ++t)
    for (int k = 0; k < f.dimension(); ++k)
      CHECK(std::abs(inner(res.curve(t), Vector(f.eigenfunctions.col(k)), g)) < 1e-8);

  const Matrix centered = rec.values().rowwise() - f.mean.transpose();
  Eigen::JacobiSVD<Matrix> svd(centered);
  svd.setThreshold(1e-10);
  CHECK(svd.rank() <= f.dimension());

  GlobalFeatures zero = f;
  zero.scores.setZero();
  const auto flat = reconstruct(zero);
  for (int t = 0; t < flat.length(); ++t) CHECK((flat.curve(t) - f.mean).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("variance capture is monotone in the number of components") {
  std::mt19937_64 rng(13);
  const auto s = far_series(50, 25, 0.4, rng, 0.4);
  const auto eig = eigendecompose(static_cov(s));
  const auto c = center(s);
  double previous = 0.0;
  for (int k = 1; k <= 6; ++k) {
    double total = 0.0;
    for (int t = 0; t < s.length(); ++t)
      for (int j = 0; j < k; ++j) {
        const double sc = inner(c.centered.curve(t), Vector(eig.eigenfunctions.col(j)), s.grid());
        total += sc * sc;
      }
    CHECK(total >= previous);
    previous = total;
  }
}

TEST_CASE("dynamic mode needs T >= 4") {
  std::mt19937_64 rng(1);
  const auto s = far_series(3, 10, 0.5, rng);
  CHECK_THROWS_AS(extract_global(s, Mode::Dynamic), PreconditionError);
  CHECK_NOTHROW(extract_global(s, Mode::Static));
}

TEST_CASE("Experiment 1 data: one global component, residuals carry the bumps") {
  int k1 = 0;
  double corr_sum = 0.0;
  const int reps = 30;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(77, static_cast<std::uint64_t>(rep));
    const auto d = gen_exp1(100, 100, rng);
    const auto f = extract_global(d.observed, Mode::Dynamic);
    if (f.dimension() == 1) ++k1;
    const Matrix r = residuals(d.observed, f).values();
    const Matrix& z = d.local.values();
    corr_sum += ftsx::testing::correlation(Eigen::Map<const Vector>(r.data(), r.size()),
                                           Eigen::Map<const Vector>(z.data(), z.size()));
  }
  CHECK(k1 >= 0.9 * reps);
  CHECK(corr_sum / reps > 0.9);
}

TEST_CASE("Experiment 2 data: K_hat = 1") {
  int k1 = 0;
  const int reps = 20;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(78, static_cast<std::uint64_t>(rep));
    const auto d = gen_exp2(200, 40, rng);
    if (extract_global(d.observed, Mode::Dynamic).dimension() == 1) ++k1;
  }
  CHECK(k1 >= 0.95 * reps);
}
