#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ftsx/core.hpp"
#include "helpers.hpp"

using namespace ftsx;
using ftsx::testing::on_grid;
using std::numbers::pi;

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid({0.0}), InputError);
  CHECK_THROWS_AS(Grid({0.0, 0.5, 0.5}), InputError);
  CHECK_THROWS_AS(Grid({0.0, 1.5}), InputError);
  CHECK_THROWS_AS(Grid({-0.1, 1.0}), InputError);
  CHECK_THROWS_AS(Grid({0.0, NAN}), InputError);
  const Grid g = Grid::uniform(5);
  CHECK(g[2] == doctest::Approx(0.5));
  CHECK(g.last() == 1.0);
}

TEST_CASE("series validation") {
  const Grid g = Grid::uniform(3);
  CHECK_THROWS_AS(FunctionalSeries(g, Matrix::Zero(2, 4)), InputError);
  Matrix bad = Matrix::Zero(2, 3);
  bad(1, 1) = INFINITY;
  CHECK_THROWS_AS(FunctionalSeries(g, bad), InputError);
  CHECK_THROWS_AS(CovSurface(g, Matrix::Zero(3, 2)), InputError);
}

TEST_CASE("trapezoid weights") {
  auto w = quad_weights(Grid({0.0, 0.5, 1.0}));
  CHECK(w[0] == doctest::Approx(0.25));
  CHECK(w[1] == doctest::Approx(0.5));
  CHECK(w[2] == doctest::Approx(0.25));

  w = quad_weights(Grid({0.0, 1.0}));
  CHECK(w[0] == doctest::Approx(0.5));
  CHECK(w[1] == doctest::Approx(0.5));

  w = quad_weights(Grid({0.0, 0.25, 1.0}));
  CHECK(w[0] == doctest::Approx(0.125));
  CHECK(w[1] == doctest::Approx(0.5));
  CHECK(w[2] == doctest::Approx(0.375));
}

TEST_CASE("equal grid weights: interior equal, endpoints half") {
  for (int n : {3, 10, 101}) {
    const Vector w = quad_weights(Grid::uniform(n));
    const double h = 1.0 / (n - 1);
    for (int i = 1; i + 1 < n; ++i) CHECK(w[i] == doctest::Approx(h).epsilon(1e-14));
    CHECK(w[0] == doctest::Approx(h / 2));
    CHECK(w[n - 1] == doctest::Approx(h / 2));
    CHECK(w.sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("inner products") {
  const Grid g3 = Grid::uniform(7);
  const Vector one = Vector::Ones(7);
  CHECK(inner(one, one, g3) == doctest::Approx(1.0));

  const Grid g = Grid::uniform(1001);
  const Vector s1 = on_grid(g, [](double u) { return std::sin(pi * u); });
  const Vector s2 = on_grid(g, [](double u) { return std::sin(2 * pi * u); });
  CHECK(std::abs(inner(s1, s2, g)) < 1e-4);
  const Vector r = std::sqrt(2.0) * s1;
  CHECK(std::abs(inner(r, r, g) - 1.0) < 1e-4);
  CHECK(l2_norm(r, g) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("inner(f,f) nonnegative, zero only for zero curve") {
  std::mt19937_64 rng(11);
  const Grid g = Grid::uniform(40);
  for (int rep = 0; rep < 200; ++rep) {
    const Vector f = ftsx::testing::random_vector(40, rng);
    CHECK(inner(f, f, g) > 0.0);
  }
  CHECK(inner(Vector::Zero(40), Vector::Zero(40), g) == 0.0);
}

TEST_CASE("gram-schmidt") {
  const Grid g = Grid::uniform(201);
  const Vector f = on_grid(g, [](double u) { return 3.0 + u; });
  auto out = gram_schmidt({f}, g);
  CHECK((out[0] - f / l2_norm(f, g)).cwiseAbs().maxCoeff() < 1e-14);

  const Vector e1 = on_grid(g, [](double u) { return std::sqrt(2.0) * std::sin(pi * u); });
  const Vector e2 = on_grid(g, [](double u) { return std::sqrt(2.0) * std::sin(2 * pi * u); });
  // exact orthonormal pair under the trapezoid rule
  auto pair = gram_schmidt({e1 / l2_norm(e1, g), e2 / l2_norm(e2, g)}, g);
  auto again = gram_schmidt(pair, g);
  CHECK((again[0] - pair[0]).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((again[1] - pair[1]).cwiseAbs().maxCoeff() < 1e-10);

  const Vector s1 = on_grid(g, [](double u) { return std::sin(pi * u); });
  const Vector s2 = on_grid(g, [](double u) { return std::sin(2 * pi * u); });
  out = gram_schmidt({s1, Vector(s1 + s2)}, g);
  // trapezoid sines are orthogonal to rounding, so the second output is sin(2 pi u) normalized
  CHECK(std::abs(std::abs(inner(out[1], s2, g)) / l2_norm(s2, g) - 1.0) < 1e-10);

  CHECK_THROWS_AS(gram_schmidt({s1, Vector(2.0 * s1)}, g), NumericError);
}

TEST_CASE("gram-schmidt orthonormality on random inputs") {
  std::mt19937_64 rng(5);
  const Grid g({0.0, 0.03, 0.1, 0.2, 0.35, 0.5, 0.62, 0.8, 0.91, 1.0});
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<Vector> in;
    for (int k = 0; k < 6; ++k) in.push_back(ftsx::testing::random_vector(10, rng));
    const auto out = gram_schmidt(in, g);
    for (size_t i = 0; i < out.size(); ++i)
      for (size_t j = 0; j < out.size(); ++j) CHECK(std::abs(inner(out[i], out[j], g) - (i == j)) < 1e-8);
  }
}

TEST_CASE("centering") {
  const Grid g = Grid::uniform(4);
  auto c = center(FunctionalSeries(g, Matrix::Constant(1, 4, 3.5)));
  CHECK(c.centered.values().cwiseAbs().maxCoeff() == 0.0);

  Matrix two(2, 4);
  two.row(0).setConstant(1.0);
  two.row(1).setConstant(3.0);
  c = center(FunctionalSeries(g, two));
  CHECK(c.mean.isApproxToConstant(2.0));
  CHECK(c.centered.values().row(0).isApproxToConstant(-1.0));
  CHECK(c.centered.values().row(1).isApproxToConstant(1.0));

  std::mt19937_64 rng(1);
  c = center(FunctionalSeries(Grid::uniform(10), ftsx::testing::random_matrix(5, 10, rng)));
  CHECK(c.centered.values().colwise().sum().cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("slices and surface helpers") {
  const Grid g = Grid::uniform(3);
  Matrix m(4, 3);
  m << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  const FunctionalSeries s(g, m);
  const auto mid = s.slice(1, 2);
  CHECK(mid.length() == 2);
  CHECK(mid.values()(0, 0) == 4);
  CHECK_THROWS(s.slice(3, 2));

  // f(u,s) = 1 integrates to 1; trace of identity-ish diag = 1
  CHECK(surface_norm2(Matrix::Ones(3, 3), g) == doctest::Approx(1.0));
  CHECK(surface_trace(Matrix::Identity(3, 3), g) == doctest::Approx(1.0));
  CHECK(CovSurface(g, Matrix::Identity(3, 3)).is_symmetric());
  Matrix asym = Matrix::Identity(3, 3);
  asym(0, 1) = 1.0;
  CHECK_FALSE(CovSurface(g, asym).is_symmetric());
}
