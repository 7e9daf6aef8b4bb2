#include <doctest.h>

#include "aggr/simplex.hpp"

using namespace aggr;

namespace {
Vec make_vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}
}  // namespace

TEST_CASE("amalg appends the affine residual") {
  const Distribution p = amalg(TildePoint(make_vec({0.2, 0.3}), 3));
  CHECK(p.dim() == 3);
  CHECK(p[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(p[2] == doctest::Approx(0.5).epsilon(1e-15));

  const Distribution degenerate = amalg(TildePoint(Vec(0), 1));
  CHECK(degenerate.dim() == 1);
  CHECK(degenerate[0] == 1.0);

  const Distribution boundary = amalg(TildePoint(make_vec({0.5, 0.5}), 3));
  CHECK(boundary[2] == 0.0);
}

TEST_CASE("amalg rejects residuals below -1e-12") {
  Vec c(2);
  c << 0.6, 0.5;
  CHECK_THROWS_AS(amalg(TildePoint(c, 3)), DomainError);
}

TEST_CASE("project_tilde drops the last coordinate") {
  const Distribution p(make_vec({0.2, 0.3, 0.5}));
  const TildePoint t = project_tilde(p);
  CHECK(t.coords().size() == 2);
  CHECK(t.coords()(0) == 0.2);
  CHECK(t.coords()(1) == 0.3);

  CHECK(project_tilde(Distribution(make_vec({1.0}))).coords().size() == 0);

  const TildePoint vertex = project_tilde(Distribution(make_vec({0.0, 0.0, 1.0})));
  CHECK(vertex.coords()(0) == 0.0);
  CHECK(vertex.coords()(1) == 0.0);
}

TEST_CASE("round trip is exact") {
  const SimplexGrid grid{4, 7, 1e-3};
  for (const Distribution& p : interior_grid(grid)) {
    const Distribution back = amalg(project_tilde(p));
    for (int i = 0; i < p.dim(); ++i)
      CHECK(std::abs(back[i] - p[i]) <= 1e-15);
  }
}

TEST_CASE("construction renormalizes small drift and rejects large") {
  const Distribution drift(make_vec({0.5, 0.5 + 5e-10}));
  CHECK(drift.weights().sum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(Distribution(make_vec({0.5, 0.6})), DomainError);
  CHECK_THROWS_AS(Distribution(make_vec({-0.1, 1.1})), DomainError);
  CHECK_THROWS_AS(Distribution(Vec(0)), DimensionError);
}

TEST_CASE("interior grid: m=2 is evenly spaced on [eps, 1-eps]") {
  const auto pts = interior_grid({2, 3, 0.1});
  REQUIRE(pts.size() == 3);
  CHECK(pts[0][0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(pts[1][0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pts[2][0] == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(pts[0][1] == doctest::Approx(0.9).epsilon(1e-14));
}

TEST_CASE("interior grid: m=3 resolution 2 gives the frozen composition points") {
  const auto pts = interior_grid({3, 2, 0.2});
  REQUIRE(pts.size() == 3);
  // Composition order (0,0,1), (0,1,0), (1,0,0) under the chosen rule.
  const double lo = 0.2, hi = 0.6;
  CHECK(pts[0][0] == doctest::Approx(lo));
  CHECK(pts[0][1] == doctest::Approx(lo));
  CHECK(pts[0][2] == doctest::Approx(hi));
  CHECK(pts[1][1] == doctest::Approx(hi));
  CHECK(pts[2][0] == doctest::Approx(hi));
}

TEST_CASE("interior grid: m=1 degenerates to the single point") {
  const auto pts = interior_grid({1, 5, 0.01});
  REQUIRE(pts.size() == 1);
  CHECK(pts[0][0] == 1.0);
}

TEST_CASE("interior grid validation") {
  CHECK_THROWS_AS(interior_grid({2, 1, 0.1}), ConfigError);
  CHECK_THROWS_AS(interior_grid({2, 3, 0.0}), ConfigError);
  CHECK_THROWS_AS(interior_grid({3, 3, 0.4}), ConfigError);
}

TEST_CASE("grid interiority and determinism") {
  const SimplexGrid grid{3, 9, 1e-4};
  const auto a = interior_grid(grid);
  const auto b = interior_grid(grid);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].min_coord() >= grid.epsilon - 1e-15);
    CHECK(a[i].weights().sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a[i].weights() == b[i].weights());
  }
}

TEST_CASE("euclidean projection onto the simplex") {
  const Vec inside = project_to_simplex(make_vec({0.2, 0.3, 0.5}));
  CHECK(inside(0) == doctest::Approx(0.2).epsilon(1e-14));

  const Vec clipped = project_to_simplex(make_vec({2.0, 0.0}));
  CHECK(clipped(0) == doctest::Approx(1.0));
  CHECK(clipped(1) == doctest::Approx(0.0));

  const Vec shifted = project_to_simplex(make_vec({1.0, 2.0, 3.0}));
  CHECK(shifted.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(shifted(2) > shifted(1));
  CHECK(shifted(0) == 0.0);
}
