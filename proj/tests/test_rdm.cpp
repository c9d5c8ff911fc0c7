#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <repgeo/numerics.hpp>
#include <repgeo/rdm.hpp>
#include <repgeo/rng.hpp>

using namespace repgeo;

TEST_CASE("cosine_rdm orthogonal and antipodal rows") {
  Matrix x(2, 2);
  x << 1, 0, 0, 1;
  Matrix d = cosine_rdm(x);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(1, 1) == 0.0);
  CHECK(d(0, 1) == doctest::Approx(1.0));

  Matrix anti(2, 2);
  anti << 1, 0, -1, 0;
  CHECK(cosine_rdm(anti)(0, 1) == doctest::Approx(2.0));
}

TEST_CASE("cosine_rdm 45-degree pair") {
  Matrix x(2, 2);
  x << 1, 0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(cosine_rdm(x)(0, 1) == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("cosine_rdm zero-norm row is an error naming the row") {
  Matrix x(3, 2);
  x << 1, 0, 0, 0, 0, 1;
  CHECK_THROWS_WITH_AS(cosine_rdm(x), doctest::Contains("row 1"), std::invalid_argument);
}

TEST_CASE("cosine_rdm rotation and scale invariance") {
  RngStream s(3, 0);
  Matrix x = s.gaussian_matrix(20, 8);
  Matrix r = random_orthogonal(8, s);
  Matrix d0 = cosine_rdm(x);
  CHECK((d0 - cosine_rdm(x * r)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((d0 - cosine_rdm(3.7 * x)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cosine_rdm invariants: symmetric, zero diagonal, entries in [0,2]") {
  RngStream s(3, 1);
  Matrix x = s.gaussian_matrix(30, 5);
  Matrix d = cosine_rdm(x);
  CHECK((d - d.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(d.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.minCoeff() >= -1e-12);
  CHECK(d.maxCoeff() <= 2.0 + 1e-12);
}

TEST_CASE("label_rdm values") {
  Matrix d = label_rdm(LabelVector::from({0, 0, 1}));
  CHECK(d(0, 1) == 0.0);
  CHECK(d(0, 2) == 2.0);
  CHECK(d(1, 2) == 2.0);

  CHECK(label_rdm(LabelVector{{1, 1, 1}, 2}).cwiseAbs().maxCoeff() == 0.0);

  Matrix d3 = label_rdm(LabelVector::from({0, 1, 2}));
  CHECK(condense(d3).minCoeff() == 2.0);
}

TEST_CASE("condense ordering and length") {
  Matrix d(3, 3);
  d << 0, 5, 7, 5, 0, 9, 7, 9, 0;
  Vector v = condense(d);
  REQUIRE(v.size() == 3);
  CHECK(v(0) == 5);
  CHECK(v(1) == 7);
  CHECK(v(2) == 9);

  RngStream s(3, 2);
  Matrix x = s.gaussian_matrix(10, 4);
  CHECK(condense(cosine_rdm(x)).size() == 45);
}

TEST_CASE("rank correlation with label RDM is monotone-transform invariant") {
  RngStream s(3, 3);
  Matrix x = s.gaussian_matrix(12, 6);
  LabelVector y = LabelVector::from({0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1});
  Matrix dx = cosine_rdm(x);
  Vector vy = condense(label_rdm(y));
  Matrix dx_warped = dx.array().exp() - 1.0;  // strictly increasing on [0,2]
  auto a = spearman(condense(dx), vy);
  auto b = spearman(condense(dx_warped), vy);
  REQUIRE(a.has_value());
  CHECK(*a == doctest::Approx(*b).epsilon(1e-12));
}
