#include <catch2/catch_amalgamated.hpp>

#include "ncrank/increment.hpp"

using namespace ncrank;

namespace {

Mat unit(const FieldPtr& F, int n, int i, int j) {
  Mat m(F, n, n);
  m.at(i, j) = F->one();
  return m;
}

MatrixSpace full_space(const FieldPtr& F, int n) {
  std::vector<Mat> gens;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gens.push_back(unit(F, n, i, j));
  return make_space(F, n, n, std::move(gens));
}

MatrixSpace skew_3(const FieldPtr& F) {
  std::vector<Mat> gens;
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (const auto& ij : pairs) {
    Mat g(F, 3, 3);
    g.at(ij[0], ij[1]) = F->one();
    g.at(ij[1], ij[0]) = F->neg(F->one());
    gens.push_back(std::move(g));
  }
  return make_space(F, 3, 3, std::move(gens));
}

BlowupPoint scalar_point(const FieldPtr& F, const std::vector<long long>& cs) {
  BlowupPoint p;
  p.a = p.b = 1;
  for (long long c : cs) {
    Mat t(F, 1, 1);
    t.at(0, 0) = F->from_int(c);
    p.coeffs.push_back(std::move(t));
  }
  return p;
}

}  // namespace

TEST_CASE("a one-dimensional corner space certifies its shrunk subspace", "[increment]") {
  const auto Q = Rationals::get();
  const MatrixSpace s = make_space(Q, 2, 2, {unit(Q, 2, 0, 0)});
  const IncrementResult res = increment_or_certify(s, scalar_point(Q, {1}), 2);

  REQUIRE(std::holds_alternative<ShrunkSubspace>(res));
  const auto& sh = std::get<ShrunkSubspace>(res);
  CHECK(sh.shrink == 1);
  REQUIRE(sh.subspace.cols == 1);
  CHECK(Q->is_zero(sh.subspace.at(0, 0)));
  CHECK_FALSE(Q->is_zero(sh.subspace.at(1, 0)));
  CHECK(shrink_value(s, sh.subspace) >= 1);
}

TEST_CASE("a row space certifies the whole space as shrunk", "[increment]") {
  const auto Q = Rationals::get();
  const MatrixSpace s = make_space(Q, 2, 2, {unit(Q, 2, 0, 0), unit(Q, 2, 0, 1)});
  const IncrementResult res = increment_or_certify(s, scalar_point(Q, {1, 0}), 2);

  REQUIRE(std::holds_alternative<ShrunkSubspace>(res));
  const auto& sh = std::get<ShrunkSubspace>(res);
  CHECK(sh.shrink == 1);
  CHECK(mat_rank(sh.subspace) == 2);  // all of F^2 shrinks: B(F^2) is one line
  CHECK(shrink_value(s, sh.subspace) >= 1);
}

TEST_CASE("the shrunk branch works at blow-up degree two", "[increment]") {
  const auto Q = Rationals::get();
  const MatrixSpace s = make_space(Q, 2, 2, {unit(Q, 2, 0, 0)});
  BlowupPoint p;
  p.a = p.b = 2;
  Mat I(Q, 2, 2);
  I.at(0, 0) = Q->one();
  I.at(1, 1) = Q->one();
  p.coeffs.push_back(I);

  const IncrementResult res = increment_or_certify(s, p, 2);
  REQUIRE(std::holds_alternative<ShrunkSubspace>(res));
  const auto& sh = std::get<ShrunkSubspace>(res);
  CHECK(sh.shrink == 1);
  REQUIRE(sh.subspace.cols == 1);
  CHECK(Q->is_zero(sh.subspace.at(0, 0)));
}

TEST_CASE("the full matrix algebra always increments", "[increment]") {
  const auto Q = Rationals::get();
  const MatrixSpace s = full_space(Q, 2);
  // A = E11: rank 1, so r = 1 < n and no shrunk subspace can exist.
  const IncrementResult res = increment_or_certify(s, scalar_point(Q, {1, 0, 0, 0}), 2);

  REQUIRE(std::holds_alternative<IncrementStep>(res));
  const auto& step = std::get<IncrementStep>(res);
  CHECK(step.window.r >= 2);
  CHECK(step.point.a == step.point.b);
  CHECK(step.point.a >= 2);
  const int got = mat_rank(assemble(s, step.point));
  CHECK(got >= step.window.r * step.point.a);
}

TEST_CASE("alternating 3x3 matrices increment from a rank-2 element", "[increment]") {
  const auto Q = Rationals::get();
  const MatrixSpace s = skew_3(Q);
  const IncrementResult res = increment_or_certify(s, scalar_point(Q, {1, 0, 0}), 3);

  REQUIRE(std::holds_alternative<IncrementStep>(res));
  const auto& step = std::get<IncrementStep>(res);
  CHECK(step.point.a == 3);  // the escape chain fits inside the requested degree
  CHECK(step.window.r == 3);
  CHECK(step.window.row_blocks.size() == 3);
  CHECK(step.window.col_blocks.size() == 3);
  CHECK(mat_rank(assemble(s, step.point)) == 9);
}

TEST_CASE("alternating matrices increment from blow-up degree two", "[increment]") {
  const auto Q = Rationals::get();
  const MatrixSpace s = skew_3(Q);
  BlowupPoint p;
  p.a = p.b = 2;
  Mat I(Q, 2, 2);
  I.at(0, 0) = Q->one();
  I.at(1, 1) = Q->one();
  p.coeffs.push_back(I);
  p.coeffs.push_back(Mat(Q, 2, 2));
  p.coeffs.push_back(Mat(Q, 2, 2));
  REQUIRE(mat_rank(assemble(s, p)) == 4);  // r = 2 at d = 2

  const IncrementResult res = increment_or_certify(s, p, 3);
  REQUIRE(std::holds_alternative<IncrementStep>(res));
  const auto& step = std::get<IncrementStep>(res);
  CHECK(step.window.r == 3);  // the alternating space has no shrunk subspace
  CHECK(step.point.a % 2 == 0);
  CHECK(mat_rank(assemble(s, step.point)) >= 3 * step.point.a);
}

TEST_CASE("degenerate full-rank input certifies a zero-shrink subspace", "[increment]") {
  const auto Q = Rationals::get();
  const MatrixSpace s = full_space(Q, 2);
  const IncrementResult res = increment_or_certify(s, scalar_point(Q, {1, 0, 0, 1}), 3);
  REQUIRE(std::holds_alternative<ShrunkSubspace>(res));
  CHECK(std::get<ShrunkSubspace>(res).shrink == 0);
}

TEST_CASE("the dichotomy step validates its inputs", "[increment]") {
  const auto Q = Rationals::get();

  SECTION("rank must be an exact multiple of the degree") {
    const MatrixSpace s = full_space(Q, 2);
    BlowupPoint p;
    p.a = p.b = 2;
    Mat I(Q, 2, 2);
    I.at(0, 0) = Q->one();
    I.at(1, 1) = Q->one();
    Mat D(Q, 2, 2);
    D.at(0, 0) = Q->one();
    p.coeffs = {I, Mat(Q, 2, 2), Mat(Q, 2, 2), D};  // assembles to rank 3
    CHECK_THROWS_AS(increment_or_certify(s, p, 2), precondition_error);
  }

  SECTION("the enlargement degree must beat the scaled rank") {
    const MatrixSpace s = full_space(Q, 2);
    CHECK_THROWS_AS(increment_or_certify(s, scalar_point(Q, {1, 0, 0, 0}), 1), argument_error);
  }

  SECTION("small fields are rejected with the documented threshold") {
    const auto F2 = PrimeField::get(2);
    const MatrixSpace s = make_space(F2, 2, 2, {unit(F2, 2, 0, 0), unit(F2, 2, 1, 1)});
    CHECK_THROWS_AS(increment_or_certify(s, scalar_point(F2, {1, 0}), 2), size_error);
  }

  SECTION("rectangular spaces are rejected") {
    const MatrixSpace s = make_space(Q, 1, 2, {Mat(Q, 1, 2)});
    BlowupPoint p;
    p.a = p.b = 1;
    p.coeffs = {Mat(Q, 1, 1)};
    CHECK_THROWS_AS(increment_or_certify(s, p, 2), argument_error);
  }
}
