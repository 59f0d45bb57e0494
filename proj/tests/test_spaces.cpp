#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ncrank/spaces.hpp"

using namespace ncrank;

namespace {

Mat unit(const FieldPtr& F, int n, int i, int j) {
  Mat m(F, n, n);
  m.at(i, j) = F->one();
  return m;
}

MatrixSpace row_space_2(const FieldPtr& F) {  // span{E11, E12}: everything in row 1
  return make_space(F, 2, 2, {unit(F, 2, 0, 0), unit(F, 2, 0, 1)});
}

MatrixSpace col_space_2(const FieldPtr& F) {  // span{E11, E21}: everything in column 1
  return make_space(F, 2, 2, {unit(F, 2, 0, 0), unit(F, 2, 1, 0)});
}

MatrixSpace full_space(const FieldPtr& F, int n) {
  std::vector<Mat> gens;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gens.push_back(unit(F, n, i, j));
  return make_space(F, n, n, std::move(gens));
}

Mat col(const FieldPtr& F, std::initializer_list<int> entries) {
  Mat m(F, static_cast<int>(entries.size()), 1);
  int i = 0;
  for (int v : entries) m.at(i++, 0) = F->from_int(v);
  return m;
}

}  // namespace

TEST_CASE("assemble matches the Kronecker layout", "[spaces]") {
  FieldPtr Q = Rationals::get();
  Mat B(Q, 2, 2);
  B.at(0, 0) = Q->from_int(2);
  B.at(1, 1) = Q->from_int(-1);
  Mat T(Q, 3, 2);
  T.at(0, 1) = Q->from_int(5);
  T.at(2, 0) = Q->from_int(1);

  MatrixSpace s = make_space(Q, 2, 2, {B});
  BlowupPoint p{3, 2, {T}};
  CHECK(mat_eq(assemble(s, p), kron(B, T)));

  // Assemble is linear in the generators.
  MatrixSpace s2 = make_space(Q, 2, 2, {B, unit(Q, 2, 0, 1)});
  BlowupPoint p2{3, 2, {T, T}};
  CHECK(mat_eq(assemble(s2, p2), mat_add(kron(B, T), kron(unit(Q, 2, 0, 1), T))));
}

TEST_CASE("scalar points are plain linear combinations", "[spaces]") {
  FieldPtr Q = Rationals::get();
  MatrixSpace s = row_space_2(Q);
  BlowupPoint p = scalar_point(s, {Q->from_int(3), Q->from_int(-2)});
  Mat expect(Q, 2, 2);
  expect.at(0, 0) = Q->from_int(3);
  expect.at(0, 1) = Q->from_int(-2);
  CHECK(mat_eq(assemble(s, p), expect));
}

TEST_CASE("shrink values of the row and column spaces", "[spaces]") {
  FieldPtr Q = Rationals::get();
  const MatrixSpace rows = row_space_2(Q);
  const MatrixSpace cols = col_space_2(Q);

  // Row space: images always lie in span(e1), so the full space shrinks by 1.
  CHECK(shrink_value(rows, Mat::identity(Q, 2)) == 1);
  CHECK(shrink_value(rows, col(Q, {0, 1})) == 0);  // B(e2) = span(e1), no shrink

  // Column space: e2 is annihilated, but the full space maps onto F^2.
  CHECK(shrink_value(cols, col(Q, {0, 1})) == 1);
  CHECK(shrink_value(cols, Mat::identity(Q, 2)) == 0);

  // Empty space: everything shrinks to zero.
  const MatrixSpace empty = make_space(Q, 2, 2, {});
  CHECK(shrink_value(empty, Mat::identity(Q, 2)) == 2);
}

TEST_CASE("lifting multiplies shrink by the degree, compression recovers it", "[spaces]") {
  auto F = PrimeField::get(7);
  const MatrixSpace s = col_space_2(F);
  const Mat V = col(F, {0, 1});
  REQUIRE(shrink_value(s, V) == 1);

  const int d = 3;
  const Mat U = lift_shrunk(s, V, d);
  const MatrixSpace blown = blowup_space(s, d, d);
  CHECK(U.rows == 2 * d);
  CHECK(U.cols == d);
  CHECK(shrink_value(blown, U) == d);

  const Mat back = compress_shrunk(s, U, d, 1);
  CHECK(shrink_value(s, back) >= 1);
  CHECK(mat_rank(back) == 1);
}

TEST_CASE("compression verifies the claimed shrink", "[spaces]") {
  FieldPtr Q = Rationals::get();
  const MatrixSpace s = make_space(Q, 2, 2, {Mat::identity(Q, 2)});
  // The identity span shrinks nothing; demanding shrink 1 must blow up.
  CHECK_THROWS_AS(compress_shrunk(s, Mat::identity(Q, 4), 2, 1), internal_error);
}

TEST_CASE("coefficient reduction lands in the default sample set", "[spaces]") {
  FieldPtr Q = Rationals::get();
  const MatrixSpace s = full_space(Q, 2);
  BlowupPoint p = scalar_point(
      s, {Q->parse("5/3"), Q->parse("-9"), Q->zero(), Q->parse("1234567/89")});
  REQUIRE(mat_rank(assemble(s, p)) == 2);

  const BlowupPoint q = reduce_coefficients(s, p, 2);
  CHECK(mat_rank(assemble(s, q)) >= 2);
  const ValueVec S = default_sample_set(Q, 2);
  for (const Mat& t : q.coeffs) {
    bool in_set = false;
    for (const Value& cand : S)
      if (Q->eq(t.at(0, 0), cand)) in_set = true;
    CHECK(in_set);
  }
}

TEST_CASE("coefficient reduction over a finite field and blow-up points", "[spaces]") {
  auto F = PrimeField::get(5);
  const MatrixSpace s = col_space_2(F);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    BlowupPoint p{2, 2, {}};
    p.coeffs = {Mat(F, 2, 2), Mat(F, 2, 2)};
    for (Mat& t : p.coeffs)
      for (auto& v : t.e) v = F->from_int(static_cast<long long>(rng() % 5));
    const int r = mat_rank(assemble(s, p));
    if (r == 0) continue;
    const BlowupPoint q = reduce_coefficients(s, p, r);
    CHECK(mat_rank(assemble(s, q)) >= r);
    for (const Mat& t : q.coeffs)
      for (const Value& v : t.e)
        CHECK(v.word() <= static_cast<std::uint64_t>(r));
  }
}

TEST_CASE("coefficient reduction over a rational function field", "[spaces]") {
  auto F5 = PrimeField::get(5);
  FieldPtr K = std::make_shared<RatFuncField>(F5, "X");
  const MatrixSpace s = full_space(K, 2);
  const Value X = std::static_pointer_cast<const RatFuncField>(K)->generator();
  // X*E11 + (1/(X+1))*E22 has rank 2 at transcendental coefficients.
  BlowupPoint p = scalar_point(s, {X, K->zero(), K->zero(), K->parse("(1)/(1,1)")});
  REQUIRE(mat_rank(assemble(s, p)) == 2);
  const BlowupPoint q = reduce_coefficients(s, p, 2);
  CHECK(mat_rank(assemble(s, q)) == 2);
  for (const Mat& t : q.coeffs) {
    const RatFuncRep& rep = t.at(0, 0).ratfunc();
    CHECK(detail::poly_deg(rep.den) == 0);   // no denominators remain
    CHECK(detail::poly_deg(rep.num) <= 0);   // constants from the sample set
  }
}

TEST_CASE("coefficient reduction honors a custom sample set", "[spaces]") {
  FieldPtr Q = Rationals::get();
  const MatrixSpace s = full_space(Q, 2);
  BlowupPoint p = scalar_point(s, {Q->parse("7/2"), Q->zero(), Q->zero(), Q->parse("-4")});
  const ValueVec S = {Q->from_int(1), Q->from_int(2), Q->from_int(3)};
  const BlowupPoint q = reduce_coefficients(s, p, 2, &S);
  CHECK(mat_rank(assemble(s, q)) == 2);
  for (const Mat& t : q.coeffs) {
    bool in_set = false;
    for (const Value& cand : S)
      if (Q->eq(t.at(0, 0), cand)) in_set = true;
    CHECK(in_set);
  }
}

TEST_CASE("coefficient reduction refuses too-small fields", "[spaces]") {
  auto F2 = PrimeField::get(2);
  const MatrixSpace s = full_space(F2, 2);
  BlowupPoint p = scalar_point(s, {F2->one(), F2->zero(), F2->zero(), F2->one()});
  CHECK_THROWS_AS(reduce_coefficients(s, p, 2), size_error);
}

TEST_CASE("certificate verification accepts a sound certificate", "[spaces]") {
  FieldPtr Q = Rationals::get();
  const MatrixSpace s = full_space(Q, 2);
  Certificate cert;
  cert.rank = 2;
  cert.degree = 1;
  cert.point = scalar_point(s, {Q->one(), Q->zero(), Q->zero(), Q->one()});
  cert.subspace = Mat(Q, 2, 0);
  cert.shrink = 0;
  cert.bound_policy = {"greedy", 1};
  const VerifyReport rep = verify_certificate(s, cert);
  CHECK(rep.ok);
  CHECK(rep.failures.empty());
}

TEST_CASE("certificate verification catches tampering", "[spaces]") {
  FieldPtr Q = Rationals::get();
  const MatrixSpace s = row_space_2(Q);
  Certificate good;
  good.rank = 1;
  good.degree = 1;
  good.point = scalar_point(s, {Q->one(), Q->zero()});
  good.subspace = Mat::identity(Q, 2);
  good.shrink = 1;
  good.bound_policy = {"greedy", 1};
  REQUIRE(verify_certificate(s, good).ok);

  SECTION("declared rank inconsistent with shrink") {
    Certificate bad = good;
    bad.rank = 2;
    CHECK_FALSE(verify_certificate(s, bad).ok);
  }
  SECTION("witness point with the wrong exact rank") {
    Certificate bad = good;
    bad.point = scalar_point(s, {Q->zero(), Q->zero()});
    CHECK_FALSE(verify_certificate(s, bad).ok);
  }
  SECTION("subspace that does not shrink enough") {
    Certificate bad = good;
    bad.subspace = col(Q, {1, 0});  // B(e1) = span(e1): no shrink
    const VerifyReport rep = verify_certificate(s, bad);
    CHECK_FALSE(rep.ok);
    CHECK_FALSE(rep.failures.empty());
  }
  SECTION("dependent subspace columns") {
    Certificate bad = good;
    bad.subspace = hstack(col(Q, {1, 1}), col(Q, {2, 2}));
    CHECK_FALSE(verify_certificate(s, bad).ok);
  }
  SECTION("degree beyond the policy bound") {
    Certificate bad = good;
    bad.degree = 3;  // r = 1, greedy bound is 2
    bad.point = BlowupPoint{3, 3, {Mat::identity(Q, 3), Mat::zero(Q, 3, 3)}};
    bad.rank = 3;
    CHECK_FALSE(verify_certificate(s, bad).ok);
  }
  SECTION("unknown policy name") {
    Certificate bad = good;
    bad.bound_policy.kind = "???";
    CHECK_FALSE(verify_certificate(s, bad).ok);
  }
}

TEST_CASE("small-field policy scales the degree bound", "[spaces]") {
  CHECK(degree_bound({"greedy", 1}, 3) == 4);
  CHECK(degree_bound({"dm", 1}, 3) == 2);
  CHECK(degree_bound({"dm", 1}, 1) == 1);
  CHECK(degree_bound({"small-field", 4}, 3) == 16);
}
