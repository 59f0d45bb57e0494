#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ncrank/matrix.hpp"

using namespace ncrank;

namespace {

Mat from_ints(const FieldPtr& F, int rows, int cols, std::initializer_list<int> entries) {
  Mat m(F, rows, cols);
  auto it = entries.begin();
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m.at(i, j) = F->from_int(*it++);
  return m;
}

Mat random_mat(const FieldPtr& F, int rows, int cols, std::mt19937_64& rng,
               unsigned long long card) {
  Mat m(F, rows, cols);
  for (auto& v : m.e) v = F->element_at(static_cast<long long>(rng() % card));
  return m;
}

FieldPtr make_f4() {
  FieldPtr f2 = PrimeField::get(2);
  auto vec = [&](int a, int b) { return ValueVec{f2->from_int(a), f2->from_int(b)}; };
  std::vector<ValueVec> table = {vec(1, 0), vec(0, 1), vec(0, 1), vec(1, 1)};
  return std::make_shared<ExtensionField>(f2, 2, table, "F4");
}

FieldPtr make_f9() {
  FieldPtr f3 = PrimeField::get(3);
  auto vec = [&](int a, int b) { return ValueVec{f3->from_int(a), f3->from_int(b)}; };
  std::vector<ValueVec> table = {vec(1, 0), vec(0, 1), vec(0, 1), vec(2, 0)};
  return std::make_shared<ExtensionField>(f3, 2, table, "F9");
}

}  // namespace

TEST_CASE("rank of a proportional-rows matrix is 1", "[matrix]") {
  FieldPtr Q = Rationals::get();
  CHECK(mat_rank(from_ints(Q, 2, 2, {1, 2, 2, 4})) == 1);
  CHECK(mat_rank(from_ints(Q, 2, 2, {1, 2, 3, 4})) == 2);
  CHECK(mat_rank(Mat::zero(Q, 3, 2)) == 0);
  CHECK(mat_rank(Mat::identity(Q, 4)) == 4);
}

TEST_CASE("kernel of the all-ones 2x2 matrix", "[matrix]") {
  FieldPtr Q = Rationals::get();
  Mat K = mat_kernel(from_ints(Q, 2, 2, {1, 1, 1, 1}));
  REQUIRE(K.cols == 1);
  REQUIRE(K.rows == 2);
  CHECK_FALSE(Q->is_zero(K.at(0, 0)));
  CHECK(Q->eq(K.at(0, 0), Q->neg(K.at(1, 0))));  // proportional to (1, -1)
}

TEST_CASE("preimage of a coordinate line under a rank-1 projection", "[matrix]") {
  FieldPtr Q = Rationals::get();
  const Mat A = from_ints(Q, 2, 2, {1, 0, 0, 0});
  Mat W(Q, 2, 1);
  W.at(0, 0) = Q->one();  // span(e1)
  Mat P = mat_preimage(A, W);
  CHECK(P.cols == 2);  // every x maps into span(e1), so the preimage is everything
  CHECK(mat_rank(P) == 2);
}

TEST_CASE("preimage dimension identity on random inputs", "[matrix]") {
  auto F = PrimeField::get(7);
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const int m = 2 + static_cast<int>(rng() % 4);
    const int k = 1 + static_cast<int>(rng() % 3);
    const Mat A = random_mat(F, n, m, rng, 7);
    const Mat W = random_mat(F, n, k, rng, 7);
    const Mat P = mat_preimage(A, W);
    // dim A^{-1}(W) = dim ker A + dim(im A  intersect  span W)
    const int dim_int = mat_rank(A) + mat_rank(W) - mat_rank(hstack(A, W));
    CHECK(P.cols == (m - mat_rank(A)) + dim_int);
    CHECK(mat_rank(P) == P.cols);  // returned basis is independent
    CHECK(in_col_span(W, mat_mul(A, P)));
  }
}

TEST_CASE("nonsingular submatrix indices follow the pivot rule", "[matrix]") {
  FieldPtr Q = Rationals::get();
  const SubmatrixIndices s = nonsingular_submatrix(from_ints(Q, 2, 2, {0, 1, 0, 0}));
  REQUIRE(s.rows.size() == 1);
  REQUIRE(s.cols.size() == 1);
  CHECK(s.rows[0] == 0);  // 1-based reporting at the CLI layer turns these into {1}, {2}
  CHECK(s.cols[0] == 1);
}

TEST_CASE("nonsingular submatrix is invertible on random inputs", "[matrix]") {
  auto F = PrimeField::get(1009);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const int m = 2 + static_cast<int>(rng() % 5);
    Mat A = random_mat(F, n, m, rng, 4);  // small entries force low ranks
    const int r = mat_rank(A);
    const SubmatrixIndices s = nonsingular_submatrix(A);
    REQUIRE(static_cast<int>(s.rows.size()) == r);
    REQUIRE(static_cast<int>(s.cols.size()) == r);
    CHECK(std::is_sorted(s.rows.begin(), s.rows.end()));
    CHECK(std::is_sorted(s.cols.begin(), s.cols.end()));
    CHECK(mat_rank(submat(A, s.rows, s.cols)) == r);
  }
}

TEST_CASE("row scaling changes neither rank nor pivot structure", "[matrix]") {
  FieldPtr Q = Rationals::get();
  Mat A = from_ints(Q, 3, 4, {0, 2, 4, 6, 1, 1, 0, 3, 2, 2, 0, 6});
  Mat B = A;
  const Value half = Q->parse("1/2");
  const Value third = Q->parse("-7/3");
  for (int j = 0; j < 4; ++j) {
    B.at(0, j) = Q->mul(half, B.at(0, j));
    B.at(2, j) = Q->mul(third, B.at(2, j));
  }
  const SubmatrixIndices sa = nonsingular_submatrix(A);
  const SubmatrixIndices sb = nonsingular_submatrix(B);
  CHECK(sa.rows == sb.rows);
  CHECK(sa.cols == sb.cols);
  CHECK(mat_rank(A) == mat_rank(B));
}

TEST_CASE("echelon transform reproduces the reduced form", "[matrix]") {
  auto F = PrimeField::get(5);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat A = random_mat(F, 4, 5, rng, 5);
    EchelonResult e = echelon(A, /*with_transform=*/true);
    REQUIRE(e.has_transform);
    CHECK(mat_eq(mat_mul(e.T, A), e.R));
    // Reduced form: pivot columns are unit columns with 1 in row c.
    for (int c = 0; c < e.rank; ++c) {
      for (int i = 0; i < e.R.rows; ++i) {
        const Value& v = e.R.at(i, e.pivot_cols[c]);
        if (i == c)
          CHECK(F->eq(v, F->one()));
        else
          CHECK(F->is_zero(v));
      }
    }
    // Zero rows come last.
    for (int i = e.rank; i < e.R.rows; ++i)
      for (int j = 0; j < e.R.cols; ++j) CHECK(F->is_zero(e.R.at(i, j)));
  }
}

TEST_CASE("solve and inverse", "[matrix]") {
  FieldPtr Q = Rationals::get();
  const Mat A = from_ints(Q, 2, 2, {1, 2, 3, 4});
  auto inv = mat_inverse(A);
  REQUIRE(inv.has_value());
  CHECK(mat_eq(mat_mul(A, *inv), Mat::identity(Q, 2)));
  CHECK(mat_eq(mat_mul(*inv, A), Mat::identity(Q, 2)));
  CHECK_FALSE(mat_inverse(from_ints(Q, 2, 2, {1, 2, 2, 4})).has_value());

  ValueVec b = {Q->from_int(5), Q->from_int(6)};
  auto x = mat_solve(A, b);
  REQUIRE(x.has_value());
  CHECK(Q->eq((*x)[0], Q->from_int(-4)));
  CHECK(Q->eq((*x)[1], Q->parse("9/2")));
  // Inconsistent system.
  const Mat S = from_ints(Q, 2, 1, {0, 0});
  CHECK_FALSE(mat_solve(S, ValueVec{Q->zero(), Q->one()}).has_value());
}

TEST_CASE("kron multiplies ranks", "[matrix]") {
  auto F = PrimeField::get(11);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 15; ++trial) {
    const Mat A = random_mat(F, 2 + rng() % 3, 2 + rng() % 3, rng, 3);
    const Mat B = random_mat(F, 2 + rng() % 3, 2 + rng() % 3, rng, 3);
    CHECK(mat_rank(kron(A, B)) == mat_rank(A) * mat_rank(B));
  }
  // Kronecker block layout: entry (i*p+k, j*q+l) = A(i,j) * B(k,l).
  FieldPtr Q = Rationals::get();
  const Mat A = from_ints(Q, 2, 2, {1, 0, 0, 0});
  const Mat B = from_ints(Q, 2, 2, {0, 1, 0, 0});
  const Mat K = kron(A, B);
  CHECK(Q->eq(K.at(0, 1), Q->one()));
  CHECK(mat_rank(K) == 1);
}

TEST_CASE("fast finite-field ranks agree with generic elimination", "[matrix]") {
  std::mt19937_64 rng(11);
  for (const FieldPtr& F :
       {FieldPtr(PrimeField::get(2)), FieldPtr(PrimeField::get(1009)), make_f4(), make_f9()}) {
    const unsigned long long card = F->cardinality()->convert_to<unsigned long long>();
    for (int trial = 0; trial < 12; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 6);
      const int m = 1 + static_cast<int>(rng() % 6);
      const Mat A = random_mat(F, n, m, rng, std::min(card, 4ull));
      CHECK(mat_rank(A) == echelon(A).rank);
    }
  }
}

TEST_CASE("rank is invariant under field extension of the entries", "[matrix]") {
  // The same integer matrix read over F2, F4 and Q: ranks over F2 and F4
  // agree (extension fields preserve rank); Q can only be larger.
  FieldPtr f2 = PrimeField::get(2);
  FieldPtr f4 = make_f4();
  FieldPtr Q = Rationals::get();
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    Mat a2(f2, 4, 4), a4(f4, 4, 4), aq(Q, 4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const int bit = static_cast<int>(rng() % 2);
        a2.at(i, j) = f2->from_int(bit);
        a4.at(i, j) = f4->from_int(bit);
        aq.at(i, j) = Q->from_int(bit);
      }
    CHECK(mat_rank(a2) == mat_rank(a4));
    CHECK(mat_rank(aq) >= mat_rank(a2));
  }
}

TEST_CASE("modular reduction of rational matrices", "[matrix]") {
  FieldPtr Q = Rationals::get();
  RatModMap mod(2147483647ull);
  Mat A(Q, 1, 2);
  A.at(0, 0) = Q->parse("1/3");
  A.at(0, 1) = Q->parse("-2/5");
  auto img = mod.map(A);
  REQUIRE(img.has_value());
  auto F = mod.FP;
  CHECK(F->eq(F->mul(img->at(0, 0), F->from_int(3)), F->one()));
  CHECK(F->eq(F->mul(img->at(0, 1), F->from_int(5)), F->from_int(-2)));

  // A denominator hitting the prime makes the map fail.
  Mat B(Q, 1, 1);
  B.at(0, 0) = Value::of_rat(BigRat(BigInt(1), BigInt(2147483647ull)));
  CHECK_FALSE(mod.map(B).has_value());

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    Mat M(Q, 4, 4);
    for (auto& v : M.e)
      v = Q->from_int(static_cast<long long>(rng() % 5) - 2);
    CHECK(mat_rank_rational_fast(M) == mat_rank(M));
  }
}

TEST_CASE("column space helpers", "[matrix]") {
  FieldPtr Q = Rationals::get();
  const Mat A = from_ints(Q, 3, 3, {1, 2, 3, 2, 4, 6, 0, 0, 1});
  const Mat C = col_space_basis(A);
  CHECK(C.cols == 2);
  CHECK(mat_rank(C) == 2);
  CHECK(in_col_span(C, A));
  Mat v(Q, 3, 1);
  v.at(0, 0) = Q->one();
  CHECK_FALSE(in_col_span(A, v));  // e1 is not in span{(1,2,0),(3,6,1)}
}
