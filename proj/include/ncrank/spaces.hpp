#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncrank/matrix.hpp"

namespace ncrank {

// A matrix space: the span of generators B_1..B_m inside M(rows x cols, F).
// Generators are not required to be linearly independent; coefficient tuples
// always refer to this generator list positionally.
struct MatrixSpace {
  FieldPtr F;
  int rows = 0;
  int cols = 0;
  std::vector<Mat> basis;

  int generator_count() const { return static_cast<int>(basis.size()); }
};

inline MatrixSpace make_space(FieldPtr F, int rows, int cols, std::vector<Mat> basis) {
  MatrixSpace s{std::move(F), rows, cols, std::move(basis)};
  if (s.rows < 0 || s.cols < 0) throw argument_error("space dimensions must be nonnegative");
  for (const Mat& b : s.basis) {
    if (b.rows != s.rows || b.cols != s.cols)
      throw argument_error("space generator has the wrong shape");
    if (b.F != s.F && !same_field(b.F, s.F))
      throw argument_error("space generator lives over the wrong field");
  }
  return s;
}

// A point of the (a, b)-blow-up of a space: sum_i B_i (x) T_i with T_i of
// shape a x b. Degree-1 points (a = b = 1) are plain linear combinations.
struct BlowupPoint {
  int a = 1;
  int b = 1;
  std::vector<Mat> coeffs;
};

inline BlowupPoint scalar_point(const MatrixSpace& s, const ValueVec& c) {
  if (static_cast<int>(c.size()) != s.generator_count())
    throw argument_error("coefficient count does not match the generator count");
  BlowupPoint p;
  p.a = p.b = 1;
  p.coeffs.reserve(c.size());
  for (const Value& v : c) {
    Mat t(s.F, 1, 1);
    t.at(0, 0) = v;
    p.coeffs.push_back(std::move(t));
  }
  return p;
}

inline void check_point_shape(const MatrixSpace& s, const BlowupPoint& p) {
  if (p.a < 1 || p.b < 1) throw argument_error("blow-up shape must be positive");
  if (static_cast<int>(p.coeffs.size()) != s.generator_count())
    throw argument_error("point has " + std::to_string(p.coeffs.size()) +
                         " coefficient matrices for " + std::to_string(s.generator_count()) +
                         " generators");
  for (const Mat& t : p.coeffs)
    if (t.rows != p.a || t.cols != p.b)
      throw argument_error("point coefficient matrix has the wrong shape");
}

// The matrix sum_i B_i (x) T_i of shape (rows*a) x (cols*b). Row u*a + k is
// inner row k of block row u; same for columns.
inline Mat assemble(const MatrixSpace& s, const BlowupPoint& p) {
  check_point_shape(s, p);
  Mat r(s.F, s.rows * p.a, s.cols * p.b);
  for (int i = 0; i < s.generator_count(); ++i) {
    const Mat& B = s.basis[i];
    const Mat& T = p.coeffs[i];
    for (int u = 0; u < s.rows; ++u)
      for (int v = 0; v < s.cols; ++v) {
        const Value& w = B.at(u, v);
        if (s.F->is_zero(w)) continue;
        for (int k = 0; k < p.a; ++k)
          for (int l = 0; l < p.b; ++l) {
            const Value& t = T.at(k, l);
            if (s.F->is_zero(t)) continue;
            Value& dst = r.at(u * p.a + k, v * p.b + l);
            dst = s.F->add(dst, s.F->mul(w, t));
          }
      }
  }
  return r;
}

// The (a, b)-blow-up as a space in its own right: generators B_i (x) E_{st}
// in lexicographic (i, s, t) order. Intended for small shapes (tests, data
// reduction of table cells); large blow-ups are handled implicitly.
inline MatrixSpace blowup_space(const MatrixSpace& s, int a, int b) {
  std::vector<Mat> gens;
  gens.reserve(static_cast<std::size_t>(s.generator_count()) * a * b);
  for (int i = 0; i < s.generator_count(); ++i)
    for (int st = 0; st < a; ++st)
      for (int t = 0; t < b; ++t) {
        Mat unit(s.F, a, b);
        unit.at(st, t) = s.F->one();
        BlowupPoint p;
        p.a = a;
        p.b = b;
        p.coeffs.assign(static_cast<std::size_t>(s.generator_count()), Mat::zero(s.F, a, b));
        p.coeffs[i] = unit;
        gens.push_back(assemble(s, p));
      }
  return make_space(s.F, s.rows * a, s.cols * b, std::move(gens));
}

// Generators of the image space B(V) = span{B_i v : v in V}, stacked.
inline Mat apply_space(const MatrixSpace& s, const Mat& V) {
  if (V.rows != s.cols) throw argument_error("subspace lives in the wrong dimension");
  Mat img(s.F, s.rows, 0);
  for (const Mat& B : s.basis) img = hstack(img, mat_mul(B, V));
  return img;
}

// dim V - dim B(V): positive values witness shrinking. V is given by its
// columns (need not be independent).
inline int shrink_value(const MatrixSpace& s, const Mat& V) {
  return mat_rank(V) - mat_rank(apply_space(s, V));
}

// V (x) F^d inside F^{n*d}: for each column v and slot t, the vector with
// entries (u*d + t) = v_u. An s-shrunk V lifts to an (s*d)-shrunk subspace
// of the (d, d)-blow-up.
inline Mat lift_shrunk(const MatrixSpace& s, const Mat& V, int d) {
  if (V.rows != s.cols) throw argument_error("subspace lives in the wrong dimension");
  if (d < 1) throw argument_error("blow-up degree must be positive");
  Mat U(s.F, V.rows * d, V.cols * d);
  for (int j = 0; j < V.cols; ++j)
    for (int t = 0; t < d; ++t)
      for (int u = 0; u < V.rows; ++u) U.at(u * d + t, j * d + t) = V.at(u, j);
  return U;
}

// Converse direction: compress a shrunk subspace U of the (d, d)-blow-up to
// the sum of its block projections V = sum_t pi_t(U), then re-verify that V
// shrinks by at least `required_shrink`. The inputs produced by the escape
// analysis always satisfy this; failure indicates a bug, not bad data.
inline Mat compress_shrunk(const MatrixSpace& s, const Mat& U, int d, int required_shrink) {
  if (U.rows != s.cols * d) throw argument_error("blow-up subspace has the wrong dimension");
  Mat stacked(s.F, s.cols, 0);
  for (int t = 0; t < d; ++t) {
    Mat proj(s.F, s.cols, U.cols);
    for (int u = 0; u < s.cols; ++u)
      for (int j = 0; j < U.cols; ++j) proj.at(u, j) = U.at(u * d + t, j);
    stacked = hstack(stacked, proj);
  }
  Mat V = col_space_basis(stacked);
  if (shrink_value(s, V) < required_shrink)
    throw internal_error("compressed subspace shrinks by " +
                         std::to_string(shrink_value(s, V)) + ", expected at least " +
                         std::to_string(required_shrink));
  return V;
}

// ---------------------------------------------------------------------------
// Data reduction: replace the coefficients of a point by elements of a small
// fixed set S while keeping the rank at least target_rank. Greedy, one
// coordinate at a time, taking the first member of S that preserves the
// rank. Works because an r x r minor is a polynomial of degree at most r in
// any single coefficient, so it has at most r roots and |S| = r + 1 always
// contains a good value.
// ---------------------------------------------------------------------------

// The default evaluation set: the first target_rank + 1 enumerated field
// elements (0, 1, .., r over the rationals).
inline ValueVec default_sample_set(const FieldPtr& F, int target_rank) {
  const BigInt need = target_rank + 1;
  if (auto card = F->cardinality(); card && *card < need)
    throw size_error("data reduction needs |F| >= target rank + 1 = " + need.str() +
                     ", but |" + F->name() + "| = " + card->str());
  ValueVec S;
  S.reserve(static_cast<std::size_t>(target_rank) + 1);
  for (int i = 0; i <= target_rank; ++i) S.push_back(F->element_at(i));
  return S;
}

// Reduces the coefficients of `point` (over the generator list of `s`,
// entry by entry through the coefficient matrices) so every entry lies in S.
// Requires rank(assemble) >= target_rank on entry; preserves it throughout.
// `rank_ok(A, t)` must decide rank(A) >= t exactly; callers with faster
// certified procedures (modular bounds with exact fallback) pass their own.
inline BlowupPoint reduce_coefficients(const MatrixSpace& s, BlowupPoint point, int target_rank,
                                       const ValueVec* sample_set = nullptr,
                                       const std::function<bool(const Mat&, int)>& rank_ok = {}) {
  check_point_shape(s, point);
  const FieldPtr& F = s.F;
  const ValueVec S = sample_set ? *sample_set : default_sample_set(F, target_rank);
  if (static_cast<int>(S.size()) < target_rank + 1)
    throw argument_error("sample set must have at least target_rank + 1 elements");
  const auto rank_at_least = [&](const Mat& m, int t) {
    return rank_ok ? rank_ok(m, t) : mat_rank(m) >= t;
  };

  Mat A = assemble(s, point);
  if (!rank_at_least(A, target_rank))
    throw precondition_error("data reduction requires rank >= " + std::to_string(target_rank));

  // Changing coefficient (i, k, l) by delta shifts the assembled matrix by
  // delta * B_i at the (k, l) inner positions; apply updates in place.
  const auto shift = [&](int i, int k, int l, const Value& delta) {
    const Mat& B = s.basis[i];
    for (int u = 0; u < s.rows; ++u)
      for (int v = 0; v < s.cols; ++v) {
        if (F->is_zero(B.at(u, v))) continue;
        Value& dst = A.at(u * point.a + k, v * point.b + l);
        dst = F->add(dst, F->mul(delta, B.at(u, v)));
      }
  };

  for (int i = 0; i < s.generator_count(); ++i)
    for (int k = 0; k < point.a; ++k)
      for (int l = 0; l < point.b; ++l) {
        Value& cur = point.coeffs[i].at(k, l);
        bool already = false;
        for (const Value& cand : S)
          if (F->eq(cur, cand)) {
            already = true;
            break;
          }
        if (already) continue;
        bool done = false;
        for (const Value& cand : S) {
          shift(i, k, l, F->sub(cand, cur));
          if (rank_at_least(A, target_rank)) {
            cur = cand;
            done = true;
            break;
          }
          shift(i, k, l, F->sub(cur, cand));
        }
        if (!done)
          throw internal_error("data reduction found no replacement in a set of size " +
                               std::to_string(S.size()));
      }
  return point;
}

// ---------------------------------------------------------------------------
// Certificates. A certificate for a square space asserts its noncommutative
// rank r two-sidedly: a degree-d point of the blow-up with exact rank r*d
// (lower bound) and an (n - r)-shrunk subspace (upper bound). The degree
// bound the point must satisfy depends on which reduction produced it.
// ---------------------------------------------------------------------------

struct BoundPolicy {
  std::string kind = "greedy";  // "greedy" | "dm" | "small-field"
  int e = 1;                    // extension degree used by the small-field route
};

struct Certificate {
  int rank = 0;    // r * degree
  int degree = 1;  // d
  BlowupPoint point;
  Mat subspace;    // n x k matrix whose columns span the shrunk subspace
  int shrink = 0;  // n - r
  BoundPolicy bound_policy;
};

inline int degree_bound(const BoundPolicy& policy, int r) {
  if (policy.kind == "greedy") return r + 1;
  if (policy.kind == "dm") return r >= 2 ? r - 1 : 1;
  if (policy.kind == "small-field") return (r + 1) * policy.e;
  throw input_error("unknown bound policy '" + policy.kind + "'");
}

inline VerifyReport verify_certificate(const MatrixSpace& s, const Certificate& cert) {
  VerifyReport report;
  if (s.rows != s.cols) {
    report.fail("space is not square");
    return report;
  }
  const int n = s.rows;
  if (cert.shrink < 0 || cert.shrink > n) {
    report.fail("shrink " + std::to_string(cert.shrink) + " is outside [0, " +
                std::to_string(n) + "]");
    return report;
  }
  const int r = n - cert.shrink;

  if (cert.degree < 1) report.fail("degree must be positive");
  if (cert.point.a != cert.degree || cert.point.b != cert.degree)
    report.fail("witness point is not a (d, d) blow-up point");
  if (cert.rank != r * cert.degree)
    report.fail("declared rank " + std::to_string(cert.rank) + " differs from r*d = " +
                std::to_string(r * cert.degree));

  if (!report.ok) return report;

  try {
    check_point_shape(s, cert.point);
  } catch (const error& e) {
    report.fail(e.what());
    return report;
  }

  const int got = mat_rank(assemble(s, cert.point));
  if (got != cert.rank)
    report.fail("witness point has rank " + std::to_string(got) + ", expected exactly " +
                std::to_string(cert.rank));

  if (cert.subspace.rows != n) {
    report.fail("subspace lives in the wrong dimension");
    return report;
  }
  if (mat_rank(cert.subspace) != cert.subspace.cols)
    report.fail("subspace columns are not independent");
  const int sv = shrink_value(s, cert.subspace);
  if (sv < cert.shrink)
    report.fail("subspace shrinks by " + std::to_string(sv) + ", needs " +
                std::to_string(cert.shrink));

  int bound = 0;
  try {
    bound = degree_bound(cert.bound_policy, r);
  } catch (const error& e) {
    report.fail(e.what());
    return report;
  }
  if (cert.bound_policy.e < 1) report.fail("bound policy extension degree must be positive");
  if (cert.degree > bound)
    report.fail("degree " + std::to_string(cert.degree) + " exceeds the '" +
                cert.bound_policy.kind + "' bound " + std::to_string(bound));
  return report;
}

}  // namespace ncrank
