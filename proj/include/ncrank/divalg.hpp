#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ncrank/errors.hpp"
#include "ncrank/fields.hpp"
#include "ncrank/matrix.hpp"
#include "ncrank/towers.hpp"

// Realization of a degree-d cyclic extension E/K as a maximal commutative
// subfield of M(d, K), extended by a twist element u = Y * S (S the matrix of
// the Galois generator, Y a fresh transcendental) into a basis of M(d, K(Y))
// whose span over the invariant subfield K(Y^d) is a division algebra: the
// cyclic algebra (E(Y^d)/K(Y^d), sigma, Y^d). Since Y^d has valuation one at
// the Y-adic place, which is unramified in E(Y^d), no nonzero element of the
// span can be singular.

namespace ncrank {

namespace detail {

// Maximum polynomial degree anywhere inside a value, descending through
// coordinate vectors and rational-function numerators/denominators.
inline long long deep_degree(const Value& v) {
  if (std::holds_alternative<BigRat>(v.rep) || std::holds_alternative<std::uint64_t>(v.rep))
    return 0;
  if (const auto* vec = std::get_if<std::shared_ptr<const ValueVec>>(&v.rep)) {
    long long d = 0;
    for (const auto& c : **vec) d = std::max(d, deep_degree(c));
    return d;
  }
  const RatFuncRep& r = v.ratfunc();
  long long d = 0;
  if (!r.num.empty()) d = std::max(d, static_cast<long long>(r.num.size()) - 1);
  if (!r.den.empty()) d = std::max(d, static_cast<long long>(r.den.size()) - 1);
  for (const auto& c : r.num) d = std::max(d, deep_degree(c));
  for (const auto& c : r.den) d = std::max(d, deep_degree(c));
  return d;
}

// Tests membership in K(Y^d): in lowest terms with a monic denominator, a
// rational function lies in the power subfield exactly when every nonzero
// numerator and denominator coefficient sits at an exponent divisible by d.
inline bool in_power_subfield(const FieldPtr& coeff_field, const RatFuncRep& r, int d) {
  for (std::size_t k = 0; k < r.num.size(); ++k)
    if (!coeff_field->is_zero(r.num[k]) && k % static_cast<std::size_t>(d) != 0) return false;
  for (std::size_t k = 0; k < r.den.size(); ++k)
    if (!coeff_field->is_zero(r.den[k]) && k % static_cast<std::size_t>(d) != 0) return false;
  return true;
}

// Evaluates a rational function at a base-field point; empty when the
// denominator vanishes there.
inline std::optional<Value> ratfunc_eval_at(const std::shared_ptr<const RatFuncField>& R,
                                            const Value& v, const Value& x) {
  const RatFuncRep& r = v.ratfunc();
  const FieldPtr B = R->base_field();
  const Value den = poly_eval(B, r.den, x);
  if (B->is_zero(den)) return std::nullopt;
  return B->mul(poly_eval(B, r.num, x), B->inv(den));
}

// Specialization points for the two-variable tower F(X)(Y): evaluating
// (Y, X) -> (y0, x0) is a ring homomorphism wherever denominators survive, so
// ranks of specialized matrices are certified lower bounds on ranks over the
// tower. Exact elimination over the tower itself is a last resort — nested
// rational-function gcds blow up badly.
struct SpecGrid {
  std::shared_ptr<const RatFuncField> KYr;
  std::shared_ptr<const RatFuncField> Kr;
  FieldPtr F;
  std::vector<Value> ys;
  std::vector<Value> xs;
  bool usable = false;
};

inline SpecGrid make_spec_grid(const FieldPtr& KY) {
  SpecGrid g;
  g.KYr = std::dynamic_pointer_cast<const RatFuncField>(KY);
  if (g.KYr) g.Kr = std::dynamic_pointer_cast<const RatFuncField>(g.KYr->base_field());
  if (!g.Kr) return g;
  g.F = g.Kr->base_field();
  g.ys.push_back(g.Kr->generator());
  for (int k = 1; k <= 4; ++k) {
    const Value yk = g.Kr->from_int(k);
    if (!g.Kr->is_zero(yk)) g.ys.push_back(yk);
    const Value xk = g.F->from_int(k);
    if (!g.F->is_zero(xk)) g.xs.push_back(xk);
  }
  if (const auto Fr = std::dynamic_pointer_cast<const RatFuncField>(g.F)) {
    // Small-characteristic function bases have few integer points; the
    // variable itself and its neighbours keep the grid generic.
    const FieldPtr B = Fr->base_field();
    g.xs.insert(g.xs.begin(), Fr->generator());
    g.xs.push_back(Fr->add(Fr->generator(), Fr->one()));
    g.xs.push_back(Fr->from_poly(ValueVec{B->one(), B->one(), B->one()}));
  }
  g.usable = !g.ys.empty() && !g.xs.empty();
  return g;
}

inline std::optional<Mat> specialize_mat(const SpecGrid& g, const Mat& M, const Value& y0,
                                         const Value& x0) {
  Mat out(g.F, M.rows, M.cols);
  for (std::size_t i = 0; i < M.e.size(); ++i) {
    const auto vy = ratfunc_eval_at(g.KYr, M.e[i], y0);
    if (!vy) return std::nullopt;
    const auto vx = ratfunc_eval_at(g.Kr, *vy, x0);
    if (!vx) return std::nullopt;
    out.e[i] = *vx;
  }
  return out;
}

}  // namespace detail

struct DivisionAlgebraBasis {
  int d = 1;
  FieldPtr K;                // coefficient field of the extension
  FieldPtr KY;               // K(Y), the entry field of the basis matrices
  std::vector<Mat> gamma;    // d^2 matrices; gamma[i*d + j] = rho(b_j) * u^i
  Mat C;                     // twist matrix: C rho(b) C^{-1} = rho(sigma(b)), C^d = I
  Mat u;                     // Y * C
  long long delta = 0;       // max degree over all entries of gamma
  std::string base_label;
};

inline DivisionAlgebraBasis build_division_algebra(const CyclicExtension& E) {
  {
    // Full (exhaustive-associativity) certification is the extension
    // builder's job; this gate re-checks the affordable invariants so a
    // corrupted extension fails loudly instead of producing a bad basis.
    const VerifyReport pre = check_cyclic_extension(E, /*exhaustive_triples=*/false);
    if (!pre.ok)
      throw precondition_error("cyclic extension invariants do not hold: " + pre.failures.front());
  }
  const int d = E.degree;
  const auto KY = std::make_shared<const RatFuncField>(E.base, "Y");
  const FieldPtr KYf = KY;
  auto lift = [&](const Value& v) { return KY->from_poly(ValueVec{v}); };
  auto lift_mat = [&](const Mat& m) {
    Mat out(KYf, m.rows, m.cols);
    for (std::size_t i = 0; i < m.e.size(); ++i) out.e[i] = lift(m.e[i]);
    return out;
  };

  std::vector<Mat> rho(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) rho[static_cast<std::size_t>(j)] = lift_mat(E.rho(E.basis_vec(j)));

  // The matrix of sigma conjugates the regular representation to its Galois
  // twist and has order d, so it serves as the twist matrix directly. (A
  // generic solution of the intertwining system is rho(e) * S whose d-th
  // power is the norm of e; the norm-one representative is S itself.)
  const Mat C = lift_mat(E.sigma);
  for (int j = 0; j < d; ++j) {
    const Mat rho_sig = lift_mat(E.rho(E.sigma_vec(E.basis_vec(j))));
    if (!mat_eq(mat_mul(C, rho[static_cast<std::size_t>(j)]), mat_mul(rho_sig, C)))
      throw internal_error("twist relation failed for a basis element");
  }
  {
    Mat cp = Mat::identity(KYf, d);
    for (int i = 0; i < d; ++i) cp = mat_mul(cp, C);
    if (!mat_eq(cp, Mat::identity(KYf, d)))
      throw internal_error("twist matrix does not have order d");
  }

  DivisionAlgebraBasis out;
  out.d = d;
  out.K = E.base;
  out.KY = KYf;
  out.C = C;
  out.u = mat_scale(KY->generator(), C);
  out.base_label = E.base->name();

  std::vector<Mat> upow(static_cast<std::size_t>(d));
  upow[0] = Mat::identity(KYf, d);
  for (int i = 1; i < d; ++i) upow[static_cast<std::size_t>(i)] =
      mat_mul(upow[static_cast<std::size_t>(i - 1)], out.u);
  out.gamma.reserve(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      out.gamma.push_back(mat_mul(rho[static_cast<std::size_t>(j)], upow[static_cast<std::size_t>(i)]));

  long long base_deg = 0;
  for (const auto& row : E.table)
    for (const auto& v : row) base_deg = std::max(base_deg, detail::deep_degree(v));
  for (const auto& v : E.sigma.e) base_deg = std::max(base_deg, detail::deep_degree(v));
  for (const auto& g : out.gamma)
    for (const auto& v : g.e) out.delta = std::max(out.delta, detail::deep_degree(v));
  const long long bound = static_cast<long long>(d + 1) * std::max<long long>(1, base_deg) + d;
  if (out.delta > bound)
    throw internal_error("basis entry degrees exceed the expected bound (" +
                         std::to_string(out.delta) + " > " + std::to_string(bound) + ")");
  return out;
}

// Checks, in order: the gamma matrices span M(d, K(Y)); products of basis
// elements re-expand with coefficients in K(Y^d); u conjugates the embedded
// extension by its Galois generator; u^d = Y^d * I. Stops at the first
// violated relation.
inline VerifyReport verify_division_relations(const DivisionAlgebraBasis& D,
                                              const CyclicExtension& E) {
  VerifyReport rep;
  const int d = D.d;
  const FieldPtr KY = D.KY;
  if (static_cast<int>(D.gamma.size()) != d * d) {
    rep.fail("expected d^2 basis matrices");
    return rep;
  }
  for (const auto& g : D.gamma)
    if (g.rows != d || g.cols != d) {
      rep.fail("basis matrices must be d x d");
      return rep;
    }

  const auto KYr = std::dynamic_pointer_cast<const RatFuncField>(KY);
  if (!KYr) {
    rep.fail("entries must live in a rational function field over the coefficient field");
    return rep;
  }

  // Span. Exact elimination over K(Y) suffers badly from degree growth, so
  // try specializations first: a full-rank specialized vectorization already
  // proves full rank over K(Y). Only a basis that fails the whole grid pays
  // for the exact decision.
  Mat M(KY, d * d, d * d);
  for (int i = 0; i < d * d; ++i)
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c)
        M.at(r * d + c, i) = D.gamma[static_cast<std::size_t>(i)].at(r, c);
  const detail::SpecGrid grid = detail::make_spec_grid(KY);
  bool span_full = false;
  bool span_decided = false;
  if (grid.usable) {
    for (const Value& y0 : grid.ys) {
      if (span_decided) break;
      for (const Value& x0 : grid.xs)
        if (const auto Ms = detail::specialize_mat(grid, M, y0, x0))
          if (mat_rank(*Ms) == d * d) {
            span_full = span_decided = true;
            break;
          }
    }
  }
  if (!span_decided) span_full = mat_rank(M) == d * d;
  if (!span_full) {
    rep.fail("the basis does not span the full matrix algebra");
    return rep;
  }

  // Closure. In this basis gamma[i1*d+j1] * gamma[i2*d+j2] =
  // rho(b_{j1} sigma^{i1}(b_{j2})) u^{i1+i2} and u^d = Y^d I, so each product
  // must re-expand over slots ((i1+i2) mod d, *) with coefficients
  // c_j Y^{d floor((i1+i2)/d)} — visibly in K(Y^d), with c the coordinates of
  // b_{j1} sigma^{i1}(b_{j2}). Checking that identity proves closure without
  // any solve; a mismatch (reordered or foreign basis) falls back to the
  // exact solve so membership is still decided honestly.
  std::vector<std::vector<ValueVec>> sig_pow(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) sig_pow[0].push_back(E.basis_vec(j));
  for (int i = 1; i < d; ++i)
    for (int j = 0; j < d; ++j)
      sig_pow[static_cast<std::size_t>(i)].push_back(
          E.sigma_vec(sig_pow[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)]));
  auto lift_coeff = [&](const Value& v) { return KYr->from_poly(ValueVec{v}); };
  std::optional<Mat> exact_inverse;
  for (int a = 0; a < d * d; ++a)
    for (int b = 0; b < d * d; ++b) {
      const int i1 = a / d, j1 = a % d, i2 = b / d, j2 = b % d;
      const Mat p =
          mat_mul(D.gamma[static_cast<std::size_t>(a)], D.gamma[static_cast<std::size_t>(b)]);
      const ValueVec c = E.mul_vec(E.basis_vec(j1),
                                   sig_pow[static_cast<std::size_t>(i1)][static_cast<std::size_t>(j2)]);
      const int q = (i1 + i2) / d, i = (i1 + i2) % d;
      Value yq = KY->one();
      if (q > 0) {
        ValueVec mono(static_cast<std::size_t>(d) * q + 1, D.K->zero());
        mono[static_cast<std::size_t>(d) * q] = D.K->one();
        yq = KYr->from_poly(std::move(mono));
      }
      Mat combo = Mat::zero(KY, d, d);
      for (int j = 0; j < d; ++j) {
        if (D.K->is_zero(c[static_cast<std::size_t>(j)])) continue;
        const Value coeff = KY->mul(yq, lift_coeff(c[static_cast<std::size_t>(j)]));
        combo = mat_add(combo, mat_scale(coeff, D.gamma[static_cast<std::size_t>(i * d + j)]));
      }
      if (mat_eq(p, combo)) continue;
      if (!exact_inverse) {
        exact_inverse = mat_inverse(M);
        if (!exact_inverse) throw internal_error("full-rank vectorization failed to invert");
      }
      Mat pv(KY, d * d, 1);
      for (int r = 0; r < d; ++r)
        for (int cc = 0; cc < d; ++cc) pv.at(r * d + cc, 0) = p.at(r, cc);
      const Mat coeff = mat_mul(*exact_inverse, pv);
      for (int k = 0; k < d * d; ++k)
        if (!detail::in_power_subfield(D.K, coeff.at(k, 0).ratfunc(), d)) {
          rep.fail("product of basis elements " + std::to_string(a) + " and " + std::to_string(b) +
                   " leaves the invariant-coefficient span");
          return rep;
        }
    }

  auto lift = [&](const Value& v) { return KYr->from_poly(ValueVec{v}); };
  auto lift_mat = [&](const Mat& m) {
    Mat out(KY, m.rows, m.cols);
    for (std::size_t i = 0; i < m.e.size(); ++i) out.e[i] = lift(m.e[i]);
    return out;
  };
  for (int j = 0; j < d; ++j) {
    const Mat rj = lift_mat(E.rho(E.basis_vec(j)));
    const Mat rs = lift_mat(E.rho(E.sigma_vec(E.basis_vec(j))));
    if (!mat_eq(mat_mul(D.u, rj), mat_mul(rs, D.u))) {
      rep.fail("the twist element does not conjugate basis element " + std::to_string(j) +
               " by the Galois generator");
      return rep;
    }
  }

  Mat up = Mat::identity(KY, d);
  for (int i = 0; i < d; ++i) up = mat_mul(up, D.u);
  const Mat want = mat_scale(KY->pow(KYr->generator(), BigInt(d)), Mat::identity(KY, d));
  if (!mat_eq(up, want)) {
    rep.fail("u^d is not Y^d times the identity");
    return rep;
  }
  return rep;
}

// Decides whether a square matrix over K(Y) is invertible. Specialized ranks
// are certified lower bounds, so full rank at any grid point settles the
// question; exact elimination only runs when the whole grid degenerates,
// which for span elements means a genuine zero divisor (singular at every
// point). Always exact, usually cheap.
inline bool invertible_over_entry_field(const DivisionAlgebraBasis& D, const Mat& M) {
  if (M.rows != M.cols) throw argument_error("invertibility needs a square matrix");
  const detail::SpecGrid grid = detail::make_spec_grid(D.KY);
  if (grid.usable)
    for (const Value& y0 : grid.ys)
      for (const Value& x0 : grid.xs)
        if (const auto Ms = detail::specialize_mat(grid, M, y0, x0))
          if (mat_rank(*Ms) == M.rows) return true;
  return mat_rank(M) == M.rows;
}

// Linear combination of the basis with coefficients in the invariant subfield
// K(Y^d): coeffs[i] lists the integer coefficients of a polynomial in Y^d for
// gamma[i], so coeffs[i][k] multiplies Y^{d k} gamma[i].
inline Mat central_combination(const DivisionAlgebraBasis& D,
                               const std::vector<std::vector<long long>>& coeffs) {
  if (coeffs.size() != D.gamma.size())
    throw argument_error("need one coefficient polynomial per basis matrix");
  const auto KY = std::static_pointer_cast<const RatFuncField>(D.KY);
  Mat acc = Mat::zero(D.KY, D.d, D.d);
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i].empty()) continue;
    ValueVec poly(static_cast<std::size_t>(D.d) * (coeffs[i].size() - 1) + 1, D.K->zero());
    bool nonzero = false;
    for (std::size_t k = 0; k < coeffs[i].size(); ++k) {
      if (coeffs[i][k] == 0) continue;
      poly[static_cast<std::size_t>(D.d) * k] = D.K->from_int(coeffs[i][k]);
      nonzero = true;
    }
    if (!nonzero) continue;
    const Value c = KY->from_poly(std::move(poly));
    acc = mat_add(acc, mat_scale(c, D.gamma[i]));
  }
  return acc;
}

}  // namespace ncrank
