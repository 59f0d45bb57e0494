#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncrank/errors.hpp"
#include "ncrank/fields.hpp"
#include "ncrank/matrix.hpp"

// Cyclic extensions of rational function fields, in every characteristic:
// Kummer radicals Y^m = X for the part of the degree coprime to char, an
// Artin-Schreier tower for the p-power part, and their tensor product.
// Also: root-of-unity provisioning (cyclotomic fields over Q, subfield
// search over finite fields), first-irreducible finite field construction,
// and regular-representation embeddings into matrix algebras.

namespace ncrank {

// Degrees above this are refused; every construction here is O(degree^5) or
// worse in field operations, so the cap keeps accidental requests bounded.
inline constexpr int kMaxCyclicDegree = 64;

namespace detail {

inline ValueVec vec_zero(const FieldPtr& F, int n) {
  return ValueVec(static_cast<std::size_t>(n), F->zero());
}

inline ValueVec vec_add(const FieldPtr& F, const ValueVec& a, const ValueVec& b) {
  ValueVec r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = F->add(r[i], b[i]);
  return r;
}

inline ValueVec vec_sub(const FieldPtr& F, const ValueVec& a, const ValueVec& b) {
  ValueVec r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = F->sub(r[i], b[i]);
  return r;
}

inline ValueVec vec_scale(const FieldPtr& F, const Value& c, const ValueVec& a) {
  ValueVec r(a);
  for (auto& v : r) v = F->mul(c, v);
  return r;
}

inline bool vec_eq(const FieldPtr& F, const ValueVec& a, const ValueVec& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!F->eq(a[i], b[i])) return false;
  return true;
}

inline bool vec_is_zero(const FieldPtr& F, const ValueVec& a) {
  for (const auto& v : a)
    if (!F->is_zero(v)) return false;
  return true;
}

// Multiplication of coordinate vectors through a structure-constant table
// (deg^2 entries of length deg, row-major in the two basis indices).
inline ValueVec table_mul(const FieldPtr& F, int deg, const std::vector<ValueVec>& table,
                          const ValueVec& a, const ValueVec& b) {
  ValueVec out = vec_zero(F, deg);
  for (int i = 0; i < deg; ++i) {
    if (F->is_zero(a[static_cast<std::size_t>(i)])) continue;
    for (int j = 0; j < deg; ++j) {
      const Value c = F->mul(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(j)]);
      if (F->is_zero(c)) continue;
      const ValueVec& t = table[static_cast<std::size_t>(i) * deg + j];
      for (int k = 0; k < deg; ++k) {
        if (F->is_zero(t[static_cast<std::size_t>(k)])) continue;
        out[static_cast<std::size_t>(k)] = F->add(out[static_cast<std::size_t>(k)],
                                                  F->mul(c, t[static_cast<std::size_t>(k)]));
      }
    }
  }
  return out;
}

inline ValueVec mat_apply(const Mat& m, const ValueVec& x) {
  ValueVec out = vec_zero(m.F, m.rows);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) {
      const Value& c = m.at(i, j);
      if (!m.F->is_zero(c))
        out[static_cast<std::size_t>(i)] =
            m.F->add(out[static_cast<std::size_t>(i)], m.F->mul(c, x[static_cast<std::size_t>(j)]));
    }
  return out;
}

inline std::vector<int> prime_factors_of(int n) {
  std::vector<int> ps;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p != 0) continue;
    ps.push_back(p);
    while (n % p == 0) n /= p;
  }
  if (n > 1) ps.push_back(n);
  return ps;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CyclicExtension: a commutative algebra over `base` given by structure
// constants, with a distinguished algebra automorphism sigma of multiplicative
// order exactly `degree` whose fixed space is base * 1. Elements are handled
// as coordinate vectors over `base`.
// ---------------------------------------------------------------------------
struct CyclicExtension {
  FieldPtr base;
  int degree = 1;
  std::vector<ValueVec> table;  // degree^2 entries, each of length degree
  Mat sigma;                    // coordinate matrix of the automorphism
  std::vector<std::string> basis_labels;

  const ValueVec& entry(int i, int j) const {
    return table[static_cast<std::size_t>(i) * degree + j];
  }
  ValueVec zero_vec() const { return detail::vec_zero(base, degree); }
  ValueVec basis_vec(int i) const {
    ValueVec v = zero_vec();
    v[static_cast<std::size_t>(i)] = base->one();
    return v;
  }
  ValueVec unit_vec() const { return basis_vec(0); }
  ValueVec embed_vec(const Value& c) const {
    ValueVec v = zero_vec();
    v[0] = c;
    return v;
  }
  ValueVec mul_vec(const ValueVec& a, const ValueVec& b) const {
    return detail::table_mul(base, degree, table, a, b);
  }
  ValueVec pow_vec(ValueVec a, std::uint64_t e) const {
    ValueVec r = unit_vec();
    while (e > 0) {
      if (e & 1) r = mul_vec(r, a);
      e >>= 1;
      if (e > 0) a = mul_vec(a, a);
    }
    return r;
  }
  ValueVec sigma_vec(const ValueVec& a) const { return detail::mat_apply(sigma, a); }

  // Regular representation over `base`: column j holds the coordinates of
  // x * b_j. An injective algebra homomorphism into degree x degree matrices.
  Mat rho(const ValueVec& x) const {
    Mat m(base, degree, degree);
    for (int j = 0; j < degree; ++j) {
      ValueVec col = mul_vec(x, basis_vec(j));
      for (int i = 0; i < degree; ++i) m.at(i, j) = col[static_cast<std::size_t>(i)];
    }
    return m;
  }
};

// ---------------------------------------------------------------------------
// Characteristic bookkeeping: splits d = p^s * d1 with p = char when the
// characteristic divides d, found literally by summing the identity element.
// ---------------------------------------------------------------------------
struct CharDecomposition {
  std::uint64_t p = 0;  // 0 when the characteristic does not divide d
  int s = 0;
  int d1 = 1;
};

inline CharDecomposition char_divides(const FieldPtr& F, int d) {
  if (d < 1) throw argument_error("degree must be positive");
  CharDecomposition out;
  out.d1 = d;
  Value acc = F->one();
  std::uint64_t p = 0;
  for (int k = 2; k <= d; ++k) {
    acc = F->add(acc, F->one());
    if (F->is_zero(acc)) {
      p = static_cast<std::uint64_t>(k);
      break;
    }
  }
  if (p == 0 || d % static_cast<int>(p) != 0) return out;
  out.p = p;
  int rest = d;
  while (rest % static_cast<int>(p) == 0) {
    rest /= static_cast<int>(p);
    ++out.s;
  }
  out.d1 = rest;
  return out;
}

// ---------------------------------------------------------------------------
// Roots of unity.
// ---------------------------------------------------------------------------
inline bool has_exact_order(const FieldPtr& F, const Value& g, int n) {
  if (F->is_zero(g)) return false;
  if (!F->eq(F->pow(g, BigInt(n)), F->one())) return false;
  for (int p : detail::prime_factors_of(n))
    if (F->eq(F->pow(g, BigInt(n / p)), F->one())) return false;
  return true;
}

// Finds an element of exact multiplicative order d1, or nullopt when the field
// has none that this library can locate: -1 handles d1 <= 2, extensions carry
// a distinguished root, and finite fields are searched through the power map
// g = c^((q-1)/d1) for c = 1, 2, ... in enumeration order.
inline std::optional<Value> find_unity_root(const FieldPtr& F, int d1) {
  if (d1 < 1) throw argument_error("root-of-unity order must be positive");
  if (d1 == 1) return F->one();
  if (d1 == 2) {
    if (F->characteristic() == 2) return std::nullopt;
    return F->from_int(-1);
  }
  if (auto E = std::dynamic_pointer_cast<const ExtensionField>(F)) {
    if (E->has_zeta() && E->zeta_order() % d1 == 0)
      return F->pow(E->zeta(), E->zeta_order() / d1);
  }
  if (auto q = F->cardinality()) {
    const BigInt group = *q - 1;
    if (group % d1 != 0) return std::nullopt;
    const BigInt expn = group / d1;
    for (BigInt c = 1; c < *q; ++c) {
      const Value g = F->pow(F->element_at(c), expn);
      if (has_exact_order(F, g, d1)) return g;
    }
    return std::nullopt;
  }
  if (F->kind() == Field::Kind::ratfunc) {
    auto R = std::static_pointer_cast<const RatFuncField>(F);
    if (auto z = find_unity_root(F->base_field(), d1)) return R->from_poly(ValueVec{*z});
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Finite fields by first irreducible polynomial. Candidates are monic of the
// given degree, enumerated by expanding an index into base-q digits for the
// lower coefficients; the first candidate passing the standard Frobenius
// test (x^{q^e} = x mod f, gcd(x^{q^{e/l}} - x, f) = 1 for primes l | e) wins.
// ---------------------------------------------------------------------------
inline bool is_irreducible(const FieldPtr& F, const detail::Poly& f) {
  const int e = detail::poly_deg(f);
  if (e <= 0) return false;
  if (e == 1) return true;
  const auto q = F->cardinality();
  if (!q) throw argument_error("irreducibility test requires a finite coefficient field");
  const detail::Poly x = detail::poly_x(F);
  std::vector<detail::Poly> frob(static_cast<std::size_t>(e) + 1);
  frob[0] = detail::poly_mod(F, x, f);
  for (int i = 1; i <= e; ++i) frob[static_cast<std::size_t>(i)] =
      detail::poly_pow_mod(F, frob[static_cast<std::size_t>(i - 1)], *q, f);
  if (!detail::poly_eq(F, frob[static_cast<std::size_t>(e)], frob[0])) return false;
  for (int l : detail::prime_factors_of(e)) {
    const detail::Poly diff =
        detail::poly_sub(F, frob[static_cast<std::size_t>(e / l)], frob[0]);
    const detail::Poly g = detail::poly_gcd_monic(F, diff, f);
    if (detail::poly_deg(g) != 0) return false;
  }
  return true;
}

inline detail::Poly first_irreducible(const FieldPtr& F, int e) {
  if (e < 1) throw argument_error("polynomial degree must be positive");
  const auto q = F->cardinality();
  if (!q) throw argument_error("first_irreducible requires a finite coefficient field");
  BigInt budget = 1;
  for (int i = 0; i < e; ++i) budget *= *q;
  for (BigInt k = 0; k < budget; ++k) {
    detail::Poly f(static_cast<std::size_t>(e) + 1, F->zero());
    BigInt rest = k;
    for (int i = 0; i < e; ++i) {
      f[static_cast<std::size_t>(i)] = F->element_at(rest % *q);
      rest /= *q;
    }
    f[static_cast<std::size_t>(e)] = F->one();
    if (is_irreducible(F, f)) return f;
  }
  throw internal_error("no irreducible polynomial found in a full enumeration");
}

// Quotient by a monic irreducible: structure constants are x^{i+j} mod f.
inline std::shared_ptr<const ExtensionField> extension_from_modulus(
    const FieldPtr& base, const detail::Poly& f, const std::string& label,
    std::optional<std::pair<ValueVec, BigInt>> zeta = std::nullopt) {
  const int e = detail::poly_deg(f);
  if (e < 1) throw argument_error("modulus must have positive degree");
  std::vector<detail::Poly> xpow(static_cast<std::size_t>(2 * e - 1));
  xpow[0] = detail::poly_const(base, base->one());
  for (std::size_t i = 1; i < xpow.size(); ++i)
    xpow[i] = detail::poly_mod(base, detail::poly_mul(base, xpow[i - 1], detail::poly_x(base)), f);
  std::vector<ValueVec> table;
  table.reserve(static_cast<std::size_t>(e) * e);
  for (int i = 0; i < e; ++i)
    for (int j = 0; j < e; ++j) {
      ValueVec row(static_cast<std::size_t>(e), base->zero());
      const detail::Poly& p = xpow[static_cast<std::size_t>(i + j)];
      for (std::size_t k = 0; k < p.size(); ++k) row[k] = p[k];
      table.push_back(std::move(row));
    }
  return std::make_shared<const ExtensionField>(base, e, std::move(table), label,
                                                std::move(zeta));
}

inline std::shared_ptr<const ExtensionField> build_fq(std::uint64_t p, int e) {
  const FieldPtr base = PrimeField::get(p);
  if (e == 1) throw argument_error("degree-1 prime power field is the prime field itself");
  const detail::Poly f = first_irreducible(base, e);
  BigInt q = 1;
  for (int i = 0; i < e; ++i) q *= p;
  return extension_from_modulus(base, f, "F" + q.str());
}

// ---------------------------------------------------------------------------
// Cyclotomic fields over Q. Phi_n is computed by dividing x^n - 1 by the
// cyclotomic polynomials of the proper divisors of n.
// ---------------------------------------------------------------------------
inline detail::Poly cyclotomic_poly(int n) {
  if (n < 1) throw argument_error("cyclotomic index must be positive");
  const FieldPtr F = Rationals::get();
  detail::Poly f(static_cast<std::size_t>(n) + 1, F->zero());
  f[0] = F->from_int(-1);
  f[static_cast<std::size_t>(n)] = F->one();
  for (int e = 1; e < n; ++e)
    if (n % e == 0) f = detail::poly_div_exact(F, f, cyclotomic_poly(e));
  return f;
}

// Q(zeta_{d1}) with the class of x as the distinguished root. For d1 <= 2 the
// rationals already contain the root, so they are returned unchanged.
inline FieldPtr cyclotomic_field(int d1) {
  if (d1 < 1) throw argument_error("root-of-unity order must be positive");
  if (d1 <= 2) return Rationals::get();
  const FieldPtr Q = Rationals::get();
  const detail::Poly f = cyclotomic_poly(d1);
  const int e = detail::poly_deg(f);
  ValueVec zc(static_cast<std::size_t>(e), Q->zero());
  zc[1] = Q->one();
  return extension_from_modulus(Q, f, "Q(zeta" + std::to_string(d1) + ")",
                                std::make_pair(std::move(zc), BigInt(d1)));
}

// Least extension of a finite field containing a root of unity of order d1:
// degree e' = ord_{d1}(q), modulus the first irreducible of that degree, and
// the root found through the power map then pinned as the distinguished root.
inline FieldPtr extension_with_zeta(const FieldPtr& F, int d1) {
  const auto q = F->cardinality();
  if (!q) throw argument_error("extension_with_zeta requires a finite base field");
  if (F->characteristic() != 0 && BigInt(d1) % F->characteristic() == 0)
    throw argument_error("no root of unity of order " + std::to_string(d1) +
                         " exists in characteristic " + F->characteristic().str());
  if ((*q - 1) % d1 == 0) return F;
  int e = 1;
  BigInt qe = *q % d1;
  while (qe != 1) {
    qe = (qe * (*q % d1)) % d1;
    ++e;
    if (e > d1) throw internal_error("order of q modulo d1 exceeded d1");
  }
  const detail::Poly f = first_irreducible(F, e);
  const std::string label = F->name() + "(zeta" + std::to_string(d1) + ")";
  const auto bare = extension_from_modulus(F, f, label);
  const auto z = find_unity_root(bare, d1);
  if (!z) throw internal_error("root of unity missing from a field built to contain it");
  return extension_from_modulus(F, f, label, std::make_pair(z->vec(), BigInt(d1)));
}

// Returns a field extending F that contains a root of unity of order d1
// (possibly F itself). Supported starting points: Q, finite fields, and any
// field already carrying a suitable distinguished root.
inline FieldPtr ensure_unity_root(const FieldPtr& F, int d1) {
  if (find_unity_root(F, d1)) return F;
  if (F->characteristic() != 0 && BigInt(d1) % F->characteristic() == 0)
    throw argument_error("no root of unity of order " + std::to_string(d1) +
                         " exists in characteristic " + F->characteristic().str());
  if (F->kind() == Field::Kind::rationals) return cyclotomic_field(d1);
  if (F->cardinality()) return extension_with_zeta(F, d1);
  throw size_error("providing a root of unity of order " + std::to_string(d1) + " over " +
                   F->name() +
                   " is not supported; start from Q or a finite field, or supply an "
                   "extension already carrying one");
}

// ---------------------------------------------------------------------------
// Kummer extension: K[Y]/(Y^{d1} - X) over K = F'(X), with sigma(Y) = zeta*Y.
// ---------------------------------------------------------------------------
inline CyclicExtension build_kummer(const FieldPtr& Fprime, int d1, const Value& zeta) {
  if (d1 < 1) throw argument_error("Kummer degree must be positive");
  if (d1 > kMaxCyclicDegree)
    throw size_error("cyclic extension degree " + std::to_string(d1) +
                     " exceeds the supported budget " + std::to_string(kMaxCyclicDegree));
  if (Fprime->characteristic() != 0 && BigInt(d1) % Fprime->characteristic() == 0)
    throw argument_error("Kummer degree must be coprime to the characteristic");
  if (!has_exact_order(Fprime, zeta, d1))
    throw argument_error("the supplied root of unity does not have exact order " +
                         std::to_string(d1));
  const auto K = std::make_shared<const RatFuncField>(Fprime, "X");
  const FieldPtr Kf = K;
  const Value X = K->generator();

  CyclicExtension E;
  E.base = Kf;
  E.degree = d1;
  E.table.reserve(static_cast<std::size_t>(d1) * d1);
  for (int i = 0; i < d1; ++i)
    for (int j = 0; j < d1; ++j) {
      ValueVec row = detail::vec_zero(Kf, d1);
      if (i + j < d1)
        row[static_cast<std::size_t>(i + j)] = Kf->one();
      else
        row[static_cast<std::size_t>(i + j - d1)] = X;
      E.table.push_back(std::move(row));
    }
  E.sigma = Mat(Kf, d1, d1);
  for (int j = 0; j < d1; ++j)
    E.sigma.at(j, j) = K->from_poly(ValueVec{Fprime->pow(zeta, BigInt(j))});
  E.basis_labels.push_back("1");
  for (int j = 1; j < d1; ++j)
    E.basis_labels.push_back(j == 1 ? "Y1" : "Y1^" + std::to_string(j));
  return E;
}

inline CyclicExtension build_kummer(const FieldPtr& Fprime, int d1) {
  const auto z = find_unity_root(Fprime, d1);
  if (!z)
    throw argument_error("no root of unity of order " + std::to_string(d1) + " found in " +
                         Fprime->name() + "; extend the field first");
  return build_kummer(Fprime, d1, *z);
}

// ---------------------------------------------------------------------------
// Artin-Schreier tower over F_p(Z): at each level, omega^p - omega = alpha
// with alpha produced from a trace-one beta by the additive Hilbert-90
// telescope, so that the Galois generator extends by omega -> omega + beta.
// ---------------------------------------------------------------------------
struct AswTower {
  std::uint64_t p = 0;
  int levels = 0;                        // number of tower steps s
  std::vector<ValueVec> alphas;          // alphas[j]: coordinates over the level-j basis
  std::vector<ValueVec> betas;           // betas[j]: likewise
  std::vector<long long> degree_ledger;  // max polynomial degree per level, 0..s
  std::vector<std::string> basis_labels;
};

namespace detail {

// Degree of a rational-function value, max over numerator and denominator.
inline long long ratfunc_degree(const Value& v) {
  const RatFuncRep& r = v.ratfunc();
  const long long dn = r.num.empty() ? 0 : static_cast<long long>(r.num.size()) - 1;
  const long long dd = r.den.empty() ? 0 : static_cast<long long>(r.den.size()) - 1;
  return dn > dd ? dn : dd;
}

inline bool ratfunc_is_polynomial(const Value& v) { return v.ratfunc().den.size() == 1; }

struct TowerLevel {
  int deg = 1;
  std::vector<ValueVec> table;
  Mat sigma;
  std::vector<std::string> labels;
};

inline long long tower_level_max_degree(const FieldPtr& K, const TowerLevel& L) {
  long long d = 0;
  for (const auto& row : L.table)
    for (const auto& v : row) {
      if (!ratfunc_is_polynomial(v))
        throw internal_error("tower arithmetic left the polynomial ring");
      d = std::max(d, ratfunc_degree(v));
    }
  for (const auto& v : L.sigma.e) {
    if (!ratfunc_is_polynomial(v))
      throw internal_error("tower arithmetic left the polynomial ring");
    d = std::max(d, ratfunc_degree(v));
  }
  (void)K;
  return d;
}

}  // namespace detail

inline std::pair<AswTower, CyclicExtension> build_asw_tower(std::uint64_t p, int s) {
  const FieldPtr Fp = PrimeField::get(p);  // validates primality
  if (s < 0) throw argument_error("tower height must be nonnegative");
  {
    BigInt deg = 1;
    for (int i = 0; i < s; ++i) deg *= p;
    if (deg > kMaxCyclicDegree)
      throw size_error("cyclic extension degree " + deg.str() +
                       " exceeds the supported budget " + std::to_string(kMaxCyclicDegree));
  }
  const auto KR = std::make_shared<const RatFuncField>(Fp, "Z");
  const FieldPtr K = KR;
  const Value Z = KR->generator();
  const int pi = static_cast<int>(p);

  // Pascal triangle modulo p for the binomial expansions of (omega + beta)^k.
  std::vector<std::vector<std::uint64_t>> binom(static_cast<std::size_t>(pi));
  for (int k = 0; k < pi; ++k) {
    binom[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(k) + 1, 1);
    for (int r = 1; r < k; ++r)
      binom[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)] =
          (binom[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(r - 1)] +
           binom[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(r)]) %
          p;
  }

  detail::TowerLevel L;
  L.deg = 1;
  L.table = {ValueVec{K->one()}};
  L.sigma = Mat::identity(K, 1);
  L.labels = {"1"};

  AswTower tower;
  tower.p = p;
  tower.levels = s;
  tower.degree_ledger.push_back(0);

  auto lvl_mul = [&](const ValueVec& a, const ValueVec& b) {
    return detail::table_mul(K, L.deg, L.table, a, b);
  };
  auto lvl_pow = [&](ValueVec a, std::uint64_t e) {
    ValueVec r = detail::vec_zero(K, L.deg);
    r[0] = K->one();
    while (e > 0) {
      if (e & 1) r = lvl_mul(r, a);
      e >>= 1;
      if (e > 0) a = lvl_mul(a, a);
    }
    return r;
  };

  for (int j = 0; j < s; ++j) {
    const int q = L.deg;  // p^j

    // beta_j = (-1)^j * (product of all omega_i^{p-1}) = +- the top basis element.
    ValueVec beta = detail::vec_zero(K, q);
    beta[static_cast<std::size_t>(q - 1)] = K->from_int(j % 2 == 0 ? 1 : -1);

    ValueVec alpha;
    if (j == 0) {
      alpha = ValueVec{Z};
    } else {
      // sigma-power cache for this level.
      std::vector<Mat> pw(static_cast<std::size_t>(q));
      pw[0] = Mat::identity(K, q);
      for (int k = 1; k < q; ++k) pw[static_cast<std::size_t>(k)] =
          mat_mul(pw[static_cast<std::size_t>(k - 1)], L.sigma);

      const ValueVec t = detail::vec_sub(K, lvl_pow(beta, p), beta);  // beta^p - beta
      ValueVec prefix = detail::vec_zero(K, q);                       // sum of t^{sigma^l}, l < k
      ValueVec acc = detail::vec_zero(K, q);
      for (int k = 1; k < q; ++k) {
        prefix = detail::vec_add(K, prefix, detail::mat_apply(pw[static_cast<std::size_t>(k - 1)], t));
        const ValueVec conj_beta = detail::mat_apply(pw[static_cast<std::size_t>(k)], beta);
        acc = detail::vec_add(K, acc, lvl_mul(conj_beta, prefix));
      }
      const Value eps = K->from_int(j % 2 == 0 ? -1 : 1);
      alpha = detail::vec_scale(K, eps, acc);
      // The defining identity sigma(alpha) - alpha = beta^p - beta; the
      // telescope determines alpha only up to sign, so fix it by checking.
      ValueVec lhs = detail::vec_sub(K, detail::mat_apply(L.sigma, alpha), alpha);
      if (!detail::vec_eq(K, lhs, t)) {
        alpha = detail::vec_scale(K, K->from_int(-1), alpha);
        lhs = detail::vec_sub(K, detail::mat_apply(L.sigma, alpha), alpha);
        if (!detail::vec_eq(K, lhs, t))
          throw internal_error("tower level failed its defining identity");
      }
    }
    tower.betas.push_back(beta);
    tower.alphas.push_back(alpha);

    // Extend: new basis elements omega^k * gamma_m at index k*q + m, with
    // omega^p = omega + alpha and sigma(omega) = omega + beta.
    const int D = pi * q;
    std::vector<ValueVec> table2(static_cast<std::size_t>(D) * D);
    for (int k = 0; k < pi; ++k)
      for (int m1 = 0; m1 < q; ++m1)
        for (int l = 0; l < pi; ++l)
          for (int m2 = 0; m2 < q; ++m2) {
            const ValueVec& delta = L.table[static_cast<std::size_t>(m1) * q + m2];
            ValueVec out = detail::vec_zero(K, D);
            if (k + l < pi) {
              for (int m = 0; m < q; ++m)
                out[static_cast<std::size_t>((k + l) * q + m)] = delta[static_cast<std::size_t>(m)];
            } else {
              const int r = k + l - pi;
              for (int m = 0; m < q; ++m)
                out[static_cast<std::size_t>((r + 1) * q + m)] = delta[static_cast<std::size_t>(m)];
              const ValueVec ad = lvl_mul(alpha, delta);
              for (int m = 0; m < q; ++m) {
                auto& slot = out[static_cast<std::size_t>(r * q + m)];
                slot = K->add(slot, ad[static_cast<std::size_t>(m)]);
              }
            }
            table2[static_cast<std::size_t>(k * q + m1) * D + (l * q + m2)] = std::move(out);
          }

    Mat sigma2(K, D, D);
    std::vector<ValueVec> beta_pow(static_cast<std::size_t>(pi));
    beta_pow[0] = detail::vec_zero(K, q);
    beta_pow[0][0] = K->one();
    for (int i = 1; i < pi; ++i)
      beta_pow[static_cast<std::size_t>(i)] = lvl_mul(beta_pow[static_cast<std::size_t>(i - 1)], beta);
    for (int k = 0; k < pi; ++k)
      for (int m = 0; m < q; ++m) {
        ValueVec sg(static_cast<std::size_t>(q));
        for (int i = 0; i < q; ++i) sg[static_cast<std::size_t>(i)] = L.sigma.at(i, m);
        for (int r = 0; r <= k; ++r) {
          const std::uint64_t c = binom[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)];
          if (c == 0) continue;
          ValueVec v = lvl_mul(beta_pow[static_cast<std::size_t>(k - r)], sg);
          if (c != 1) v = detail::vec_scale(K, K->from_int(static_cast<long long>(c)), v);
          for (int i = 0; i < q; ++i) {
            auto& slot = sigma2.at(r * q + i, k * q + m);
            slot = K->add(slot, v[static_cast<std::size_t>(i)]);
          }
        }
      }

    std::vector<std::string> labels2(static_cast<std::size_t>(D));
    for (int k = 0; k < pi; ++k)
      for (int m = 0; m < q; ++m) {
        const std::string& lower = L.labels[static_cast<std::size_t>(m)];
        std::string out;
        if (k == 0) {
          out = lower;
        } else {
          std::string w = "w" + std::to_string(j + 1);
          if (k > 1) w += "^" + std::to_string(k);
          out = lower == "1" ? w : lower + "*" + w;
        }
        labels2[static_cast<std::size_t>(k * q + m)] = std::move(out);
      }

    L.deg = D;
    L.table = std::move(table2);
    L.sigma = std::move(sigma2);
    L.labels = std::move(labels2);
    tower.degree_ledger.push_back(detail::tower_level_max_degree(K, L));
  }

  CyclicExtension E;
  E.base = K;
  E.degree = L.deg;
  E.table = L.table;
  E.sigma = L.sigma;
  E.basis_labels = L.labels;
  tower.basis_labels = L.labels;
  return {std::move(tower), std::move(E)};
}

// ---------------------------------------------------------------------------
// Transport and tensor: moving a tower built over F_p(Z) to F'(X) for any F'
// of characteristic p, and combining coprime-degree cyclic extensions over a
// common base with the product basis and the product automorphism.
// ---------------------------------------------------------------------------
inline CyclicExtension transport_cyclic(const CyclicExtension& E,
                                        const std::shared_ptr<const RatFuncField>& K2) {
  const FieldPtr src = E.base;
  if (src->kind() != Field::Kind::ratfunc)
    throw argument_error("transport expects an extension of a rational function field");
  const FieldPtr dst_base = K2->base_field();
  const FieldPtr src_base = src->base_field();
  if (src_base->characteristic() != dst_base->characteristic())
    throw argument_error("transport cannot change the characteristic");
  auto move_coeff = [&](const Value& c) {
    return dst_base->from_int(static_cast<long long>(c.word()));
  };
  auto move_value = [&](const Value& v) {
    const RatFuncRep& r = v.ratfunc();
    ValueVec num, den;
    num.reserve(r.num.size());
    den.reserve(r.den.size());
    for (const auto& c : r.num) num.push_back(move_coeff(c));
    for (const auto& c : r.den) den.push_back(move_coeff(c));
    return K2->div(K2->from_poly(std::move(num)), K2->from_poly(std::move(den)));
  };
  CyclicExtension out;
  out.base = K2;
  out.degree = E.degree;
  out.basis_labels = E.basis_labels;
  out.table.reserve(E.table.size());
  for (const auto& row : E.table) {
    ValueVec r2;
    r2.reserve(row.size());
    for (const auto& v : row) r2.push_back(move_value(v));
    out.table.push_back(std::move(r2));
  }
  out.sigma = Mat(out.base, E.sigma.rows, E.sigma.cols);
  for (std::size_t i = 0; i < E.sigma.e.size(); ++i) out.sigma.e[i] = move_value(E.sigma.e[i]);
  return out;
}

inline CyclicExtension tensor_cyclic(const CyclicExtension& A, const CyclicExtension& B) {
  if (!same_field(A.base, B.base))
    throw argument_error("tensor factors must share the coefficient field");
  const FieldPtr K = A.base;
  const int da = A.degree, db = B.degree;
  const int D = da * db;
  CyclicExtension out;
  out.base = K;
  out.degree = D;
  out.table.assign(static_cast<std::size_t>(D) * D, ValueVec());
  for (int i1 = 0; i1 < da; ++i1)
    for (int i2 = 0; i2 < db; ++i2)
      for (int j1 = 0; j1 < da; ++j1)
        for (int j2 = 0; j2 < db; ++j2) {
          const ValueVec& ta = A.entry(i1, j1);
          const ValueVec& tb = B.entry(i2, j2);
          ValueVec row(static_cast<std::size_t>(D));
          for (int k1 = 0; k1 < da; ++k1)
            for (int k2 = 0; k2 < db; ++k2)
              row[static_cast<std::size_t>(k1 * db + k2)] =
                  K->mul(ta[static_cast<std::size_t>(k1)], tb[static_cast<std::size_t>(k2)]);
          out.table[static_cast<std::size_t>(i1 * db + i2) * D + (j1 * db + j2)] =
              std::move(row);
        }
  out.sigma = kron(A.sigma, B.sigma);
  out.basis_labels.resize(static_cast<std::size_t>(D));
  for (int i1 = 0; i1 < da; ++i1)
    for (int i2 = 0; i2 < db; ++i2) {
      const std::string& la = A.basis_labels[static_cast<std::size_t>(i1)];
      const std::string& lb = B.basis_labels[static_cast<std::size_t>(i2)];
      std::string l = la == "1" ? lb : (lb == "1" ? la : la + "*" + lb);
      out.basis_labels[static_cast<std::size_t>(i1 * db + i2)] = std::move(l);
    }
  return out;
}

// Degree-d cyclic extension of F'(X): Kummer part for the characteristic-free
// part of d, a transported Artin-Schreier tower for the p-power part, and
// their tensor product when both are present.
inline CyclicExtension build_cyclic_extension(const FieldPtr& Fprime, int d) {
  if (d < 1) throw argument_error("degree must be positive");
  if (d > kMaxCyclicDegree)
    throw size_error("cyclic extension degree " + std::to_string(d) +
                     " exceeds the supported budget " + std::to_string(kMaxCyclicDegree));
  const CharDecomposition cd = char_divides(Fprime, d);
  if (cd.d1 > 1 && !find_unity_root(Fprime, cd.d1))
    throw input_error("the coefficient field has no root of unity of order " +
                      std::to_string(cd.d1) +
                      "; extend the field first and pass the extension instead");
  if (cd.s == 0) return build_kummer(Fprime, cd.d1);
  auto built = build_asw_tower(cd.p, cd.s);
  if (cd.d1 == 1) {
    const auto K2 = std::make_shared<const RatFuncField>(Fprime, "X");
    return transport_cyclic(built.second, K2);
  }
  CyclicExtension kum = build_kummer(Fprime, cd.d1);
  const auto K2 = std::static_pointer_cast<const RatFuncField>(kum.base);
  const CyclicExtension asw = transport_cyclic(built.second, K2);
  return tensor_cyclic(kum, asw);
}

// ---------------------------------------------------------------------------
// Invariant checking for built extensions.
// ---------------------------------------------------------------------------
inline VerifyReport check_cyclic_extension(const CyclicExtension& E,
                                           bool exhaustive_triples = true) {
  VerifyReport rep;
  const FieldPtr K = E.base;
  const int D = E.degree;
  if (D < 1) {
    rep.fail("degree must be positive");
    return rep;
  }
  if (static_cast<int>(E.table.size()) != D * D) {
    rep.fail("structure constant table must have degree^2 entries");
    return rep;
  }
  for (const auto& row : E.table)
    if (static_cast<int>(row.size()) != D) {
      rep.fail("each structure constant entry must have degree coordinates");
      return rep;
    }
  if (E.sigma.rows != D || E.sigma.cols != D) {
    rep.fail("automorphism matrix has the wrong shape");
    return rep;
  }
  if (!E.basis_labels.empty() && static_cast<int>(E.basis_labels.size()) != D)
    rep.fail("basis labels do not match the degree");

  for (int j = 0; j < D && rep.ok; ++j) {
    if (!detail::vec_eq(K, E.entry(0, j), E.basis_vec(j)) ||
        !detail::vec_eq(K, E.entry(j, 0), E.basis_vec(j)))
      rep.fail("basis element 0 does not act as the unit");
  }
  for (int i = 0; i < D; ++i)
    for (int j = i + 1; j < D; ++j)
      if (!detail::vec_eq(K, E.entry(i, j), E.entry(j, i))) {
        rep.fail("multiplication is not commutative on basis elements " + std::to_string(i) +
                 "," + std::to_string(j));
        return rep;
      }
  if (exhaustive_triples) {
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j)
        for (int k = 0; k < D; ++k) {
          const ValueVec lhs = E.mul_vec(E.entry(i, j), E.basis_vec(k));
          const ValueVec rhs = E.mul_vec(E.basis_vec(i), E.entry(j, k));
          if (!detail::vec_eq(K, lhs, rhs)) {
            rep.fail("multiplication is not associative on basis triple " + std::to_string(i) +
                     "," + std::to_string(j) + "," + std::to_string(k));
            return rep;
          }
        }
  }

  // sigma is an algebra automorphism fixing 1.
  if (!detail::vec_eq(K, E.sigma_vec(E.unit_vec()), E.unit_vec()))
    rep.fail("automorphism does not fix the unit");
  for (int i = 0; i < D && rep.ok; ++i)
    for (int j = i; j < D; ++j) {
      const ValueVec lhs = E.sigma_vec(E.entry(i, j));
      const ValueVec rhs = E.mul_vec(E.sigma_vec(E.basis_vec(i)), E.sigma_vec(E.basis_vec(j)));
      if (!detail::vec_eq(K, lhs, rhs)) {
        rep.fail("sigma is not multiplicative on basis pair " + std::to_string(i) + "," +
                 std::to_string(j));
        break;
      }
    }

  // sigma has multiplicative order exactly D.
  std::vector<Mat> pw(static_cast<std::size_t>(D) + 1);
  pw[0] = Mat::identity(K, D);
  for (int k = 1; k <= D; ++k) pw[static_cast<std::size_t>(k)] =
      mat_mul(pw[static_cast<std::size_t>(k - 1)], E.sigma);
  if (!mat_eq(pw[static_cast<std::size_t>(D)], pw[0])) rep.fail("sigma^degree is not the identity");
  for (int q : detail::prime_factors_of(D))
    if (mat_eq(pw[static_cast<std::size_t>(D / q)], pw[0]))
      rep.fail("sigma has order dividing degree/" + std::to_string(q));

  // Fixed space is exactly the base: sigma - id has corank 1.
  const Mat fixed = mat_sub(E.sigma, pw[0]);
  if (mat_rank(fixed) != D - 1) rep.fail("fixed space of sigma does not have dimension 1");
  return rep;
}

// ---------------------------------------------------------------------------
// Regular representation of a structure-constant extension field: column j of
// rho(x) holds the coordinates of x * b_j. Applied entrywise, an a x b matrix
// over E becomes an (a e) x (b e) matrix over the base with e times the rank.
// ---------------------------------------------------------------------------
inline Mat regular_rep(const std::shared_ptr<const ExtensionField>& E, const Value& x) {
  const int e = E->degree_over_base();
  Mat m(E->base_field(), e, e);
  for (int j = 0; j < e; ++j) {
    const Value col = E->mul(x, E->basis_element(j));
    const ValueVec& c = col.vec();
    for (int i = 0; i < e; ++i) m.at(i, j) = c[static_cast<std::size_t>(i)];
  }
  return m;
}

inline Mat regular_rep_mat(const std::shared_ptr<const ExtensionField>& E, const Mat& a) {
  const int e = E->degree_over_base();
  Mat out(E->base_field(), a.rows * e, a.cols * e);
  for (int u = 0; u < a.rows; ++u)
    for (int v = 0; v < a.cols; ++v) {
      const Mat block = regular_rep(E, a.at(u, v));
      for (int i = 0; i < e; ++i)
        for (int j = 0; j < e; ++j) out.at(u * e + i, v * e + j) = block.at(i, j);
    }
  return out;
}

// View of a CyclicExtension as a field object (validates commutativity on
// construction; associativity is auto-checked for degrees up to 9).
inline std::shared_ptr<const ExtensionField> as_field(const CyclicExtension& E,
                                                      const std::string& label) {
  return std::make_shared<const ExtensionField>(E.base, E.degree, E.table, label);
}

}  // namespace ncrank
