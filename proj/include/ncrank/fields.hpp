#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ncrank/errors.hpp"
#include "ncrank/scalars.hpp"

namespace ncrank {

// Abstract coefficient field. All algorithms in this library are generic
// over this interface; elements are opaque `Value`s whose meaning is fixed
// by the owning field. Implementations must be exact (no floating point)
// and deterministic: equal inputs give bit-identical results.
class Field {
public:
  enum class Kind { rationals, prime, extension, ratfunc };

  virtual ~Field() = default;

  virtual Kind kind() const = 0;
  virtual std::string name() const = 0;
  virtual BigInt characteristic() const = 0;
  // nullopt means the field is infinite.
  virtual std::optional<BigInt> cardinality() const = 0;
  virtual FieldPtr base_field() const { return nullptr; }
  virtual int degree_over_base() const { return 1; }

  virtual Value zero() const = 0;
  virtual Value one() const = 0;
  virtual bool is_zero(const Value& a) const = 0;
  virtual bool eq(const Value& a, const Value& b) const = 0;
  virtual Value add(const Value& a, const Value& b) const = 0;
  virtual Value neg(const Value& a) const = 0;
  virtual Value sub(const Value& a, const Value& b) const { return add(a, neg(b)); }
  virtual Value mul(const Value& a, const Value& b) const = 0;
  // Throws argument_error on zero input.
  virtual Value inv(const Value& a) const = 0;
  virtual Value div(const Value& a, const Value& b) const { return mul(a, inv(b)); }
  virtual Value from_int(const BigInt& n) const = 0;
  Value from_int(long long n) const { return from_int(BigInt(n)); }

  // Fixed, documented enumeration without repetition used to build small
  // evaluation sets deterministically:
  //   rationals            0, 1, 2, ...
  //   prime field          0, 1, ..., p-1 (argument_error beyond)
  //   extension, finite    base-q digit expansion of the index
  //   ratfunc, finite base polynomials by digit expansion of the index
  //   any infinite base    the integer images 0, 1, 2, ...
  virtual Value element_at(const BigInt& index) const = 0;
  Value element_at(long long index) const { return element_at(BigInt(index)); }

  virtual std::string to_string(const Value& a) const = 0;
  // Inverse of to_string; also accepts a bare base-field string for the
  // pointer-based fields (embedded as a constant). Throws input_error.
  virtual Value parse(std::string_view text) const = 0;

  Value pow(const Value& a, const BigInt& e) const {
    if (e < 0) return pow(inv(a), -e);
    Value result = one();
    Value base = a;
    BigInt k = e;
    while (k > 0) {
      if ((k & 1) != 0) result = mul(result, base);
      k >>= 1;
      if (k > 0) base = mul(base, base);
    }
    return result;
  }

  // Canonical structural description; two fields with equal signatures are
  // the same field with the same basis. Computed lazily and cached.
  const std::string& signature() const {
    if (sig_.empty()) sig_ = compute_signature();
    return sig_;
  }

protected:
  virtual std::string compute_signature() const = 0;

private:
  mutable std::string sig_;
};

inline bool same_field(const Field& a, const Field& b) {
  return &a == &b || a.signature() == b.signature();
}
inline bool same_field(const FieldPtr& a, const FieldPtr& b) {
  return a == b || same_field(*a, *b);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Splits at `delim` occurring at parenthesis depth zero.
inline std::vector<std::string_view> split_top_level(std::string_view s, char delim) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(') {
      ++depth;
    } else if (c == ')') {
      if (--depth < 0) throw input_error("unbalanced ')' in '" + std::string(s) + "'");
    } else if (c == delim && depth == 0) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  if (depth != 0) throw input_error("unbalanced '(' in '" + std::string(s) + "'");
  parts.push_back(s.substr(start));
  return parts;
}

inline BigInt parse_bigint(std::string_view s) {
  s = trim(s);
  std::string_view digits = s;
  if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) digits.remove_prefix(1);
  if (digits.empty()) throw input_error("expected an integer, got '" + std::string(s) + "'");
  for (char c : digits)
    if (c < '0' || c > '9') throw input_error("expected an integer, got '" + std::string(s) + "'");
  return BigInt(std::string(s));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Rationals
// ---------------------------------------------------------------------------

class Rationals final : public Field {
public:
  static FieldPtr get() {
    static const FieldPtr instance(new Rationals());
    return instance;
  }

  Kind kind() const override { return Kind::rationals; }
  std::string name() const override { return "Q"; }
  BigInt characteristic() const override { return 0; }
  std::optional<BigInt> cardinality() const override { return std::nullopt; }

  Value zero() const override { return Value::of_rat(BigRat(0)); }
  Value one() const override { return Value::of_rat(BigRat(1)); }
  bool is_zero(const Value& a) const override { return a.rat() == 0; }
  bool eq(const Value& a, const Value& b) const override { return a.rat() == b.rat(); }

  Value add(const Value& a, const Value& b) const override { return track(a.rat() + b.rat()); }
  Value neg(const Value& a) const override { return Value::of_rat(-a.rat()); }
  Value sub(const Value& a, const Value& b) const override { return track(a.rat() - b.rat()); }
  Value mul(const Value& a, const Value& b) const override { return track(a.rat() * b.rat()); }
  Value inv(const Value& a) const override {
    if (a.rat() == 0) throw argument_error("division by zero in Q");
    return Value::of_rat(BigRat(1) / a.rat());
  }
  Value div(const Value& a, const Value& b) const override {
    if (b.rat() == 0) throw argument_error("division by zero in Q");
    return track(a.rat() / b.rat());
  }
  Value from_int(const BigInt& n) const override { return Value::of_rat(BigRat(n)); }
  Value element_at(const BigInt& index) const override {
    if (index < 0) throw argument_error("element_at index must be nonnegative");
    return from_int(index);
  }

  std::string to_string(const Value& a) const override {
    const BigRat& q = a.rat();
    std::string s = boost::multiprecision::numerator(q).str();
    if (boost::multiprecision::denominator(q) != 1)
      s += "/" + boost::multiprecision::denominator(q).str();
    return s;
  }

  Value parse(std::string_view text) const override {
    auto parts = detail::split_top_level(detail::trim(text), '/');
    if (parts.size() == 1) return Value::of_rat(BigRat(detail::parse_bigint(parts[0])));
    if (parts.size() != 2) throw input_error("bad rational '" + std::string(text) + "'");
    BigInt num = detail::parse_bigint(parts[0]);
    BigInt den = detail::parse_bigint(parts[1]);
    if (den == 0) throw input_error("zero denominator in '" + std::string(text) + "'");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    return Value::of_rat(BigRat(num, den));
  }

protected:
  std::string compute_signature() const override { return "Q"; }

private:
  Rationals() = default;
  static Value track(BigRat q) {
    note_rat(q);
    return Value::of_rat(std::move(q));
  }
};

// ---------------------------------------------------------------------------
// Prime fields F_p, p < 2^31
// ---------------------------------------------------------------------------

class PrimeField final : public Field {
public:
  // Shared instances so repeated requests for the same p compare equal by
  // pointer; important because caches downstream are keyed by field.
  static std::shared_ptr<const PrimeField> get(std::uint64_t p) {
    thread_local std::vector<std::shared_ptr<const PrimeField>> cache;
    for (const auto& f : cache)
      if (f->p_ == p) return f;
    std::shared_ptr<const PrimeField> f(new PrimeField(p));
    cache.push_back(f);
    return f;
  }

  std::uint64_t modulus() const { return p_; }

  Kind kind() const override { return Kind::prime; }
  std::string name() const override { return "F" + std::to_string(p_); }
  BigInt characteristic() const override { return BigInt(p_); }
  std::optional<BigInt> cardinality() const override { return BigInt(p_); }

  Value zero() const override { return Value::of_word(0); }
  Value one() const override { return Value::of_word(p_ == 1 ? 0 : 1); }
  bool is_zero(const Value& a) const override { return a.word() == 0; }
  bool eq(const Value& a, const Value& b) const override { return a.word() == b.word(); }

  Value add(const Value& a, const Value& b) const override {
    std::uint64_t s = a.word() + b.word();
    if (s >= p_) s -= p_;
    return Value::of_word(s);
  }
  Value neg(const Value& a) const override {
    return Value::of_word(a.word() == 0 ? 0 : p_ - a.word());
  }
  Value sub(const Value& a, const Value& b) const override {
    return Value::of_word(a.word() >= b.word() ? a.word() - b.word()
                                               : a.word() + p_ - b.word());
  }
  Value mul(const Value& a, const Value& b) const override {
    return Value::of_word(mulmod(a.word(), b.word()));
  }
  Value inv(const Value& a) const override {
    if (a.word() == 0) throw argument_error("division by zero in " + name());
    return Value::of_word(invmod(a.word()));
  }
  Value from_int(const BigInt& n) const override {
    BigInt r = n % BigInt(p_);
    if (r < 0) r += BigInt(p_);
    return Value::of_word(r.convert_to<std::uint64_t>());
  }
  Value element_at(const BigInt& index) const override {
    if (index < 0 || index >= BigInt(p_))
      throw argument_error("element_at index " + index.str() + " out of range for " + name());
    return Value::of_word(index.convert_to<std::uint64_t>());
  }

  std::string to_string(const Value& a) const override { return std::to_string(a.word()); }
  Value parse(std::string_view text) const override {
    return from_int(detail::parse_bigint(text));
  }

  std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) const {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % p_);
  }
  std::uint64_t invmod(std::uint64_t a) const {
    // Extended Euclid; p_ is prime and a != 0 mod p_.
    std::int64_t t = 0, new_t = 1;
    std::int64_t r = static_cast<std::int64_t>(p_), new_r = static_cast<std::int64_t>(a);
    while (new_r != 0) {
      const std::int64_t q = r / new_r;
      std::int64_t tmp = t - q * new_t;
      t = new_t;
      new_t = tmp;
      tmp = r - q * new_r;
      r = new_r;
      new_r = tmp;
    }
    if (r != 1) throw internal_error("inverse of a zero divisor in " + name());
    if (t < 0) t += static_cast<std::int64_t>(p_);
    return static_cast<std::uint64_t>(t);
  }

  static bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::uint64_t d = 3; d * d <= n; d += 2)
      if (n % d == 0) return false;
    return true;
  }

protected:
  std::string compute_signature() const override { return "F" + std::to_string(p_); }

private:
  explicit PrimeField(std::uint64_t p) : p_(p) {
    if (p >= (1ull << 31))
      throw argument_error("prime modulus must fit in 31 bits, got " + std::to_string(p));
    if (!is_prime(p)) throw argument_error(std::to_string(p) + " is not prime");
  }

  std::uint64_t p_;
};

// ---------------------------------------------------------------------------
// Dense univariate polynomials over an abstract field (constant term first,
// no trailing zeros; the zero polynomial is the empty vector). These back the
// rational function field and all extension-building code.
// ---------------------------------------------------------------------------

namespace detail {

using Poly = ValueVec;

inline void poly_trim(const FieldPtr& F, Poly& p) {
  while (!p.empty() && F->is_zero(p.back())) p.pop_back();
}
inline int poly_deg(const Poly& p) { return static_cast<int>(p.size()) - 1; }
inline bool poly_is_zero(const Poly& p) { return p.empty(); }

inline Poly poly_const(const FieldPtr& F, const Value& v) {
  Poly p{v};
  poly_trim(F, p);
  return p;
}
inline Poly poly_x(const FieldPtr& F) { return Poly{F->zero(), F->one()}; }

inline Poly poly_add(const FieldPtr& F, const Poly& a, const Poly& b) {
  Poly r(std::max(a.size(), b.size()), F->zero());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] = F->add(r[i], b[i]);
  poly_trim(F, r);
  return r;
}
inline Poly poly_neg(const FieldPtr& F, const Poly& a) {
  Poly r(a);
  for (auto& c : r) c = F->neg(c);
  return r;
}
inline Poly poly_sub(const FieldPtr& F, const Poly& a, const Poly& b) {
  return poly_add(F, a, poly_neg(F, b));
}
inline Poly poly_scale(const FieldPtr& F, const Value& c, const Poly& a) {
  if (F->is_zero(c)) return {};
  Poly r(a);
  for (auto& x : r) x = F->mul(c, x);
  poly_trim(F, r);
  return r;
}
inline Poly poly_mul(const FieldPtr& F, const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1, F->zero());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (F->is_zero(a[i])) continue;
    for (std::size_t j = 0; j < b.size(); ++j)
      r[i + j] = F->add(r[i + j], F->mul(a[i], b[j]));
  }
  poly_trim(F, r);
  return r;
}

inline std::pair<Poly, Poly> poly_divmod(const FieldPtr& F, const Poly& a, const Poly& b) {
  if (b.empty()) throw argument_error("polynomial division by zero");
  Poly rem(a), quot;
  const int db = poly_deg(b);
  const Value lead_inv = F->inv(b.back());
  if (poly_deg(rem) >= db) quot.assign(rem.size() - b.size() + 1, F->zero());
  while (poly_deg(rem) >= db) {
    const int k = poly_deg(rem) - db;
    const Value c = F->mul(rem.back(), lead_inv);
    quot[k] = c;
    for (int i = 0; i <= db; ++i)
      rem[k + i] = F->sub(rem[k + i], F->mul(c, b[i]));
    poly_trim(F, rem);
  }
  poly_trim(F, quot);
  return {quot, rem};
}
inline Poly poly_mod(const FieldPtr& F, const Poly& a, const Poly& b) {
  return poly_divmod(F, a, b).second;
}
inline Poly poly_div_exact(const FieldPtr& F, const Poly& a, const Poly& b) {
  auto [q, r] = poly_divmod(F, a, b);
  if (!r.empty()) throw internal_error("polynomial division was not exact");
  return q;
}

inline Poly poly_make_monic(const FieldPtr& F, const Poly& a) {
  if (a.empty()) return a;
  return poly_scale(F, F->inv(a.back()), a);
}

inline Poly poly_gcd_monic(const FieldPtr& F, Poly a, Poly b) {
  while (!b.empty()) {
    Poly r = poly_mod(F, a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return poly_make_monic(F, a);
}

inline Value poly_eval(const FieldPtr& F, const Poly& p, const Value& x) {
  Value acc = F->zero();
  for (std::size_t i = p.size(); i-- > 0;) acc = F->add(F->mul(acc, x), p[i]);
  return acc;
}

inline bool poly_eq(const FieldPtr& F, const Poly& a, const Poly& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!F->eq(a[i], b[i])) return false;
  return true;
}

inline Poly poly_pow_mod(const FieldPtr& F, Poly base, BigInt e, const Poly& mod) {
  Poly result = poly_const(F, F->one());
  base = poly_mod(F, base, mod);
  while (e > 0) {
    if ((e & 1) != 0) result = poly_mod(F, poly_mul(F, result, base), mod);
    e >>= 1;
    if (e > 0) base = poly_mod(F, poly_mul(F, base, base), mod);
  }
  return result;
}

// Solves the square dense system M x = rhs with deterministic Gauss-Jordan
// elimination (first row with a nonzero entry becomes the pivot). Returns
// nullopt when M is singular. Self-contained so field implementations can
// invert elements without depending on the matrix layer.
inline std::optional<ValueVec> solve_square(const FieldPtr& F, int n, ValueVec M, ValueVec rhs) {
  std::vector<int> pivot_of_col(n, -1);
  std::vector<bool> used(n, false);
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int row = 0; row < n; ++row) {
      if (!used[row] && !F->is_zero(M[static_cast<std::size_t>(row) * n + col])) {
        piv = row;
        break;
      }
    }
    if (piv < 0) return std::nullopt;
    used[piv] = true;
    pivot_of_col[col] = piv;
    const Value scale = F->inv(M[static_cast<std::size_t>(piv) * n + col]);
    for (int j = 0; j < n; ++j)
      M[static_cast<std::size_t>(piv) * n + j] =
          F->mul(scale, M[static_cast<std::size_t>(piv) * n + j]);
    rhs[piv] = F->mul(scale, rhs[piv]);
    for (int row = 0; row < n; ++row) {
      if (row == piv) continue;
      const Value f = M[static_cast<std::size_t>(row) * n + col];
      if (F->is_zero(f)) continue;
      for (int j = 0; j < n; ++j)
        M[static_cast<std::size_t>(row) * n + j] =
            F->sub(M[static_cast<std::size_t>(row) * n + j],
                   F->mul(f, M[static_cast<std::size_t>(piv) * n + j]));
      rhs[row] = F->sub(rhs[row], F->mul(f, rhs[piv]));
    }
  }
  ValueVec x(static_cast<std::size_t>(n), F->zero());
  for (int col = 0; col < n; ++col) x[col] = rhs[pivot_of_col[col]];
  return x;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Finite-dimensional commutative extension of a base field, given by
// structure constants. Basis element 0 must be the unit. An optional
// distinguished root of unity (with its order) can be attached, recording
// how the field was provisioned.
// ---------------------------------------------------------------------------

class ExtensionField final : public Field {
public:
  ExtensionField(FieldPtr base, int deg, std::vector<ValueVec> table, std::string label,
                 std::optional<std::pair<ValueVec, BigInt>> zeta = std::nullopt)
      : base_(std::move(base)),
        deg_(deg),
        table_(std::move(table)),
        label_(std::move(label)),
        zeta_(std::move(zeta)) {
    if (!base_) throw argument_error("extension field needs a base field");
    if (deg_ < 1) throw argument_error("extension degree must be at least 1");
    if (table_.size() != static_cast<std::size_t>(deg_) * deg_)
      throw argument_error("structure constant table must have deg^2 entries");
    for (const auto& row : table_)
      if (row.size() != static_cast<std::size_t>(deg_))
        throw argument_error("each structure constant entry must have deg coordinates");
    // Cheap sanity always: unit basis element and commutativity.
    for (int j = 0; j < deg_; ++j) {
      if (!is_unit_vector(entry(0, j), j) || !is_unit_vector(entry(j, 0), j))
        throw argument_error("basis element 0 of an extension must act as the unit");
    }
    for (int i = 0; i < deg_; ++i)
      for (int j = i + 1; j < deg_; ++j)
        for (int k = 0; k < deg_; ++k)
          if (!base_->eq(entry(i, j)[k], entry(j, i)[k]))
            throw argument_error("structure constants are not commutative");
    // Full associativity is cubic in deg; run it automatically only when
    // cheap. Builders of large towers call check_associativity once.
    if (deg_ <= 9) check_associativity();
    if (zeta_) {
      if (zeta_->first.size() != static_cast<std::size_t>(deg_))
        throw argument_error("distinguished root has wrong coordinate size");
      verify_zeta_order();
    }
  }

  const ValueVec& entry(int i, int j) const {
    return table_[static_cast<std::size_t>(i) * deg_ + j];
  }
  const std::string& label() const { return label_; }
  bool has_zeta() const { return zeta_.has_value(); }
  Value zeta() const {
    if (!zeta_) throw argument_error("field " + name() + " has no distinguished root of unity");
    return Value::of_vec(zeta_->first);
  }
  const BigInt& zeta_order() const {
    if (!zeta_) throw argument_error("field " + name() + " has no distinguished root of unity");
    return zeta_->second;
  }

  void check_associativity() const {
    for (int i = 0; i < deg_; ++i)
      for (int j = 0; j < deg_; ++j)
        for (int k = 0; k < deg_; ++k) {
          const Value bi = basis_element(i), bj = basis_element(j), bk = basis_element(k);
          if (!eq(mul(mul(bi, bj), bk), mul(bi, mul(bj, bk))))
            throw argument_error("structure constants are not associative");
        }
  }

  Value basis_element(int i) const {
    ValueVec c(static_cast<std::size_t>(deg_), base_->zero());
    c[i] = base_->one();
    return Value::of_vec(std::move(c));
  }
  Value embed_base(const Value& v) const {
    ValueVec c(static_cast<std::size_t>(deg_), base_->zero());
    c[0] = v;
    return Value::of_vec(std::move(c));
  }

  Kind kind() const override { return Kind::extension; }
  std::string name() const override { return label_.empty() ? "ext" : label_; }
  BigInt characteristic() const override { return base_->characteristic(); }
  std::optional<BigInt> cardinality() const override {
    auto c = base_->cardinality();
    if (!c) return std::nullopt;
    BigInt r = 1;
    for (int i = 0; i < deg_; ++i) r *= *c;
    return r;
  }
  FieldPtr base_field() const override { return base_; }
  int degree_over_base() const override { return deg_; }

  Value zero() const override {
    return Value::of_vec(ValueVec(static_cast<std::size_t>(deg_), base_->zero()));
  }
  Value one() const override { return basis_element(0); }
  bool is_zero(const Value& a) const override {
    for (const Value& c : a.vec())
      if (!base_->is_zero(c)) return false;
    return true;
  }
  bool eq(const Value& a, const Value& b) const override {
    const ValueVec& x = a.vec();
    const ValueVec& y = b.vec();
    for (int i = 0; i < deg_; ++i)
      if (!base_->eq(x[i], y[i])) return false;
    return true;
  }
  Value add(const Value& a, const Value& b) const override {
    const ValueVec& x = a.vec();
    const ValueVec& y = b.vec();
    ValueVec r(static_cast<std::size_t>(deg_));
    for (int i = 0; i < deg_; ++i) r[i] = base_->add(x[i], y[i]);
    return Value::of_vec(std::move(r));
  }
  Value neg(const Value& a) const override {
    ValueVec r(a.vec());
    for (auto& c : r) c = base_->neg(c);
    return Value::of_vec(std::move(r));
  }
  Value mul(const Value& a, const Value& b) const override {
    const ValueVec& x = a.vec();
    const ValueVec& y = b.vec();
    ValueVec r(static_cast<std::size_t>(deg_), base_->zero());
    for (int i = 0; i < deg_; ++i) {
      if (base_->is_zero(x[i])) continue;
      for (int j = 0; j < deg_; ++j) {
        if (base_->is_zero(y[j])) continue;
        const Value c = base_->mul(x[i], y[j]);
        const ValueVec& t = entry(i, j);
        for (int k = 0; k < deg_; ++k)
          if (!base_->is_zero(t[k])) r[k] = base_->add(r[k], base_->mul(c, t[k]));
      }
    }
    return Value::of_vec(std::move(r));
  }
  Value inv(const Value& a) const override {
    if (is_zero(a)) throw argument_error("division by zero in " + name());
    // Solve (multiplication-by-a) x = 1 over the base field.
    const ValueVec& x = a.vec();
    ValueVec M(static_cast<std::size_t>(deg_) * deg_, base_->zero());
    for (int j = 0; j < deg_; ++j) {
      // Column j holds the coordinates of a * basis_element(j).
      for (int i = 0; i < deg_; ++i) {
        if (base_->is_zero(x[i])) continue;
        const ValueVec& t = entry(i, j);
        for (int k = 0; k < deg_; ++k)
          if (!base_->is_zero(t[k]))
            M[static_cast<std::size_t>(k) * deg_ + j] =
                base_->add(M[static_cast<std::size_t>(k) * deg_ + j], base_->mul(x[i], t[k]));
      }
    }
    ValueVec rhs(static_cast<std::size_t>(deg_), base_->zero());
    rhs[0] = base_->one();
    auto sol = detail::solve_square(base_, deg_, std::move(M), std::move(rhs));
    if (!sol) throw argument_error("tried to invert a zero divisor in " + name());
    return Value::of_vec(std::move(*sol));
  }
  Value from_int(const BigInt& n) const override { return embed_base(base_->from_int(n)); }

  Value element_at(const BigInt& index) const override {
    if (index < 0) throw argument_error("element_at index must be nonnegative");
    auto q = base_->cardinality();
    if (!q) return from_int(index);
    ValueVec c(static_cast<std::size_t>(deg_), base_->zero());
    BigInt rest = index;
    for (int i = 0; i < deg_ && rest > 0; ++i) {
      c[i] = base_->element_at(rest % *q);
      rest /= *q;
    }
    if (rest > 0)
      throw argument_error("element_at index exceeds the cardinality of " + name());
    return Value::of_vec(std::move(c));
  }

  std::string to_string(const Value& a) const override {
    const ValueVec& x = a.vec();
    std::string s = "(";
    for (int i = 0; i < deg_; ++i) {
      if (i) s += ",";
      s += base_->to_string(x[i]);
    }
    s += ")";
    return s;
  }

  Value parse(std::string_view text) const override {
    text = detail::trim(text);
    if (!text.empty() && text.front() == '(' && text.back() == ')') {
      auto parts = detail::split_top_level(text.substr(1, text.size() - 2), ',');
      if (static_cast<int>(parts.size()) == deg_) {
        ValueVec c(static_cast<std::size_t>(deg_));
        for (int i = 0; i < deg_; ++i) c[i] = base_->parse(parts[i]);
        return Value::of_vec(std::move(c));
      }
    }
    return embed_base(base_->parse(text));
  }

protected:
  std::string compute_signature() const override {
    std::string s = "ext[" + base_->signature() + ";" + std::to_string(deg_) + ";";
    for (const auto& row : table_)
      for (const Value& v : row) s += base_->to_string(v) + ",";
    s += "]";
    return s;
  }

private:
  bool is_unit_vector(const ValueVec& v, int pos) const {
    for (int k = 0; k < deg_; ++k) {
      const bool want_one = (k == pos);
      if (want_one ? !base_->eq(v[k], base_->one()) : !base_->is_zero(v[k])) return false;
    }
    return true;
  }

  void verify_zeta_order() const {
    const Value z = Value::of_vec(zeta_->first);
    const BigInt& order = zeta_->second;
    if (order < 1) throw argument_error("root-of-unity order must be positive");
    if (!eq(pow(z, order), one()))
      throw argument_error("distinguished root does not have the declared order");
    BigInt rest = order;
    for (BigInt p = 2; p * p <= rest; ++p) {
      if (rest % p != 0) continue;
      while (rest % p == 0) rest /= p;
      if (eq(pow(z, order / p), one()))
        throw argument_error("distinguished root has smaller order than declared");
    }
    if (rest > 1 && eq(pow(z, order / rest), one()))
      throw argument_error("distinguished root has smaller order than declared");
  }

  FieldPtr base_;
  int deg_;
  std::vector<ValueVec> table_;
  std::string label_;
  std::optional<std::pair<ValueVec, BigInt>> zeta_;
};

// ---------------------------------------------------------------------------
// Rational function field base(var). Elements are kept in canonical form:
// monic denominator coprime to the numerator.
// ---------------------------------------------------------------------------

class RatFuncField final : public Field {
public:
  explicit RatFuncField(FieldPtr base, std::string var = "X")
      : base_(std::move(base)), var_(std::move(var)) {
    if (!base_) throw argument_error("rational function field needs a base field");
    if (var_.empty()) throw argument_error("rational function field needs a variable name");
  }

  const std::string& variable() const { return var_; }
  Value generator() const { return make(detail::poly_x(base_), one_poly()); }
  // The constant-extraction helpers used when specializing the variable.
  const ValueVec& num(const Value& v) const { return v.ratfunc().num; }
  const ValueVec& den(const Value& v) const { return v.ratfunc().den; }
  Value from_poly(ValueVec num_coeffs) const {
    detail::poly_trim(base_, num_coeffs);
    return make(std::move(num_coeffs), one_poly());
  }

  Kind kind() const override { return Kind::ratfunc; }
  std::string name() const override { return base_->name() + "(" + var_ + ")"; }
  BigInt characteristic() const override { return base_->characteristic(); }
  std::optional<BigInt> cardinality() const override { return std::nullopt; }
  FieldPtr base_field() const override { return base_; }

  Value zero() const override { return make({}, one_poly()); }
  Value one() const override { return make(one_poly(), one_poly()); }
  bool is_zero(const Value& a) const override { return a.ratfunc().num.empty(); }
  bool eq(const Value& a, const Value& b) const override {
    return detail::poly_eq(base_, a.ratfunc().num, b.ratfunc().num) &&
           detail::poly_eq(base_, a.ratfunc().den, b.ratfunc().den);
  }
  Value add(const Value& a, const Value& b) const override {
    const RatFuncRep& x = a.ratfunc();
    const RatFuncRep& y = b.ratfunc();
    ValueVec num = detail::poly_add(base_, detail::poly_mul(base_, x.num, y.den),
                                    detail::poly_mul(base_, y.num, x.den));
    ValueVec den = detail::poly_mul(base_, x.den, y.den);
    return canonical(std::move(num), std::move(den));
  }
  Value neg(const Value& a) const override {
    const RatFuncRep& x = a.ratfunc();
    return make(detail::poly_neg(base_, x.num), x.den);
  }
  Value mul(const Value& a, const Value& b) const override {
    const RatFuncRep& x = a.ratfunc();
    const RatFuncRep& y = b.ratfunc();
    return canonical(detail::poly_mul(base_, x.num, y.num),
                     detail::poly_mul(base_, x.den, y.den));
  }
  Value inv(const Value& a) const override {
    const RatFuncRep& x = a.ratfunc();
    if (x.num.empty()) throw argument_error("division by zero in " + name());
    return canonical(x.den, x.num);
  }
  Value from_int(const BigInt& n) const override {
    return make(detail::poly_const(base_, base_->from_int(n)), one_poly());
  }

  Value element_at(const BigInt& index) const override {
    if (index < 0) throw argument_error("element_at index must be nonnegative");
    auto q = base_->cardinality();
    if (!q) return from_int(index);
    ValueVec coeffs;
    BigInt rest = index;
    while (rest > 0) {
      coeffs.push_back(base_->element_at(rest % *q));
      rest /= *q;
    }
    detail::poly_trim(base_, coeffs);
    return make(std::move(coeffs), one_poly());
  }

  std::string to_string(const Value& a) const override {
    const RatFuncRep& x = a.ratfunc();
    std::string s = poly_to_string(x.num);
    if (detail::poly_deg(x.den) != 0) s += "/" + poly_to_string(x.den);
    return s;
  }

  Value parse(std::string_view text) const override {
    text = detail::trim(text);
    auto parts = detail::split_top_level(text, '/');
    if (parts.size() > 2) throw input_error("bad rational function '" + std::string(text) + "'");
    ValueVec num = poly_parse(parts[0]);
    ValueVec den = parts.size() == 2 ? poly_parse(parts[1]) : one_poly();
    if (den.empty()) throw input_error("zero denominator in '" + std::string(text) + "'");
    return canonical(std::move(num), std::move(den));
  }

protected:
  std::string compute_signature() const override {
    return "ratfunc[" + base_->signature() + ";" + var_ + "]";
  }

private:
  ValueVec one_poly() const { return ValueVec{base_->one()}; }

  static Value make(ValueVec num, ValueVec den) {
    return Value::of_ratfunc(RatFuncRep{std::move(num), std::move(den)});
  }

  Value canonical(ValueVec num, ValueVec den) const {
    detail::poly_trim(base_, num);
    detail::poly_trim(base_, den);
    if (den.empty()) throw argument_error("division by zero in " + name());
    if (num.empty()) return make({}, one_poly());
    ValueVec g = detail::poly_gcd_monic(base_, num, den);
    if (detail::poly_deg(g) > 0) {
      num = detail::poly_div_exact(base_, num, g);
      den = detail::poly_div_exact(base_, den, g);
    }
    const Value lead_inv = base_->inv(den.back());
    num = detail::poly_scale(base_, lead_inv, num);
    den = detail::poly_scale(base_, lead_inv, den);
    return make(std::move(num), std::move(den));
  }

  std::string poly_to_string(const ValueVec& p) const {
    if (p.empty()) return "(0)";
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) s += ",";
      s += base_->to_string(p[i]);
    }
    return s + ")";
  }

  ValueVec poly_parse(std::string_view text) const {
    text = detail::trim(text);
    ValueVec p;
    if (!text.empty() && text.front() == '(' && text.back() == ')') {
      for (auto part : detail::split_top_level(text.substr(1, text.size() - 2), ','))
        p.push_back(base_->parse(part));
    } else {
      p.push_back(base_->parse(text));
    }
    detail::poly_trim(base_, p);
    return p;
  }

  FieldPtr base_;
  std::string var_;
};

}  // namespace ncrank
