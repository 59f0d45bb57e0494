#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "ncrank/fields.hpp"

namespace ncrank {

// Dense matrix over an abstract field. Row-major, 0-based indices at the API
// level (the command-line layer converts to 1-based for display).
struct Mat {
  FieldPtr F;
  int rows = 0;
  int cols = 0;
  ValueVec e;

  Mat() = default;
  Mat(FieldPtr field, int r, int c)
      : F(std::move(field)), rows(r), cols(c),
        e(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), F->zero()) {
    if (r < 0 || c < 0) throw argument_error("matrix dimensions must be nonnegative");
  }

  static Mat zero(const FieldPtr& F, int r, int c) { return Mat(F, r, c); }
  static Mat identity(const FieldPtr& F, int n) {
    Mat m(F, n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = F->one();
    return m;
  }

  Value& at(int i, int j) {
    return e[static_cast<std::size_t>(i) * cols + j];
  }
  const Value& at(int i, int j) const {
    return e[static_cast<std::size_t>(i) * cols + j];
  }
  bool empty() const { return rows == 0 || cols == 0; }
};

inline void require_same_field(const Mat& a, const Mat& b, const char* op) {
  if (a.F != b.F && !same_field(a.F, b.F))
    throw argument_error(std::string(op) + ": operands live over different fields");
}

inline Mat mat_add(const Mat& a, const Mat& b) {
  require_same_field(a, b, "mat_add");
  if (a.rows != b.rows || a.cols != b.cols) throw argument_error("mat_add: shape mismatch");
  Mat r(a.F, a.rows, a.cols);
  for (std::size_t i = 0; i < a.e.size(); ++i) r.e[i] = a.F->add(a.e[i], b.e[i]);
  return r;
}

inline Mat mat_sub(const Mat& a, const Mat& b) {
  require_same_field(a, b, "mat_sub");
  if (a.rows != b.rows || a.cols != b.cols) throw argument_error("mat_sub: shape mismatch");
  Mat r(a.F, a.rows, a.cols);
  for (std::size_t i = 0; i < a.e.size(); ++i) r.e[i] = a.F->sub(a.e[i], b.e[i]);
  return r;
}

inline Mat mat_neg(const Mat& a) {
  Mat r(a.F, a.rows, a.cols);
  for (std::size_t i = 0; i < a.e.size(); ++i) r.e[i] = a.F->neg(a.e[i]);
  return r;
}

inline Mat mat_scale(const Value& c, const Mat& a) {
  Mat r(a.F, a.rows, a.cols);
  for (std::size_t i = 0; i < a.e.size(); ++i) r.e[i] = a.F->mul(c, a.e[i]);
  return r;
}

inline Mat mat_mul(const Mat& a, const Mat& b) {
  require_same_field(a, b, "mat_mul");
  if (a.cols != b.rows) throw argument_error("mat_mul: inner dimensions differ");
  Mat r(a.F, a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      const Value& aik = a.at(i, k);
      if (a.F->is_zero(aik)) continue;
      for (int j = 0; j < b.cols; ++j) {
        const Value& bkj = b.at(k, j);
        if (a.F->is_zero(bkj)) continue;
        r.at(i, j) = a.F->add(r.at(i, j), a.F->mul(aik, bkj));
      }
    }
  return r;
}

inline Mat transpose(const Mat& a) {
  Mat r(a.F, a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) r.at(j, i) = a.at(i, j);
  return r;
}

inline bool mat_eq(const Mat& a, const Mat& b) {
  if (a.rows != b.rows || a.cols != b.cols) return false;
  require_same_field(a, b, "mat_eq");
  for (std::size_t i = 0; i < a.e.size(); ++i)
    if (!a.F->eq(a.e[i], b.e[i])) return false;
  return true;
}

inline bool mat_is_zero(const Mat& a) {
  for (const Value& v : a.e)
    if (!a.F->is_zero(v)) return false;
  return true;
}

inline Mat hstack(const Mat& a, const Mat& b) {
  require_same_field(a, b, "hstack");
  if (a.rows != b.rows) throw argument_error("hstack: row counts differ");
  Mat r(a.F, a.rows, a.cols + b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) r.at(i, j) = a.at(i, j);
    for (int j = 0; j < b.cols; ++j) r.at(i, a.cols + j) = b.at(i, j);
  }
  return r;
}

inline Mat vstack(const Mat& a, const Mat& b) {
  require_same_field(a, b, "vstack");
  if (a.cols != b.cols) throw argument_error("vstack: column counts differ");
  Mat r(a.F, a.rows + b.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) r.at(i, j) = a.at(i, j);
  for (int i = 0; i < b.rows; ++i)
    for (int j = 0; j < a.cols; ++j) r.at(a.rows + i, j) = b.at(i, j);
  return r;
}

inline Mat submat(const Mat& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  Mat r(a.F, static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= a.rows) throw argument_error("submat: row index out of range");
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j] < 0 || cols[j] >= a.cols)
        throw argument_error("submat: column index out of range");
      r.at(static_cast<int>(i), static_cast<int>(j)) = a.at(rows[i], cols[j]);
    }
  }
  return r;
}

inline Mat kron(const Mat& a, const Mat& b) {
  require_same_field(a, b, "kron");
  Mat r(a.F, a.rows * b.rows, a.cols * b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) {
      const Value& aij = a.at(i, j);
      if (a.F->is_zero(aij)) continue;
      for (int k = 0; k < b.rows; ++k)
        for (int l = 0; l < b.cols; ++l) {
          const Value& bkl = b.at(k, l);
          if (a.F->is_zero(bkl)) continue;
          r.at(i * b.rows + k, j * b.cols + l) = a.F->mul(aij, bkl);
        }
    }
  return r;
}

// ---------------------------------------------------------------------------
// Canonical elimination engine.
//
// Deterministic pivoting rule, fixed once for the whole library: columns are
// processed left to right and the pivot for a column is the first row (lowest
// index) that has not yet served as a pivot and has a nonzero entry there.
// Rows are never swapped during elimination; at the end they are permuted so
// that pivot i sits in row i, which makes R the unique reduced row echelon
// form of the input. Equal inputs therefore give bit-identical results.
// ---------------------------------------------------------------------------

struct EchelonResult {
  Mat R;                        // reduced row echelon form, zero rows last
  Mat T;                        // only when requested: T * A == R
  bool has_transform = false;
  std::vector<int> pivot_rows;  // original row index of each pivot, in pivot-column order
  std::vector<int> pivot_cols;  // strictly increasing
  int rank = 0;
};

namespace detail {

// Clears denominators and common integer content per row. Row scaling by a
// nonzero constant changes neither the reduced echelon form nor the pivot
// structure, so rank-only paths use this to keep rational entries small.
inline Mat strip_rational_content(const Mat& a) {
  Mat r = a;
  for (int i = 0; i < r.rows; ++i) {
    BigInt lcm_den = 1, gcd_num = 0;
    for (int j = 0; j < r.cols; ++j) {
      const BigRat& q = r.at(i, j).rat();
      if (q == 0) continue;
      lcm_den = boost::multiprecision::lcm(lcm_den, boost::multiprecision::denominator(q));
      gcd_num = boost::multiprecision::gcd(gcd_num, boost::multiprecision::numerator(q));
    }
    if (gcd_num == 0) continue;
    const BigRat scale(lcm_den, gcd_num);
    for (int j = 0; j < r.cols; ++j) {
      const BigRat& q = r.at(i, j).rat();
      if (q != 0) r.at(i, j) = Value::of_rat(q * scale);
    }
  }
  return r;
}

struct PivotSet {
  int rank = 0;
  std::vector<int> pivot_rows;  // in pivot-column order
  std::vector<int> pivot_cols;  // strictly increasing
};

// Fraction-free elimination on a denominator-cleared integer copy of a
// rational matrix. Every intermediate entry is a single bordered minor of
// the input (Sylvester's identity makes the division by the previous pivot
// exact), so entries never need gcd normalization and the bit growth stays
// linear in the step count — far cheaper than fraction arithmetic once the
// matrix has more than a few dozen rows. The pivot rule matches echelon()
// (first eligible row, columns in order; row scaling moves no pivots), so
// the two report identical pivot sets and callers may mix them.
inline PivotSet rational_pivots(const Mat& a) {
  PivotSet out;
  const int R = a.rows, C = a.cols;
  std::vector<BigInt> w(static_cast<std::size_t>(R) * static_cast<std::size_t>(C));
  for (int i = 0; i < R; ++i) {
    BigInt lcm_den = 1;
    for (int j = 0; j < C; ++j) {
      const BigRat& q = a.at(i, j).rat();
      if (q != 0)
        lcm_den = boost::multiprecision::lcm(lcm_den, boost::multiprecision::denominator(q));
    }
    for (int j = 0; j < C; ++j) {
      const BigRat& q = a.at(i, j).rat();
      if (q != 0)
        w[static_cast<std::size_t>(i) * C + j] =
            boost::multiprecision::numerator(q) * (lcm_den / boost::multiprecision::denominator(q));
    }
  }
  std::vector<bool> used(static_cast<std::size_t>(R), false);
  BigInt prev = 1;
  for (int col = 0; col < C; ++col) {
    int piv = -1;
    for (int row = 0; row < R && piv < 0; ++row)
      if (!used[row] && w[static_cast<std::size_t>(row) * C + col] != 0) piv = row;
    if (piv < 0) continue;
    used[piv] = true;
    out.pivot_rows.push_back(piv);
    out.pivot_cols.push_back(col);
    ++out.rank;
    const std::size_t pbase = static_cast<std::size_t>(piv) * C;
    const BigInt& pv = w[pbase + col];
    for (int row = 0; row < R; ++row) {
      if (used[row]) continue;
      const std::size_t rbase = static_cast<std::size_t>(row) * C;
      const BigInt lead = w[rbase + col];
      // The zero-lead rows must be updated too (scaled by pv / prev), or the
      // minor invariant breaks and later divisions stop being exact.
      for (int j = col + 1; j < C; ++j) {
        BigInt num = pv * w[rbase + j];
        if (lead != 0) num -= lead * w[pbase + j];
        w[rbase + j] = num / prev;
      }
      w[rbase + col] = 0;
    }
    prev = pv;
  }
  return out;
}

}  // namespace detail

inline EchelonResult echelon(const Mat& a, bool with_transform = false) {
  EchelonResult res;
  Mat W = a;
  Mat T = with_transform ? Mat::identity(a.F, a.rows) : Mat();
  const FieldPtr& F = a.F;
  std::vector<bool> used(static_cast<std::size_t>(a.rows), false);

  for (int col = 0; col < a.cols; ++col) {
    int piv = -1;
    for (int row = 0; row < a.rows; ++row) {
      if (!used[row] && !F->is_zero(W.at(row, col))) {
        piv = row;
        break;
      }
    }
    if (piv < 0) continue;
    used[piv] = true;
    res.pivot_rows.push_back(piv);
    res.pivot_cols.push_back(col);

    const Value scale = F->inv(W.at(piv, col));
    for (int j = col; j < a.cols; ++j) W.at(piv, j) = F->mul(scale, W.at(piv, j));
    if (with_transform)
      for (int j = 0; j < a.rows; ++j) T.at(piv, j) = F->mul(scale, T.at(piv, j));

    for (int row = 0; row < a.rows; ++row) {
      if (row == piv) continue;
      const Value f = W.at(row, col);
      if (F->is_zero(f)) continue;
      for (int j = col; j < a.cols; ++j)
        W.at(row, j) = F->sub(W.at(row, j), F->mul(f, W.at(piv, j)));
      if (with_transform)
        for (int j = 0; j < a.rows; ++j)
          T.at(row, j) = F->sub(T.at(row, j), F->mul(f, T.at(piv, j)));
    }
  }

  res.rank = static_cast<int>(res.pivot_rows.size());

  // Sort rows: pivot i into row i, remaining (zero) rows after, by index.
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(a.rows));
  for (int r : res.pivot_rows) order.push_back(r);
  for (int r = 0; r < a.rows; ++r)
    if (!used[r]) order.push_back(r);
  Mat R(a.F, a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) R.at(i, j) = W.at(order[i], j);
  res.R = std::move(R);
  if (with_transform) {
    Mat Tp(a.F, a.rows, a.rows);
    for (int i = 0; i < a.rows; ++i)
      for (int j = 0; j < a.rows; ++j) Tp.at(i, j) = T.at(order[i], j);
    res.T = std::move(Tp);
    res.has_transform = true;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Fast rank paths for finite fields. A tower of extensions over a prime
// field is flattened to its prime subfield once per field object; matrices
// are then expanded entrywise by the regular representation, which scales
// the rank by the flattening degree. Characteristic 2 additionally uses
// bit-packed rows.
// ---------------------------------------------------------------------------

namespace detail {

struct FlatFinite {
  std::uint64_t p = 0;
  int e = 1;                       // dimension over the prime subfield
  std::vector<FieldPtr> chain;     // top field first, prime field last
  std::vector<int> chain_dims;     // flat dimension of each chain entry
  std::vector<std::uint64_t> tbl;  // e*e*e structure constants ((i*e+j)*e+k)

  // Writes the e prime-subfield coordinates of v (an element of chain[0]).
  void coords(const Value& v, std::uint64_t* out) const { coords_rec(0, v, out); }

  void coords_rec(std::size_t level, const Value& v, std::uint64_t* out) const {
    if (level + 1 == chain.size()) {
      out[0] = v.word();
      return;
    }
    const int sub = chain_dims[level + 1];
    const ValueVec& c = v.vec();
    for (std::size_t i = 0; i < c.size(); ++i)
      coords_rec(level + 1, c[i], out + static_cast<std::size_t>(sub) * i);
  }
};

inline std::shared_ptr<const FlatFinite> flatten_finite(const FieldPtr& F) {
  thread_local std::map<const Field*, std::shared_ptr<const FlatFinite>> cache;
  auto it = cache.find(F.get());
  if (it != cache.end()) return it->second;

  std::shared_ptr<const FlatFinite> result;
  std::vector<FieldPtr> chain;
  FieldPtr cur = F;
  while (cur && cur->kind() == Field::Kind::extension) {
    chain.push_back(cur);
    cur = cur->base_field();
  }
  if (cur && cur->kind() == Field::Kind::prime) {
    chain.push_back(cur);
    auto flat = std::make_shared<FlatFinite>();
    flat->chain = chain;
    flat->p = std::static_pointer_cast<const PrimeField>(cur)->modulus();
    flat->chain_dims.assign(chain.size(), 1);
    for (std::size_t i = chain.size() - 1; i-- > 0;)
      flat->chain_dims[i] = flat->chain_dims[i + 1] * chain[i]->degree_over_base();
    flat->e = flat->chain_dims[0];

    // Flat basis values, then structure constants from pairwise products.
    const int e = flat->e;
    std::vector<Value> basis(static_cast<std::size_t>(e));
    for (int i = 0; i < e; ++i) {
      // The flat basis element i is the product over the levels of the
      // per-level basis elements encoded in the mixed-radix digits of i.
      std::size_t level = chain.size() - 1;
      Value v = chain[level]->one();
      int remaining = i;
      while (level-- > 0) {
        const auto* ext = static_cast<const ExtensionField*>(chain[level].get());
        const int sub = flat->chain_dims[level + 1];
        const int t = remaining / sub;
        remaining %= sub;
        ValueVec c(static_cast<std::size_t>(ext->degree_over_base()),
                   chain[level + 1]->zero());
        c[t] = v;
        v = Value::of_vec(std::move(c));
      }
      basis[i] = v;
    }
    flat->tbl.assign(static_cast<std::size_t>(e) * e * e, 0);
    std::vector<std::uint64_t> scratch(static_cast<std::size_t>(e));
    for (int i = 0; i < e; ++i)
      for (int j = 0; j < e; ++j) {
        const Value prod = F->mul(basis[i], basis[j]);
        flat->coords(prod, scratch.data());
        for (int k = 0; k < e; ++k)
          flat->tbl[(static_cast<std::size_t>(i) * e + j) * e + k] = scratch[k];
      }
    result = flat;
  }
  cache.emplace(F.get(), result);
  return result;
}

// Forward elimination rank of a word matrix mod p. Destroys `a`.
inline int word_rank(std::uint64_t p, int rows, int cols, std::vector<std::uint64_t>& a) {
  const auto idx = [cols](int i, int j) { return static_cast<std::size_t>(i) * cols + j; };
  const auto mulmod = [p](std::uint64_t x, std::uint64_t y) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) * y) % p);
  };
  const auto invmod = [p, mulmod](std::uint64_t x) {
    std::uint64_t result = 1, base = x;
    std::uint64_t e = p - 2;
    while (e) {
      if (e & 1) result = mulmod(result, base);
      base = mulmod(base, base);
      e >>= 1;
    }
    return result;
  };
  int rank = 0;
  std::vector<bool> used(static_cast<std::size_t>(rows), false);
  for (int col = 0; col < cols && rank < rows; ++col) {
    int piv = -1;
    for (int row = 0; row < rows; ++row)
      if (!used[row] && a[idx(row, col)] != 0) {
        piv = row;
        break;
      }
    if (piv < 0) continue;
    used[piv] = true;
    ++rank;
    const std::uint64_t s = invmod(a[idx(piv, col)]);
    for (int j = col; j < cols; ++j) a[idx(piv, j)] = mulmod(s, a[idx(piv, j)]);
    for (int row = 0; row < rows; ++row) {
      if (used[row]) continue;
      const std::uint64_t f = a[idx(row, col)];
      if (f == 0) continue;
      const std::uint64_t fp = p - f;
      for (int j = col; j < cols; ++j)
        a[idx(row, j)] = (a[idx(row, j)] + mulmod(fp, a[idx(piv, j)])) % p;
    }
  }
  return rank;
}

// Bit-packed elimination rank over F_2. Destroys `a` (rows*stride words).
inline int bit_rank(int rows, int cols, std::vector<std::uint64_t>& a) {
  const int stride = (cols + 63) / 64;
  int rank = 0;
  std::vector<bool> used(static_cast<std::size_t>(rows), false);
  for (int col = 0; col < cols && rank < rows; ++col) {
    const int w = col / 64;
    const std::uint64_t mask = 1ull << (col % 64);
    int piv = -1;
    for (int row = 0; row < rows; ++row)
      if (!used[row] && (a[static_cast<std::size_t>(row) * stride + w] & mask)) {
        piv = row;
        break;
      }
    if (piv < 0) continue;
    used[piv] = true;
    ++rank;
    for (int row = 0; row < rows; ++row) {
      if (used[row]) continue;
      if (a[static_cast<std::size_t>(row) * stride + w] & mask) {
        const std::uint64_t* src = &a[static_cast<std::size_t>(piv) * stride];
        std::uint64_t* dst = &a[static_cast<std::size_t>(row) * stride];
        for (int t = w; t < stride; ++t) dst[t] ^= src[t];
      }
    }
  }
  return rank;
}

// Rank over a flattenable finite field via the regular representation into
// the prime subfield: rank_F(A) = rank_{F_p}(blow-up) / e.
inline std::optional<int> finite_fast_rank(const Mat& a) {
  auto flat = flatten_finite(a.F);
  if (!flat) return std::nullopt;
  const int e = flat->e;
  const int R = a.rows * e, C = a.cols * e;
  std::vector<std::uint64_t> coords(static_cast<std::size_t>(e));
  if (flat->p == 2) {
    const int stride = (C + 63) / 64;
    std::vector<std::uint64_t> packed(static_cast<std::size_t>(R) * stride, 0);
    for (int i = 0; i < a.rows; ++i)
      for (int j = 0; j < a.cols; ++j) {
        if (a.F->is_zero(a.at(i, j))) continue;
        flat->coords(a.at(i, j), coords.data());
        for (int k = 0; k < e; ++k)
          for (int l = 0; l < e; ++l) {
            // Block entry (k, l): coordinate k of entry * flat basis l.
            std::uint64_t bit = 0;
            if (e == 1) {
              bit = coords[0] & 1;
            } else {
              std::uint64_t sum = 0;
              for (int t = 0; t < e; ++t)
                sum ^= coords[t] & flat->tbl[(static_cast<std::size_t>(t) * e + l) * e + k];
              bit = sum & 1;
            }
            if (bit) {
              const int rr = i * e + k, cc = j * e + l;
              packed[static_cast<std::size_t>(rr) * stride + cc / 64] |= 1ull << (cc % 64);
            }
          }
      }
    return bit_rank(R, C, packed) / e;
  }
  std::vector<std::uint64_t> words(static_cast<std::size_t>(R) * C, 0);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) {
      if (a.F->is_zero(a.at(i, j))) continue;
      flat->coords(a.at(i, j), coords.data());
      for (int k = 0; k < e; ++k)
        for (int l = 0; l < e; ++l) {
          std::uint64_t sum = 0;
          if (e == 1) {
            sum = coords[0];
          } else {
            for (int t = 0; t < e; ++t) {
              const std::uint64_t c = coords[t];
              if (!c) continue;
              const std::uint64_t s =
                  flat->tbl[(static_cast<std::size_t>(t) * e + l) * e + k];
              if (!s) continue;
              sum = (sum + static_cast<std::uint64_t>(
                               (static_cast<unsigned __int128>(c) * s) % flat->p)) %
                    flat->p;
            }
          }
          words[static_cast<std::size_t>(i * e + k) * C + (j * e + l)] = sum;
        }
    }
  return word_rank(flat->p, R, C, words) / e;
}

}  // namespace detail

inline int mat_rank(const Mat& a) {
  if (a.empty()) return 0;
  if (auto fast = detail::finite_fast_rank(a)) return *fast;
  if (a.F->kind() == Field::Kind::rationals) return detail::rational_pivots(a).rank;
  return echelon(a).rank;
}

// Basis of the right null space {x : Ax = 0}, one basis vector per column.
// Canonical: derived from the reduced echelon form with free variables set
// to 1 in increasing column order.
inline Mat mat_kernel(const Mat& a) {
  const Mat work = a.F->kind() == Field::Kind::rationals
                       ? detail::strip_rational_content(a)
                       : a;
  EchelonResult ech = echelon(work);
  std::vector<bool> is_pivot(static_cast<std::size_t>(a.cols), false);
  for (int c : ech.pivot_cols) is_pivot[c] = true;
  std::vector<int> free_cols;
  for (int j = 0; j < a.cols; ++j)
    if (!is_pivot[j]) free_cols.push_back(j);
  Mat K(a.F, a.cols, static_cast<int>(free_cols.size()));
  for (std::size_t fi = 0; fi < free_cols.size(); ++fi) {
    K.at(free_cols[fi], static_cast<int>(fi)) = a.F->one();
    for (int c = 0; c < ech.rank; ++c)
      K.at(ech.pivot_cols[c], static_cast<int>(fi)) = a.F->neg(ech.R.at(c, free_cols[fi]));
  }
  return K;
}

// First solution of Ax = b with free variables set to zero, or nullopt.
inline std::optional<ValueVec> mat_solve(const Mat& a, const ValueVec& b) {
  if (static_cast<int>(b.size()) != a.rows) throw argument_error("mat_solve: size mismatch");
  Mat aug(a.F, a.rows, a.cols + 1);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) aug.at(i, j) = a.at(i, j);
    aug.at(i, a.cols) = b[i];
  }
  EchelonResult ech = echelon(aug);
  ValueVec x(static_cast<std::size_t>(a.cols), a.F->zero());
  for (int c = 0; c < ech.rank; ++c) {
    if (ech.pivot_cols[c] == a.cols) return std::nullopt;  // inconsistent
    x[ech.pivot_cols[c]] = ech.R.at(c, a.cols);
  }
  return x;
}

inline std::optional<Mat> mat_inverse(const Mat& a) {
  if (a.rows != a.cols) throw argument_error("mat_inverse: matrix is not square");
  EchelonResult ech = echelon(hstack(a, Mat::identity(a.F, a.rows)));
  if (ech.rank < a.rows) return std::nullopt;
  for (int c = 0; c < a.rows; ++c)
    if (ech.pivot_cols[c] != c) return std::nullopt;
  std::vector<int> rows(static_cast<std::size_t>(a.rows));
  std::vector<int> cols(static_cast<std::size_t>(a.rows));
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), a.rows);
  return submat(ech.R, rows, cols);
}

// Columns of A at the pivot positions: a canonical independent subset
// spanning the column space.
inline Mat col_space_basis(const Mat& a) {
  EchelonResult ech = echelon(a);
  std::vector<int> all_rows(static_cast<std::size_t>(a.rows));
  std::iota(all_rows.begin(), all_rows.end(), 0);
  return submat(a, all_rows, ech.pivot_cols);
}

// True when every column of v lies in the column space of a.
inline bool in_col_span(const Mat& a, const Mat& v) {
  require_same_field(a, v, "in_col_span");
  if (a.rows != v.rows) throw argument_error("in_col_span: row counts differ");
  EchelonResult ech = echelon(hstack(a, v));
  for (int c : ech.pivot_cols)
    if (c >= a.cols) return false;
  return true;
}

// Basis (as columns) of the preimage A^{-1}(col space of W), i.e. all x with
// Ax in span(W). Includes the kernel of A.
inline Mat mat_preimage(const Mat& a, const Mat& w) {
  require_same_field(a, w, "mat_preimage");
  if (a.rows != w.rows) throw argument_error("mat_preimage: row counts differ");
  Mat K = mat_kernel(hstack(a, w));
  std::vector<int> xrows(static_cast<std::size_t>(a.cols));
  std::iota(xrows.begin(), xrows.end(), 0);
  std::vector<int> all_cols(static_cast<std::size_t>(K.cols));
  std::iota(all_cols.begin(), all_cols.end(), 0);
  Mat X = submat(K, xrows, all_cols);
  return col_space_basis(X);
}

// Row and column indices (0-based, ascending) of a rank(A) x rank(A)
// invertible submatrix: the pivot rows and pivot columns of the canonical
// elimination.
struct SubmatrixIndices {
  std::vector<int> rows;
  std::vector<int> cols;
};

inline SubmatrixIndices nonsingular_submatrix(const Mat& a) {
  SubmatrixIndices s;
  if (a.F->kind() == Field::Kind::rationals) {
    detail::PivotSet p = detail::rational_pivots(a);
    s.rows = std::move(p.pivot_rows);
    s.cols = std::move(p.pivot_cols);
  } else {
    EchelonResult ech = echelon(a);
    s.rows = ech.pivot_rows;
    s.cols = ech.pivot_cols;
  }
  std::sort(s.rows.begin(), s.rows.end());
  return s;
}

// ---------------------------------------------------------------------------
// Reduction of rational matrices modulo a word-sized prime. A nonzero minor
// survives the reduction for all but finitely many primes, so ranks computed
// modulo P are lower bounds for the rational rank, and a full-size modular
// rank certifies the exact rational rank. map() fails (nullopt) when some
// denominator vanishes mod P; callers then move to the next prime.
// ---------------------------------------------------------------------------

struct RatModMap {
  std::shared_ptr<const PrimeField> FP;

  explicit RatModMap(std::uint64_t P) : FP(PrimeField::get(P)) {}

  std::optional<Value> map_value(const BigRat& q) const {
    const BigInt P(FP->modulus());
    BigInt num = boost::multiprecision::numerator(q) % P;
    BigInt den = boost::multiprecision::denominator(q) % P;
    if (den == 0) return std::nullopt;
    if (num < 0) num += P;
    if (den < 0) den += P;
    const std::uint64_t n = num.convert_to<std::uint64_t>();
    const std::uint64_t d = den.convert_to<std::uint64_t>();
    return Value::of_word(FP->mulmod(n, FP->invmod(d)));
  }

  std::optional<Mat> map(const Mat& a) const {
    if (a.F->kind() != Field::Kind::rationals)
      throw argument_error("RatModMap expects a rational matrix");
    Mat r(FP, a.rows, a.cols);
    for (std::size_t i = 0; i < a.e.size(); ++i) {
      auto v = map_value(a.e[i].rat());
      if (!v) return std::nullopt;
      r.e[i] = *v;
    }
    return r;
  }
};

namespace detail {

// Word-sized primes used for modular rank bounds on rational data.
inline const std::vector<std::uint64_t>& modular_primes() {
  static const std::vector<std::uint64_t> primes = {2147483647ull, 2147483629ull,
                                                    2147483587ull, 2147483579ull,
                                                    2147483563ull};
  return primes;
}

}  // namespace detail

// Rank of a rational matrix: exact, but computed via a modular lower bound
// first. If the bound modulo the first good prime already equals min(rows,
// cols) the answer is certified; otherwise falls back to exact elimination.
inline int mat_rank_rational_fast(const Mat& a) {
  if (a.F->kind() != Field::Kind::rationals) return mat_rank(a);
  const int full = std::min(a.rows, a.cols);
  for (std::uint64_t p : detail::modular_primes()) {
    RatModMap mod(p);
    auto img = mod.map(a);
    if (!img) continue;
    const int r = mat_rank(*img);
    if (r == full) return full;
    break;  // undershoot is possible but rare; decide exactly below
  }
  return mat_rank(a);
}

}  // namespace ncrank
