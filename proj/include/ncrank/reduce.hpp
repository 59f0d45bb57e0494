#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ncrank/errors.hpp"
#include "ncrank/matrix.hpp"
#include "ncrank/regularity.hpp"
#include "ncrank/spaces.hpp"

// Two ways to shrink the blow-up degree of a full-rank point without losing
// scaled rank.
//
// The greedy route drops the last coefficient row and column and rounds the
// rank back up: deleting one block row and one block column costs at most 2n
// rank, and when d > n+1 the remainder still exceeds (d-1)(n-1), whose only
// multiple of d-1 above it is full rank (d-1)n. One call shrinks the degree
// by one; iterating stops at degree n+2.
//
// The table route maintains a grid of points M(k, l) in the (k, l)-blow-ups
// whose cached ranks satisfy five properties: monotone in each index,
// midpoint-concave in each index, and divisible by k on the diagonal. A
// repair loop enforces the properties by replacements that strictly increase
// some cached rank, so it ends within N^3*n rounds. A purely numeric lemma
// about such rank functions (dm_conclude) then forces the (d, d) entry to
// full rank whenever the (d+1, d+1) entry is full, which shrinks the degree
// by one all the way down to one below the block size — a smaller final
// degree than the greedy route, at the cost of grid repairs.

namespace ncrank {

struct TablePolicy {
  RoundingPolicy rounding{};
  std::uint64_t seed = 0x243f6a8885a308d3ull;
  int element_budget = 64;  // candidates for the rank-2 corner seed
};

// ---------------------------------------------------------------------------
// greedy_reduce: from a square (d, d)-point of full rank dn with d > n+1 to
// a (d-1, d-1)-point of full rank (d-1)n. Both rank claims are certified.
// ---------------------------------------------------------------------------
inline BlowupPoint greedy_reduce(const MatrixSpace& s, const BlowupPoint& A,
                                 const RoundingPolicy& rounding = {}) {
  if (s.rows != s.cols) throw argument_error("greedy reduction needs a square matrix space");
  check_point_shape(s, A);
  if (A.a != A.b) throw argument_error("greedy reduction needs a square blow-up point");
  const int n = s.rows;
  const int d = A.a;
  if (d <= n + 1)
    throw precondition_error("greedy reduction needs blow-up degree above n + 1 = " +
                             std::to_string(n + 1) + "; the counting argument fails at degree " +
                             std::to_string(d));
  if (mat_rank_rational_fast(assemble(s, A)) != d * n)
    throw precondition_error("greedy reduction needs a point of full rank " +
                             std::to_string(d * n));

  std::vector<int> keep(static_cast<std::size_t>(d) - 1);
  std::iota(keep.begin(), keep.end(), 0);
  BlowupPoint sub;
  sub.a = sub.b = d - 1;
  sub.coeffs.reserve(A.coeffs.size());
  for (const Mat& t : A.coeffs) sub.coeffs.push_back(submat(t, keep, keep));

  if (!detail::rank_at_least(assemble(s, sub), (d - 1) * (n - 1) + 1))
    throw internal_error("the trimmed point lost more rank than the counting argument allows");
  BlowupPoint out = round_rank(s, sub, rounding);
  if (mat_rank_rational_fast(assemble(s, out)) != (d - 1) * n)
    throw internal_error("greedy reduction missed full rank at the smaller degree");
  return out;
}

// ---------------------------------------------------------------------------
// The rank table. Entries live at grid positions 0 <= k, l <= N; row 0 and
// column 0 hold empty matrices of rank zero and are never replaced. Cached
// ranks are exact by construction (every write goes through an exact rank
// computation).
// ---------------------------------------------------------------------------
struct DMTable {
  MatrixSpace space;                 // square generators; block size = space.rows
  int N = 0;                         // grid bound
  std::vector<BlowupPoint> entries;  // (N+1)^2, row-major by (k, l)
  std::vector<int> ranks;            // cached exact ranks, same layout

  int block_size() const { return space.rows; }
  std::size_t index(int k, int l) const {
    if (k < 0 || l < 0 || k > N || l > N) throw argument_error("table index out of range");
    return static_cast<std::size_t>(k) * (static_cast<std::size_t>(N) + 1) +
           static_cast<std::size_t>(l);
  }
  const BlowupPoint& entry(int k, int l) const { return entries[index(k, l)]; }
  int rank_at(int k, int l) const { return ranks[index(k, l)]; }
};

// The numeric face of a table: just the rank function on the grid.
struct RankGrid {
  int N = 0;
  std::vector<int> r;  // (N+1)^2, row-major by (k, l)

  int at(int k, int l) const {
    if (k < 0 || l < 0 || k > N || l > N) throw argument_error("rank grid index out of range");
    return r[static_cast<std::size_t>(k) * (static_cast<std::size_t>(N) + 1) +
             static_cast<std::size_t>(l)];
  }
};

inline RankGrid dm_rank_grid(const DMTable& T) { return RankGrid{T.N, T.ranks}; }

namespace detail {

inline int table_rank(const MatrixSpace& s, const BlowupPoint& p) {
  if (p.a == 0 || p.b == 0) return 0;
  return mat_rank_rational_fast(assemble(s, p));
}

struct TableViolation {
  int property = 0;  // 1..5
  int k = 0;
  int l = 0;
};

// First broken property in scan order: positions row-major, properties in
// numeric order at each position. The scan order is part of the contract —
// the repair loop's output is deterministic because of it.
inline std::optional<TableViolation> grid_violation(const RankGrid& g) {
  const int N = g.N;
  for (int k = 0; k <= N; ++k)
    for (int l = 0; l <= N; ++l) {
      if (l < N && g.at(k, l + 1) < g.at(k, l)) return TableViolation{1, k, l};
      if (k < N && g.at(k + 1, l) < g.at(k, l)) return TableViolation{2, k, l};
      if (l < N - 1 && 2 * g.at(k, l + 1) < g.at(k, l) + g.at(k, l + 2))
        return TableViolation{3, k, l};
      if (k < N - 1 && 2 * g.at(k + 1, l) < g.at(k, l) + g.at(k + 2, l))
        return TableViolation{4, k, l};
      if (k == l && k >= 1 && g.at(k, k) % k != 0) return TableViolation{5, k, l};
    }
  return std::nullopt;
}

// Coefficients padded with zero block rows and columns.
inline BlowupPoint table_pad(const FieldPtr& F, const BlowupPoint& p, int dr, int dc) {
  BlowupPoint out;
  out.a = p.a + dr;
  out.b = p.b + dc;
  out.coeffs.reserve(p.coeffs.size());
  for (const Mat& t : p.coeffs) {
    Mat m(F, out.a, out.b);
    for (int i = 0; i < p.a; ++i)
      for (int j = 0; j < p.b; ++j) m.at(i, j) = t.at(i, j);
    out.coeffs.push_back(std::move(m));
  }
  return out;
}

// Sub-point on the listed coefficient rows and columns.
inline BlowupPoint table_take(const BlowupPoint& p, const std::vector<int>& rows,
                              const std::vector<int>& cols) {
  BlowupPoint out;
  out.a = static_cast<int>(rows.size());
  out.b = static_cast<int>(cols.size());
  out.coeffs.reserve(p.coeffs.size());
  for (const Mat& t : p.coeffs) out.coeffs.push_back(submat(t, rows, cols));
  return out;
}

// p + t * q, coefficient-wise; shapes must already agree.
inline BlowupPoint table_axpy(const BlowupPoint& p, const Value& t, const BlowupPoint& q) {
  BlowupPoint out = p;
  for (std::size_t i = 0; i < out.coeffs.size(); ++i)
    out.coeffs[i] = mat_add(out.coeffs[i], mat_scale(t, q.coeffs[i]));
  return out;
}

// A rank >= 2 element of the space written as a (1, 1)-point: basis elements
// first, then seeded combinations, every candidate checked exactly. Spaces
// that reach full scaled rank with blocks of size >= 2 always contain one
// (spaces of rank <= 1 elements compress to a line or a hyperplane kernel).
inline BlowupPoint corner_seed(const MatrixSpace& s, std::uint64_t seed, int budget) {
  const FieldPtr& F = s.F;
  const int m = s.generator_count();
  std::mt19937_64 rng(seed);
  const std::uint64_t pool = 2ull * static_cast<std::uint64_t>(s.rows) + 1;
  for (int attempt = 0; attempt < budget; ++attempt) {
    BlowupPoint p;
    p.a = p.b = 1;
    p.coeffs.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      Mat t(F, 1, 1);
      if (attempt < m) {
        if (i == attempt) t.at(0, 0) = F->one();
      } else {
        t.at(0, 0) = F->element_at(static_cast<long long>(rng() % pool));
      }
      p.coeffs.push_back(std::move(t));
    }
    if (mat_rank(assemble(s, p)) >= 2) return p;
  }
  throw internal_error("no element of rank at least 2 surfaced within the budget");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Table construction and seeding.
// ---------------------------------------------------------------------------
inline DMTable make_dm_table(const MatrixSpace& s, int N) {
  if (s.rows != s.cols) throw argument_error("the rank table needs a square matrix space");
  if (N < 1) throw argument_error("the table grid bound must be positive");
  DMTable T;
  T.space = s;
  T.N = N;
  const std::size_t cells = static_cast<std::size_t>(N + 1) * static_cast<std::size_t>(N + 1);
  T.entries.reserve(cells);
  for (int k = 0; k <= N; ++k)
    for (int l = 0; l <= N; ++l) {
      BlowupPoint p;
      p.a = k;
      p.b = l;
      p.coeffs.assign(static_cast<std::size_t>(s.generator_count()), Mat(s.F, k, l));
      T.entries.push_back(std::move(p));
    }
  T.ranks.assign(cells, 0);
  return T;
}

inline void dm_set_entry(DMTable& T, int k, int l, BlowupPoint p) {
  if (k < 1 || l < 1) throw argument_error("the boundary entries are fixed to empty matrices");
  check_point_shape(T.space, p);
  if (p.a != k || p.b != l)
    throw argument_error("the entry shape must match its grid position");
  const std::size_t i = T.index(k, l);
  T.ranks[i] = detail::table_rank(T.space, p);
  T.entries[i] = std::move(p);
}

// Human-readable first violation of the five properties, or nullopt.
inline std::optional<std::string> dm_first_violation(const DMTable& T) {
  const auto v = detail::grid_violation(dm_rank_grid(T));
  if (!v) return std::nullopt;
  return "property (" + std::to_string(v->property) + ") fails at (" + std::to_string(v->k) +
         ", " + std::to_string(v->l) + ")";
}

// ---------------------------------------------------------------------------
// dm_repair_table: enforce the five properties by rank-increasing
// replacements. S supplies the shifts for the concavity fixes and the sample
// set for the coefficient reduction that follows every replacement; it needs
// at least 2nN+1 distinct elements so that the two rank conditions of the
// concavity fix, each a nonzero polynomial of degree at most nN in the
// shift, cannot both die on all of S. Terminates within N^3*n rounds because
// every replacement strictly increases a cached rank.
// ---------------------------------------------------------------------------
inline DMTable dm_repair_table(DMTable T, const ValueVec& S, const TablePolicy& policy = {},
                               int* rounds_out = nullptr) {
  const MatrixSpace& s = T.space;
  const FieldPtr& F = s.F;
  const int n = T.block_size();
  const int N = T.N;
  const long long need = 2ll * n * N + 1;
  if (static_cast<long long>(S.size()) < need)
    throw argument_error("the shift sample needs at least 2nN+1 = " + std::to_string(need) +
                         " elements, got " + std::to_string(S.size()));
  for (std::size_t i = 0; i < S.size(); ++i)
    for (std::size_t j = i + 1; j < S.size(); ++j)
      if (F->eq(S[i], S[j]))
        throw argument_error("the shift sample must consist of distinct elements");

  const auto oracle = [](const Mat& m, int t) { return detail::rank_at_least(m, t); };

  // Replace entry (k, l), assert the strict rank increase, then reduce the
  // coefficients into S and re-cache the exact rank.
  const auto install = [&](int k, int l, BlowupPoint p) {
    const int before = T.rank_at(k, l);
    const int fresh = detail::table_rank(s, p);
    if (fresh <= before)
      throw internal_error("a table replacement failed to increase the rank at (" +
                           std::to_string(k) + ", " + std::to_string(l) + ")");
    p = reduce_coefficients(s, std::move(p), fresh, &S, oracle);
    const int after = detail::table_rank(s, p);
    if (after < fresh) throw internal_error("data reduction lost rank on a table entry");
    const std::size_t i = T.index(k, l);
    T.entries[i] = std::move(p);
    T.ranks[i] = after;
  };

  const long long max_rounds = 1ll * N * N * N * n;
  long long rounds = 0;
  for (;;) {
    const auto v = detail::grid_violation(dm_rank_grid(T));
    if (!v) break;
    if (++rounds > max_rounds)
      throw internal_error("table repair exceeded its round bound of " +
                           std::to_string(max_rounds));
    const int k = v->k;
    const int l = v->l;
    switch (v->property) {
      case 1:  // r(k, l+1) < r(k, l): pad a zero block column onto M(k, l)
        install(k, l + 1, detail::table_pad(F, T.entry(k, l), 0, 1));
        break;
      case 2:  // r(k+1, l) < r(k, l): pad a zero block row onto M(k, l)
        install(k + 1, l, detail::table_pad(F, T.entry(k, l), 1, 0));
        break;
      case 3: {  // column concavity: shift M(k, l+2) by t * M(k, l) padded wide
        const int rlo = T.rank_at(k, l);
        const int rhi = T.rank_at(k, l + 2);
        const BlowupPoint wide = detail::table_pad(F, T.entry(k, l), 0, 2);
        std::vector<int> all_rows(static_cast<std::size_t>(k));
        std::iota(all_rows.begin(), all_rows.end(), 0);
        std::vector<int> head_cols(static_cast<std::size_t>(l));
        std::iota(head_cols.begin(), head_cols.end(), 0);
        std::optional<BlowupPoint> chosen;
        for (const Value& t : S) {
          BlowupPoint cand = detail::table_axpy(T.entry(k, l + 2), t, wide);
          if (!oracle(assemble(s, cand), rhi)) continue;
          if (l > 0 &&
              !oracle(assemble(s, detail::table_take(cand, all_rows, head_cols)), rlo))
            continue;
          chosen = std::move(cand);
          break;
        }
        if (!chosen) throw internal_error("no shift in the sample preserved the two ranks");
        if (oracle(assemble(s, *chosen), rhi + 1)) {
          install(k, l + 2, std::move(*chosen));
          break;
        }
        // rank stayed exactly rhi: one of the two one-column-narrower
        // sub-points must beat the middle entry (their column spans
        // intersect in at least rlo dimensions and join to rhi).
        std::vector<int> first(static_cast<std::size_t>(l) + 1);
        std::iota(first.begin(), first.end(), 0);
        std::vector<int> split(head_cols);
        split.push_back(l + 1);
        BlowupPoint A1 = detail::table_take(*chosen, all_rows, first);
        BlowupPoint A2 = detail::table_take(*chosen, all_rows, split);
        const int r1 = detail::table_rank(s, A1);
        const int r2 = detail::table_rank(s, A2);
        install(k, l + 1, r2 > r1 ? std::move(A2) : std::move(A1));
        break;
      }
      case 4: {  // row concavity: the transpose of case 3
        const int rlo = T.rank_at(k, l);
        const int rhi = T.rank_at(k + 2, l);
        const BlowupPoint tall = detail::table_pad(F, T.entry(k, l), 2, 0);
        std::vector<int> all_cols(static_cast<std::size_t>(l));
        std::iota(all_cols.begin(), all_cols.end(), 0);
        std::vector<int> head_rows(static_cast<std::size_t>(k));
        std::iota(head_rows.begin(), head_rows.end(), 0);
        std::optional<BlowupPoint> chosen;
        for (const Value& t : S) {
          BlowupPoint cand = detail::table_axpy(T.entry(k + 2, l), t, tall);
          if (!oracle(assemble(s, cand), rhi)) continue;
          if (k > 0 &&
              !oracle(assemble(s, detail::table_take(cand, head_rows, all_cols)), rlo))
            continue;
          chosen = std::move(cand);
          break;
        }
        if (!chosen) throw internal_error("no shift in the sample preserved the two ranks");
        if (oracle(assemble(s, *chosen), rhi + 1)) {
          install(k + 2, l, std::move(*chosen));
          break;
        }
        std::vector<int> first(static_cast<std::size_t>(k) + 1);
        std::iota(first.begin(), first.end(), 0);
        std::vector<int> split(head_rows);
        split.push_back(k + 1);
        BlowupPoint A1 = detail::table_take(*chosen, first, all_cols);
        BlowupPoint A2 = detail::table_take(*chosen, split, all_cols);
        const int r1 = detail::table_rank(s, A1);
        const int r2 = detail::table_rank(s, A2);
        install(k + 1, l, r2 > r1 ? std::move(A2) : std::move(A1));
        break;
      }
      case 5:  // diagonal divisibility: round the rank up to a multiple of k
        install(k, k, round_rank(s, T.entry(k, k), policy.rounding));
        break;
      default:
        throw internal_error("unknown table property");
    }
  }
  if (rounds_out) *rounds_out = static_cast<int>(rounds);
  return T;
}

// ---------------------------------------------------------------------------
// dm_conclude: the numeric certificate. For a rank function satisfying the
// five properties and the size bounds, with r(1,1) > 1 and a full entry at
// (d+1, d+1) where n <= d+1 <= N < the grid bound, the (d, d) entry is
// forced to full rank nd. Hypothesis violations are reported individually;
// the return value is the forced equality itself, so a false return on a
// repaired table is a bug in the caller's seeding or in the repair.
// ---------------------------------------------------------------------------
inline bool dm_conclude(const RankGrid& g, int n, int d) {
  const int N = g.N;
  if (n < 1) throw argument_error("the table certificate needs a positive block size");
  if (N <= n)
    throw argument_error("the table certificate needs grid bound N > n; got N = " +
                         std::to_string(N) + " with n = " + std::to_string(n));
  for (int k = 0; k <= N; ++k)
    for (int l = 0; l <= N; ++l) {
      const int r = g.at(k, l);
      if (r < 0 || r > std::min(k, l) * n)
        throw argument_error("the rank value at (" + std::to_string(k) + ", " +
                             std::to_string(l) + ") breaks the size bound");
    }
  if (const auto v = detail::grid_violation(g))
    throw argument_error("property (" + std::to_string(v->property) + ") fails at (" +
                         std::to_string(v->k) + ", " + std::to_string(v->l) + ")");
  if (g.at(1, 1) <= 1) throw argument_error("the table certificate needs r(1, 1) > 1");
  if (!(n <= d + 1 && d + 1 <= N))
    throw argument_error("the target degree must satisfy n <= d+1 <= N; got d = " +
                         std::to_string(d));
  if (g.at(d + 1, d + 1) != n * (d + 1))
    throw argument_error("the table certificate needs a full entry at (d+1, d+1)");
  return g.at(d, d) == n * d;
}

// ---------------------------------------------------------------------------
// dm_reduce: one degree step down through the table. Seeds a grid with the
// full-rank input at (D, D) and a rank >= 2 element at (1, 1), repairs it,
// and returns the (D-1, D-1) entry, whose rank the numeric certificate
// forces to full. The returned point is re-verified exactly.
// ---------------------------------------------------------------------------
inline BlowupPoint dm_reduce(const MatrixSpace& s, const BlowupPoint& A,
                             const TablePolicy& policy = {}) {
  if (s.rows != s.cols) throw argument_error("the table route needs a square matrix space");
  check_point_shape(s, A);
  if (A.a != A.b) throw argument_error("the table route needs a square blow-up point");
  const int n = s.rows;
  const int D = A.a;
  if (n < 2) throw argument_error("the table route needs blocks of size at least 2");
  if (D < n)
    throw argument_error("the table route needs blow-up degree at least the block size " +
                         std::to_string(n) + "; got " + std::to_string(D));
  if (mat_rank_rational_fast(assemble(s, A)) != n * D)
    throw precondition_error("the table route needs a point of full rank " +
                             std::to_string(n * D));

  const int N = std::max(D, n + 1);
  const long long need = 2ll * n * N + 1;
  if (auto card = s.F->cardinality(); card && *card < need)
    throw size_error("the table route over " + s.F->name() + " needs at least " +
                     std::to_string(need) + " field elements, but |" + s.F->name() +
                     "| = " + card->str());
  ValueVec S;
  S.reserve(static_cast<std::size_t>(need));
  for (long long i = 0; i < need; ++i) S.push_back(s.F->element_at(i));

  DMTable T = make_dm_table(s, N);
  dm_set_entry(T, D, D, A);
  dm_set_entry(T, 1, 1, detail::corner_seed(s, policy.seed, policy.element_budget));
  T = dm_repair_table(std::move(T), S, policy);

  if (!dm_conclude(dm_rank_grid(T), n, D - 1))
    throw internal_error("the repaired table refused to certify degree " +
                         std::to_string(D - 1));
  BlowupPoint out = T.entry(D - 1, D - 1);
  if (detail::table_rank(s, out) != n * (D - 1))
    throw internal_error("the table's smaller point missed its certified rank");
  return out;
}

}  // namespace ncrank
