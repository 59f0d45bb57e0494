#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ncrank/errors.hpp"
#include "ncrank/fields.hpp"
#include "ncrank/increment.hpp"
#include "ncrank/matrix.hpp"
#include "ncrank/reduce.hpp"
#include "ncrank/regularity.hpp"
#include "ncrank/spaces.hpp"
#include "ncrank/towers.hpp"

// The main loop. ncrank computes the noncommutative rank r of a square
// matrix space two-sidedly and returns a self-verified certificate: a
// degree-d blow-up point of rank exactly r*d together with an (n-r)-shrunk
// subspace. The loop keeps a point of exact scaled rank r and asks the
// dichotomy step for a verdict; the containment branch finishes, the escape
// branch hands back a higher-rank point in a larger blow-up plus a full
// window. Reductions then run on the windowed sub-space — where the point is
// genuinely full-rank — and the reduced coefficients carry back unchanged,
// so the degree stays at most r+1 (greedy route) or r-1 (table route). Data
// reduction pins every stored coefficient into a small sample set before the
// next round. The scaled rank strictly increases, so there are at most n
// rounds.
//
// Finite fields below the documented threshold are rerouted through
// ncrank_small_field: the space is lifted to an extension of the least
// sufficient degree e, solved there, and the witness is pulled back along
// the regular representation (multiplying the degree by e); the shrunk
// subspace over the base is then recovered by the containment branch, which
// cannot escape once the scaled rank is maximal.

namespace ncrank {

struct RunConfig {
  std::string strategy = "greedy";  // "greedy" | "dm" (alias "derksen-makam")
  long long field_threshold = 0;    // 0 = driver_field_threshold(n)
  int iteration_budget = 0;         // 0 = n, the proof bound
  int sample_slack = 0;             // extra sample elements for data reduction
  IncrementPolicy increment{};
  RoundingPolicy rounding{};
  TablePolicy table{};
  bool trace = false;
  std::ostream* trace_out = nullptr;  // used when trace is set; nullptr = stderr
};

struct RunStats {
  int iterations = 0;
  bool rerouted = false;     // finite field below the threshold
  int extension_degree = 1;  // e chosen by the small-field route
  long long input_bits = 0;  // max bit length over the input basis entries
  long long max_bits = 0;    // max bit length over every stored point/subspace
};

// Field-size demand for a full run, covering every pool and sample-set bound
// the loop can request: dichotomy pools at blow-up degree <= n^2 over
// dimensions <= n^3 need (n^2)^2 and 2n^3 + 1 elements, table repairs need
// 2*n*N + 1 <= 2n^3 + 1, rounding pools need 2*N + 1 <= 2n^3 + 1.
inline long long driver_field_threshold(int n) {
  const long long nn = static_cast<long long>(n) * n;
  return std::max(nn * nn, 2 * nn * n + 1);
}

// Soft envelope for the stored-coefficient bit monitor over the rationals.
// Stored entries are either sample-set elements (a few bits) or ratios of
// minors of dimension <= n(n+2), so a generous linear-in-input-bits,
// quadratic-in-n bound holds with a wide margin; breaches are reported by
// the caller, never silently accepted.
inline long long bit_envelope(int n, long long input_bits) {
  return 64 * (input_bits + 16) * static_cast<long long>(n + 2) * (n + 2);
}

namespace detail {

inline std::string normalize_strategy(const std::string& s) {
  if (s == "greedy") return "greedy";
  if (s == "dm" || s == "derksen-makam") return "dm";
  throw argument_error("unknown reduction strategy '" + s + "' (use greedy or dm)");
}

inline void trace_line(const RunConfig& cfg, const std::string& line) {
  if (!cfg.trace) return;
  std::ostream& os = cfg.trace_out ? *cfg.trace_out : std::cerr;
  os << line << '\n';
}

inline long long value_bits(const Value& v) {
  if (const BigRat* q = std::get_if<BigRat>(&v.rep)) {
    using boost::multiprecision::msb;
    const BigInt num = boost::multiprecision::abs(boost::multiprecision::numerator(*q));
    const BigInt den = boost::multiprecision::denominator(*q);
    long long b = 1;
    if (num != 0) b = std::max(b, static_cast<long long>(msb(num)) + 1);
    if (den > 1) b = std::max(b, static_cast<long long>(msb(den)) + 1);
    return b;
  }
  if (const std::uint64_t* w = std::get_if<std::uint64_t>(&v.rep))
    return *w == 0 ? 1 : std::bit_width(*w);
  if (auto p = std::get_if<std::shared_ptr<const ValueVec>>(&v.rep)) {
    long long b = 1;
    for (const Value& c : **p) b = std::max(b, value_bits(c));
    return b;
  }
  const RatFuncRep& rf = v.ratfunc();
  long long b = 1;
  for (const Value& c : rf.num) b = std::max(b, value_bits(c));
  for (const Value& c : rf.den) b = std::max(b, value_bits(c));
  return b;
}

inline void observe_bits(RunStats* st, const Mat& m) {
  if (!st) return;
  for (const Value& v : m.e) st->max_bits = std::max(st->max_bits, value_bits(v));
}

inline void observe_bits(RunStats* st, const BlowupPoint& p) {
  if (!st) return;
  for (const Mat& c : p.coeffs) observe_bits(st, c);
}

inline BlowupPoint unit_point(const MatrixSpace& s, int i) {
  ValueVec c(static_cast<std::size_t>(s.generator_count()), s.F->zero());
  c[static_cast<std::size_t>(i)] = s.F->one();
  return scalar_point(s, c);
}

// For a space whose basis elements all have rank one, the maximal rank at
// degree one already equals the noncommutative rank, so the driver never
// needs a blow-up: after an escape verdict it hunts a certified degree-one
// element of the next rank instead. The pool size follows the usual degree
// count of a rank minor. Failure returns nothing; the caller falls back to
// the generic route, so correctness never rests on this shortcut.
inline std::optional<BlowupPoint> degree_one_raise(const MatrixSpace& s, int target,
                                                   std::uint64_t seed, int budget) {
  const int m = s.generator_count();
  const long long pool = 2LL * std::max(s.rows, s.cols) + 1;
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < budget; ++attempt) {
    ValueVec c;
    c.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
      c.push_back(s.F->element_at(static_cast<long long>(rng() % static_cast<std::uint64_t>(pool))));
    BlowupPoint p = scalar_point(s, c);
    if (detail::rank_at_least(assemble(s, p), target)) return p;
  }
  return std::nullopt;
}

// Re-establish the loop invariant: a point whose assembled rank is an exact
// multiple of its degree. Rounding only ever raises the rank, so the loop is
// finite.
inline int normalize_rank(const MatrixSpace& s, BlowupPoint& A, const RoundingPolicy& rounding) {
  int R = mat_rank(assemble(s, A));
  int guard = s.rows + 2;
  while (R % A.a != 0) {
    if (--guard < 0) throw internal_error("rank rounding failed to reach a degree multiple");
    A = round_rank(s, A, rounding);
    R = mat_rank(assemble(s, A));
  }
  return R;
}

inline Certificate finish(const MatrixSpace& s, Certificate cert, const RunConfig& cfg,
                          RunStats* st) {
  observe_bits(st, cert.point);
  observe_bits(st, cert.subspace);
  const VerifyReport rep = verify_certificate(s, cert);
  if (!rep.ok) {
    std::string msg = "the computed certificate failed self-verification:";
    for (const std::string& f : rep.failures) msg += " " + f + ";";
    throw internal_error(msg);
  }
  trace_line(cfg, "certificate: rank " + std::to_string(cert.rank) + " at degree " +
                      std::to_string(cert.degree) + ", shrink " + std::to_string(cert.shrink) +
                      " (" + cert.bound_policy.kind + ")");
  return cert;
}

}  // namespace detail

inline Certificate ncrank_small_field(const MatrixSpace& s, const RunConfig& cfg,
                                      RunStats* stats);

inline Certificate ncrank(const MatrixSpace& s, const RunConfig& cfg = {},
                          RunStats* stats = nullptr) {
  const std::string strat = detail::normalize_strategy(cfg.strategy);
  if (s.rows != s.cols)
    throw argument_error("noncommutative rank is defined for square matrix spaces");
  if (cfg.field_threshold < 0 || cfg.iteration_budget < 0 || cfg.sample_slack < 0)
    throw argument_error("thresholds and budgets must be nonnegative");
  const int n = s.rows;
  const int m = s.generator_count();

  if (m > 0) {
    Mat coords(s.F, n * n, m);
    for (int i = 0; i < m; ++i)
      for (std::size_t idx = 0; idx < s.basis[static_cast<std::size_t>(i)].e.size(); ++idx)
        coords.e[idx * static_cast<std::size_t>(m) + static_cast<std::size_t>(i)] =
            s.basis[static_cast<std::size_t>(i)].e[idx];
    if (mat_rank(coords) != m) throw argument_error("the generators are linearly dependent");
  }

  if (stats) {
    *stats = RunStats{};
    for (const Mat& b : s.basis) detail::observe_bits(stats, b);
    stats->input_bits = stats->max_bits;
    stats->max_bits = 0;
  }

  if (m == 0) {
    Certificate cert;
    cert.rank = 0;
    cert.degree = 1;
    cert.point.a = cert.point.b = 1;
    cert.subspace = Mat::identity(s.F, n);
    cert.shrink = n;
    cert.bound_policy = BoundPolicy{strat, 1};
    detail::trace_line(cfg, "empty basis: rank 0, every vector shrinks");
    return detail::finish(s, cert, cfg, stats);
  }

  const long long threshold =
      cfg.field_threshold > 0 ? cfg.field_threshold : driver_field_threshold(n);
  if (auto card = s.F->cardinality(); card && *card < threshold) {
    detail::trace_line(cfg, "|" + s.F->name() + "| = " + card->str() + " is below the demand " +
                                std::to_string(threshold) + "; rerouting through an extension");
    Certificate cert = ncrank_small_field(s, cfg, stats);
    if (stats) stats->rerouted = true;
    return cert;
  }

  int init = 0, init_rank = -1;
  for (int i = 0; i < m; ++i) {
    const int rk = mat_rank(s.basis[static_cast<std::size_t>(i)]);
    if (rk > init_rank) {
      init_rank = rk;
      init = i;
    }
  }
  const bool rank_one_basis = init_rank <= 1;

  BlowupPoint A = detail::unit_point(s, init);
  const int budget = cfg.iteration_budget > 0 ? cfg.iteration_budget : n;
  int prev_r = 0;

  for (int iter = 1; iter <= budget; ++iter) {
    const int d = A.a;
    const int R = detail::normalize_rank(s, A, cfg.rounding);
    const int r = R / d;
    if (r <= prev_r)
      throw internal_error("iteration " + std::to_string(iter) +
                           " failed to increase the scaled rank");
    prev_r = r;
    if (stats) stats->iterations = iter;
    detail::observe_bits(stats, A);
    detail::trace_line(cfg, "iteration " + std::to_string(iter) + ": degree " +
                                std::to_string(d) + ", scaled rank " + std::to_string(r));

    if (r == n) {
      // Nothing can shrink once the scaled rank is full; the certificate is immediate.
      detail::trace_line(cfg, "iteration " + std::to_string(iter) + ": full scaled rank");
      Certificate cert;
      cert.rank = R;
      cert.degree = d;
      cert.point = std::move(A);
      cert.subspace = Mat(s.F, n, 0);
      cert.shrink = 0;
      cert.bound_policy = BoundPolicy{strat, 1};
      return detail::finish(s, cert, cfg, stats);
    }

    const IncrementResult verdict = increment_or_certify(s, A, r + 1, cfg.increment);

    if (std::holds_alternative<ShrunkSubspace>(verdict)) {
      const auto& sh = std::get<ShrunkSubspace>(verdict);
      detail::trace_line(cfg, "iteration " + std::to_string(iter) +
                                  ": containment; shrink " + std::to_string(sh.shrink));
      Certificate cert;
      cert.rank = R;
      cert.degree = d;
      cert.point = std::move(A);
      cert.subspace = sh.subspace;
      cert.shrink = sh.shrink;
      cert.bound_policy = BoundPolicy{strat, 1};
      return detail::finish(s, cert, cfg, stats);
    }

    const auto& step = std::get<IncrementStep>(verdict);
    const int rwin = step.window.r;
    if (rwin <= r || rwin < 2)
      throw internal_error("the escape window did not improve the scaled rank");
    detail::trace_line(cfg, "iteration " + std::to_string(iter) + ": escape; window " +
                                std::to_string(rwin) + " at degree " +
                                std::to_string(step.point.a));

    if (rank_one_basis) {
      if (auto p1 = detail::degree_one_raise(s, r + 1, cfg.increment.seed + iter,
                                             cfg.increment.mix_budget)) {
        ValueVec S = default_sample_set(s.F, r + 1 + cfg.sample_slack);
        A = reduce_coefficients(s, std::move(*p1), r + 1, &S);
        detail::observe_bits(stats, A);
        detail::trace_line(cfg, "iteration " + std::to_string(iter) +
                                    ": rank-one basis, staying at degree 1");
        continue;
      }
      detail::trace_line(cfg, "iteration " + std::to_string(iter) +
                                  ": degree-one search failed; generic route");
    }

    // Reduce on the windowed sub-space, where the carried point is full-rank.
    std::vector<Mat> wgens;
    wgens.reserve(static_cast<std::size_t>(m));
    for (const Mat& B : s.basis)
      wgens.push_back(submat(B, step.window.row_blocks, step.window.col_blocks));
    const MatrixSpace win = make_space(s.F, rwin, rwin, std::move(wgens));
    BlowupPoint wp = step.point;
    if (strat == "greedy") {
      while (wp.a > rwin + 1) wp = greedy_reduce(win, wp, cfg.rounding);
    } else {
      while (wp.a >= rwin) wp = dm_reduce(win, wp, cfg.table);
    }
    detail::trace_line(cfg, "iteration " + std::to_string(iter) + ": reduced to degree " +
                                std::to_string(wp.a) + " on the window");

    // Carry the coefficients back and pin them into the sample set.
    BlowupPoint next;
    next.a = next.b = wp.a;
    next.coeffs = std::move(wp.coeffs);
    const int target = rwin * next.a;
    ValueVec S = default_sample_set(s.F, target + cfg.sample_slack);
    A = reduce_coefficients(s, std::move(next), target, &S);
    detail::observe_bits(stats, A);
  }
  throw internal_error("the iteration budget was exhausted before a certificate emerged");
}

inline Certificate ncrank_small_field(const MatrixSpace& s, const RunConfig& cfg = {},
                                      RunStats* stats = nullptr) {
  detail::normalize_strategy(cfg.strategy);
  if (s.rows != s.cols)
    throw argument_error("noncommutative rank is defined for square matrix spaces");
  const auto card = s.F->cardinality();
  if (!card) throw argument_error("the small-field route needs a finite base field");
  const int n = s.rows;

  const long long threshold =
      cfg.field_threshold > 0 ? cfg.field_threshold : driver_field_threshold(n);
  if (*card >= threshold || s.generator_count() == 0) return ncrank(s, cfg, stats);

  int e = 1;
  BigInt size = *card;
  while (size < threshold) {
    size *= *card;
    ++e;
  }
  const auto E = extension_from_modulus(s.F, first_irreducible(s.F, e), "F" + size.str());
  detail::trace_line(cfg, "extension " + E->name() + " of degree " + std::to_string(e) +
                              " over " + s.F->name());

  std::vector<Mat> lifted;
  lifted.reserve(s.basis.size());
  for (const Mat& B : s.basis) {
    Mat L(E, B.rows, B.cols);
    for (std::size_t i = 0; i < B.e.size(); ++i) L.e[i] = E->embed_base(B.e[i]);
    lifted.push_back(std::move(L));
  }
  const MatrixSpace sE = make_space(E, n, n, std::move(lifted));

  const Certificate certE = ncrank(sE, cfg, stats);
  if (stats) stats->extension_degree = e;
  const int r = n - certE.shrink;

  BlowupPoint AF;
  AF.a = AF.b = certE.degree * e;
  AF.coeffs.reserve(certE.point.coeffs.size());
  for (const Mat& T : certE.point.coeffs) AF.coeffs.push_back(regular_rep_mat(E, T));
  if (mat_rank(assemble(s, AF)) != r * AF.a)
    throw internal_error("the regular representation changed the witness rank");

  ShrunkSubspace sh = [&] {
    try {
      return certify_shrunk(s, AF);
    } catch (const precondition_error&) {
      throw internal_error("the base-field containment step disagreed with the extension rank");
    }
  }();

  Certificate cert;
  cert.rank = r * AF.a;
  cert.degree = AF.a;
  cert.point = std::move(AF);
  cert.subspace = std::move(sh.subspace);
  cert.shrink = n - r;
  cert.bound_policy = BoundPolicy{"small-field", e};
  return detail::finish(s, cert, cfg, stats);
}

// ---------------------------------------------------------------------------
// Exhaustive shrink oracle for tiny finite instances: every subspace of F^n,
// enumerated as reduced column echelon bases, is tested directly. The count
// grows like q^(k(n-k)) summed over k, hence the hard size gate.
// ---------------------------------------------------------------------------
inline std::vector<Mat> all_subspaces(const FieldPtr& F, int n) {
  const auto card = F->cardinality();
  if (!card) throw argument_error("subspace enumeration needs a finite field");
  if (*card > 16 || n > 4)
    throw size_error("subspace enumeration is limited to |F| <= 16 and n <= 4");
  const long long q = card->convert_to<long long>();

  std::vector<Mat> out;
  for (int k = 0; k <= n; ++k) {
    std::vector<int> pivots(static_cast<std::size_t>(k));
    // iterate k-subsets of {0..n-1} in lexicographic order
    for (int i = 0; i < k; ++i) pivots[static_cast<std::size_t>(i)] = i;
    while (true) {
      std::vector<std::pair<int, int>> free_pos;
      for (int j = 0; j < k; ++j)
        for (int i = pivots[static_cast<std::size_t>(j)] + 1; i < n; ++i)
          if (std::find(pivots.begin(), pivots.end(), i) == pivots.end())
            free_pos.emplace_back(i, j);
      long long patterns = 1;
      for (std::size_t t = 0; t < free_pos.size(); ++t) patterns *= q;
      for (long long pat = 0; pat < patterns; ++pat) {
        Mat V(F, n, k);
        for (int j = 0; j < k; ++j) V.at(pivots[static_cast<std::size_t>(j)], j) = F->one();
        long long rest = pat;
        for (const auto& [i, j] : free_pos) {
          V.at(i, j) = F->element_at(rest % q);
          rest /= q;
        }
        out.push_back(std::move(V));
      }
      if (k == 0) break;
      int t = k - 1;
      while (t >= 0 && pivots[static_cast<std::size_t>(t)] == n - k + t) --t;
      if (t < 0) break;
      ++pivots[static_cast<std::size_t>(t)];
      for (int u = t + 1; u < k; ++u)
        pivots[static_cast<std::size_t>(u)] = pivots[static_cast<std::size_t>(u - 1)] + 1;
    }
  }
  return out;
}

struct ShrinkOracle {
  int shrink = 0;
  Mat subspace;
};

inline ShrinkOracle exhaustive_max_shrink(const MatrixSpace& s) {
  if (s.rows != s.cols) throw argument_error("the shrink oracle needs a square matrix space");
  ShrinkOracle best{0, Mat(s.F, s.cols, 0)};
  for (Mat& V : all_subspaces(s.F, s.cols)) {
    const int sv = shrink_value(s, V);
    if (sv > best.shrink) best = ShrinkOracle{sv, std::move(V)};
  }
  return best;
}

}  // namespace ncrank