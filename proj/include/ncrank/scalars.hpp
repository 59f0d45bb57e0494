#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "ncrank/errors.hpp"

namespace ncrank {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

class Field;
using FieldPtr = std::shared_ptr<const Field>;

struct Value;
using ValueVec = std::vector<Value>;
struct RatFuncRep;

// A field element. The active alternative is dictated by the owning Field:
//   BigRat                      rationals (and nothing else)
//   uint64_t                    prime fields
//   shared_ptr<const ValueVec>  extension fields (coordinates over the base)
//   shared_ptr<const RatFuncRep> rational function fields
// Values are immutable once built, so copies are O(1) for the pointer kinds.
struct Value {
  using Rep = std::variant<BigRat, std::uint64_t, std::shared_ptr<const ValueVec>,
                           std::shared_ptr<const RatFuncRep>>;
  Rep rep;

  Value() : rep(std::uint64_t{0}) {}

  static Value of_rat(BigRat q) {
    Value v;
    v.rep = std::move(q);
    return v;
  }
  static Value of_word(std::uint64_t w) {
    Value v;
    v.rep = w;
    return v;
  }
  static Value of_vec(ValueVec coords) {
    Value v;
    v.rep = std::make_shared<const ValueVec>(std::move(coords));
    return v;
  }
  static Value of_ratfunc(RatFuncRep r);

  const BigRat& rat() const {
    const BigRat* p = std::get_if<BigRat>(&rep);
    if (!p) throw internal_error("value is not a rational");
    return *p;
  }
  std::uint64_t word() const {
    const std::uint64_t* p = std::get_if<std::uint64_t>(&rep);
    if (!p) throw internal_error("value is not a machine word");
    return *p;
  }
  const ValueVec& vec() const {
    auto p = std::get_if<std::shared_ptr<const ValueVec>>(&rep);
    if (!p) throw internal_error("value is not a coordinate vector");
    return **p;
  }
  const RatFuncRep& ratfunc() const;
};

// A rational function num/den. Both are dense polynomials over the base
// field, constant term first, no trailing zero coefficients (the zero
// polynomial is the empty vector). Canonical form: den is monic and
// gcd(num, den) = 1, so representations can be compared coordinatewise.
struct RatFuncRep {
  ValueVec num;
  ValueVec den;
};

inline Value Value::of_ratfunc(RatFuncRep r) {
  Value v;
  v.rep = std::make_shared<const RatFuncRep>(std::move(r));
  return v;
}

inline const RatFuncRep& Value::ratfunc() const {
  auto p = std::get_if<std::shared_ptr<const RatFuncRep>>(&rep);
  if (!p) throw internal_error("value is not a rational function");
  return **p;
}

// Bit-size bookkeeping for rational arithmetic. Rationals updates this
// thread-local accumulator on every arithmetic result; the driver snapshots
// it to report coefficient growth against a documented polynomial envelope.
struct BitStats {
  long long max_num_bits = 0;
  long long max_den_bits = 0;
  unsigned long long rat_ops = 0;

  void clear() { *this = BitStats{}; }
};

inline BitStats& bit_stats() {
  thread_local BitStats stats;
  return stats;
}

inline long long bigint_bits(const BigInt& x) {
  if (x == 0) return 0;
  return static_cast<long long>(boost::multiprecision::msb(boost::multiprecision::abs(x))) + 1;
}

inline void note_rat(const BigRat& q) {
  BitStats& s = bit_stats();
  ++s.rat_ops;
  const long long nb = bigint_bits(boost::multiprecision::numerator(q));
  const long long db = bigint_bits(boost::multiprecision::denominator(q));
  if (nb > s.max_num_bits) s.max_num_bits = nb;
  if (db > s.max_den_bits) s.max_den_bits = db;
}

}  // namespace ncrank
