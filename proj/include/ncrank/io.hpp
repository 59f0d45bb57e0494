#pragma once

// JSON file formats for matrix spaces, blow-up points, and certificates.
//
// Every document embeds a field block so files are self-describing:
//
//   {"kind": "rational"}
//   {"kind": "prime", "p": 7}
//   {"kind": "ratfunc", "variable": "Z", "base": {...}}
//   {"kind": "extension", "degree": 2, "label": "F9", "base": {...},
//    "table": [[...], ...],            // deg^2 products of basis vectors
//    "zeta": {"coords": [...], "order": "8"}}   // optional distinguished root
//
// Scalars are written as the owning field's canonical strings ("-3/7",
// residues, "(c0,...,ck)" tower coordinates); structure-constant tables over
// a prime base are written as plain integer arrays. Readers accept integers
// wherever a scalar is expected. Writing and re-reading any document
// reproduces every scalar bit for bit, since the canonical string forms are
// exact inverses of the field parsers.
//
// Malformed input raises input_error naming the offending document path
// (e.g. "basis[2][0][1]"); syntax errors carry the parser's line/column.

#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncrank/errors.hpp"
#include "ncrank/fields.hpp"
#include "ncrank/matrix.hpp"
#include "ncrank/spaces.hpp"

namespace ncrank {

using Json = nlohmann::json;

namespace detail {

inline const Json& json_member(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw input_error(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw input_error(where + ": missing member '" + key + "'");
  return *it;
}

inline int json_int(const Json& j, const char* key, const std::string& where) {
  const Json& v = json_member(j, key, where);
  if (!v.is_number_integer())
    throw input_error(where + "." + key + ": expected an integer");
  return v.get<int>();
}

inline std::string json_string(const Json& j, const char* key, const std::string& where) {
  const Json& v = json_member(j, key, where);
  if (!v.is_string()) throw input_error(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline Value scalar_from_json(const FieldPtr& F, const Json& j, const std::string& where) {
  try {
    if (j.is_string()) return F->parse(j.get<std::string>());
    if (j.is_number_integer()) return F->from_int(BigInt(j.get<long long>()));
  } catch (const input_error& e) {
    throw input_error(where + ": " + e.what());
  }
  throw input_error(where + ": expected a scalar string");
}

inline void expect_format(const Json& j, const char* format, const std::string& where) {
  if (json_string(j, "format", where) != format)
    throw input_error(where + ".format: expected '" + format + "'");
  if (json_int(j, "version", where) != 1)
    throw input_error(where + ".version: only version 1 is understood");
}

}  // namespace detail

inline Json field_to_json(const FieldPtr& F) {
  switch (F->kind()) {
    case Field::Kind::rationals:
      return Json{{"kind", "rational"}};
    case Field::Kind::prime: {
      const auto* p = dynamic_cast<const PrimeField*>(F.get());
      return Json{{"kind", "prime"}, {"p", p->modulus()}};
    }
    case Field::Kind::ratfunc: {
      const auto* r = dynamic_cast<const RatFuncField*>(F.get());
      return Json{{"kind", "ratfunc"},
                  {"variable", r->variable()},
                  {"base", field_to_json(F->base_field())}};
    }
    case Field::Kind::extension: {
      const auto* e = dynamic_cast<const ExtensionField*>(F.get());
      const FieldPtr base = F->base_field();
      const int deg = e->degree_over_base();
      const bool int_table = base->kind() == Field::Kind::prime;
      Json table = Json::array();
      for (int i = 0; i < deg; ++i)
        for (int j = 0; j < deg; ++j) {
          Json row = Json::array();
          for (const Value& v : e->entry(i, j)) {
            if (int_table)
              row.push_back(v.word());
            else
              row.push_back(base->to_string(v));
          }
          table.push_back(std::move(row));
        }
      Json out{{"kind", "extension"},
               {"degree", deg},
               {"label", e->label()},
               {"base", field_to_json(base)},
               {"table", std::move(table)}};
      if (e->has_zeta()) {
        Json coords = Json::array();
        for (const Value& v : e->zeta().vec()) coords.push_back(base->to_string(v));
        out["zeta"] = Json{{"coords", std::move(coords)}, {"order", e->zeta_order().str()}};
      }
      return out;
    }
  }
  throw internal_error("unserializable field kind");
}

inline FieldPtr field_from_json(const Json& j, const std::string& where = "field") {
  const std::string kind = detail::json_string(j, "kind", where);
  if (kind == "rational") return Rationals::get();
  if (kind == "prime") {
    const int p = detail::json_int(j, "p", where);
    if (p < 2) throw input_error(where + ".p: modulus must be at least 2");
    try {
      return PrimeField::get(static_cast<std::uint64_t>(p));
    } catch (const argument_error& e) {
      throw input_error(where + ".p: " + e.what());
    }
  }
  if (kind == "ratfunc") {
    const FieldPtr base = field_from_json(detail::json_member(j, "base", where), where + ".base");
    const std::string var = detail::json_string(j, "variable", where);
    try {
      return std::make_shared<const RatFuncField>(base, var);
    } catch (const argument_error& e) {
      throw input_error(where + ": " + e.what());
    }
  }
  if (kind == "extension") {
    const FieldPtr base = field_from_json(detail::json_member(j, "base", where), where + ".base");
    const int deg = detail::json_int(j, "degree", where);
    if (deg < 1) throw input_error(where + ".degree: must be at least 1");
    const Json& table = detail::json_member(j, "table", where);
    if (!table.is_array() || table.size() != static_cast<std::size_t>(deg) * deg)
      throw input_error(where + ".table: expected " + std::to_string(deg * deg) + " entries");
    std::vector<ValueVec> rows;
    rows.reserve(table.size());
    for (std::size_t k = 0; k < table.size(); ++k) {
      const Json& row = table[k];
      const std::string cell = where + ".table[" + std::to_string(k) + "]";
      if (!row.is_array() || row.size() != static_cast<std::size_t>(deg))
        throw input_error(cell + ": expected " + std::to_string(deg) + " coordinates");
      ValueVec coords;
      coords.reserve(row.size());
      for (std::size_t c = 0; c < row.size(); ++c)
        coords.push_back(
            detail::scalar_from_json(base, row[c], cell + "[" + std::to_string(c) + "]"));
      rows.push_back(std::move(coords));
    }
    std::string label;
    if (const auto it = j.find("label"); it != j.end() && it->is_string())
      label = it->get<std::string>();
    std::optional<std::pair<ValueVec, BigInt>> zeta;
    if (const auto it = j.find("zeta"); it != j.end() && !it->is_null()) {
      const std::string zw = where + ".zeta";
      const Json& coords = detail::json_member(*it, "coords", zw);
      if (!coords.is_array() || coords.size() != static_cast<std::size_t>(deg))
        throw input_error(zw + ".coords: expected " + std::to_string(deg) + " coordinates");
      ValueVec zc;
      for (std::size_t c = 0; c < coords.size(); ++c)
        zc.push_back(
            detail::scalar_from_json(base, coords[c], zw + ".coords[" + std::to_string(c) + "]"));
      const Json& order = detail::json_member(*it, "order", zw);
      BigInt ord;
      if (order.is_string())
        ord = detail::parse_bigint(order.get<std::string>());
      else if (order.is_number_integer())
        ord = order.get<long long>();
      else
        throw input_error(zw + ".order: expected an integer or string");
      zeta = std::make_pair(std::move(zc), std::move(ord));
    }
    try {
      return std::make_shared<const ExtensionField>(base, deg, std::move(rows),
                                                    std::move(label), std::move(zeta));
    } catch (const argument_error& e) {
      throw input_error(where + ".table: " + e.what());
    }
  }
  throw input_error(where + ".kind: unknown field kind '" + kind + "'");
}

inline Json mat_to_json(const Mat& M) {
  Json rows = Json::array();
  for (int i = 0; i < M.rows; ++i) {
    Json row = Json::array();
    for (int j = 0; j < M.cols; ++j) row.push_back(M.F->to_string(M.at(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

// rows/cols: pass -1 to take the dimension from the document itself.
inline Mat mat_from_json(const FieldPtr& F, const Json& j, int rows, int cols,
                         const std::string& where) {
  if (!j.is_array()) throw input_error(where + ": expected an array of rows");
  if (rows >= 0 && j.size() != static_cast<std::size_t>(rows))
    throw input_error(where + ": expected " + std::to_string(rows) + " rows");
  const int n = static_cast<int>(j.size());
  int k = cols;
  if (k < 0) k = n == 0 ? 0 : static_cast<int>(j[0].size());
  Mat M(F, n, k);
  for (int i = 0; i < n; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    const std::string rw = where + "[" + std::to_string(i) + "]";
    if (!row.is_array() || row.size() != static_cast<std::size_t>(k))
      throw input_error(rw + ": expected " + std::to_string(k) + " entries");
    for (int c = 0; c < k; ++c)
      M.at(i, c) = detail::scalar_from_json(F, row[static_cast<std::size_t>(c)],
                                            rw + "[" + std::to_string(c) + "]");
  }
  return M;
}

inline Json space_to_json(const MatrixSpace& s) {
  Json basis = Json::array();
  for (const Mat& B : s.basis) basis.push_back(mat_to_json(B));
  return Json{{"format", "ncrank-space"}, {"version", 1},    {"field", field_to_json(s.F)},
              {"rows", s.rows},           {"cols", s.cols},  {"basis", std::move(basis)}};
}

inline MatrixSpace space_from_json(const Json& j) {
  detail::expect_format(j, "ncrank-space", "space");
  const FieldPtr F = field_from_json(detail::json_member(j, "field", "space"), "space.field");
  const int rows = detail::json_int(j, "rows", "space");
  const int cols = detail::json_int(j, "cols", "space");
  if (rows < 0 || cols < 0) throw input_error("space: dimensions must be nonnegative");
  const Json& basis = detail::json_member(j, "basis", "space");
  if (!basis.is_array()) throw input_error("space.basis: expected an array of matrices");
  std::vector<Mat> gens;
  gens.reserve(basis.size());
  for (std::size_t g = 0; g < basis.size(); ++g)
    gens.push_back(
        mat_from_json(F, basis[g], rows, cols, "space.basis[" + std::to_string(g) + "]"));
  try {
    return make_space(F, rows, cols, std::move(gens));
  } catch (const argument_error& e) {
    throw input_error(std::string("space: ") + e.what());
  }
}

namespace detail {

inline Json coeffs_to_json(const BlowupPoint& p) {
  Json coeffs = Json::array();
  for (const Mat& c : p.coeffs) coeffs.push_back(mat_to_json(c));
  return coeffs;
}

inline BlowupPoint point_body_from_json(const FieldPtr& F, const Json& j,
                                        const std::string& where) {
  BlowupPoint p;
  p.a = json_int(j, "a", where);
  p.b = json_int(j, "b", where);
  if (p.a < 1 || p.b < 1) throw input_error(where + ": blow-up degrees must be positive");
  const Json& coeffs = json_member(j, "coefficients", where);
  if (!coeffs.is_array()) throw input_error(where + ".coefficients: expected an array");
  for (std::size_t g = 0; g < coeffs.size(); ++g)
    p.coeffs.push_back(mat_from_json(F, coeffs[g], p.a, p.b,
                                     where + ".coefficients[" + std::to_string(g) + "]"));
  return p;
}

// Documents carry their own field block; when the caller already has the
// field (from the space file), the two must describe the same structure.
inline void check_same_field(const FieldPtr& F, const Json& j, const std::string& where) {
  const FieldPtr G = field_from_json(json_member(j, "field", where), where + ".field");
  if (G->signature() != F->signature())
    throw input_error(where + ".field: does not match the space's field");
}

}  // namespace detail

inline Json point_to_json(const FieldPtr& F, const BlowupPoint& p) {
  return Json{{"format", "ncrank-point"}, {"version", 1},
              {"field", field_to_json(F)}, {"a", p.a},
              {"b", p.b},                  {"coefficients", detail::coeffs_to_json(p)}};
}

inline BlowupPoint point_from_json(const FieldPtr& F, const Json& j) {
  detail::expect_format(j, "ncrank-point", "point");
  detail::check_same_field(F, j, "point");
  return detail::point_body_from_json(F, j, "point");
}

inline Json certificate_to_json(const FieldPtr& F, const Certificate& c) {
  return Json{{"format", "ncrank-certificate"},
              {"version", 1},
              {"field", field_to_json(F)},
              {"rank", c.rank},
              {"degree", c.degree},
              {"shrink", c.shrink},
              {"bound", Json{{"kind", c.bound_policy.kind}, {"extension_degree", c.bound_policy.e}}},
              {"point", Json{{"a", c.point.a},
                             {"b", c.point.b},
                             {"coefficients", detail::coeffs_to_json(c.point)}}},
              {"subspace", mat_to_json(c.subspace)}};
}

inline Certificate certificate_from_json(const FieldPtr& F, const Json& j) {
  detail::expect_format(j, "ncrank-certificate", "certificate");
  detail::check_same_field(F, j, "certificate");
  Certificate c;
  c.rank = detail::json_int(j, "rank", "certificate");
  c.degree = detail::json_int(j, "degree", "certificate");
  c.shrink = detail::json_int(j, "shrink", "certificate");
  const Json& bound = detail::json_member(j, "bound", "certificate");
  c.bound_policy.kind = detail::json_string(bound, "kind", "certificate.bound");
  c.bound_policy.e = detail::json_int(bound, "extension_degree", "certificate.bound");
  c.point = detail::point_body_from_json(F, detail::json_member(j, "point", "certificate"),
                                         "certificate.point");
  c.subspace = mat_from_json(F, detail::json_member(j, "subspace", "certificate"), -1, -1,
                             "certificate.subspace");
  return c;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw input_error("'" + path + "': " + e.what());
  }
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot open '" + path + "' for writing");
  out << j.dump(1) << "\n";
  if (!out) throw input_error("writing '" + path + "' failed");
}

inline MatrixSpace read_space_file(const std::string& path) {
  return space_from_json(read_json_file(path));
}
inline void write_space_file(const std::string& path, const MatrixSpace& s) {
  write_json_file(path, space_to_json(s));
}
inline BlowupPoint read_point_file(const FieldPtr& F, const std::string& path) {
  return point_from_json(F, read_json_file(path));
}
inline void write_point_file(const std::string& path, const FieldPtr& F, const BlowupPoint& p) {
  write_json_file(path, point_to_json(F, p));
}
inline Certificate read_certificate_file(const FieldPtr& F, const std::string& path) {
  return certificate_from_json(F, read_json_file(path));
}
inline void write_certificate_file(const std::string& path, const FieldPtr& F,
                                   const Certificate& c) {
  write_json_file(path, certificate_to_json(F, c));
}

}  // namespace ncrank
