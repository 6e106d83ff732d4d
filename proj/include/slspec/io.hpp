#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "slspec/coefficients.hpp"
#include "slspec/error.hpp"
#include "slspec/qtree.hpp"

namespace slspec::io {

using nlohmann::json;

/// Reads a JSON document, reporting a missing file or malformed text as
/// ParseError.
inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

/// A number, or the strings "inf" / "-inf".
inline double number_or_inf(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw Error(ErrorCode::ParseError, what + " must be a number or \"inf\"");
}

inline json number_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return v;
}

/// {"a": 0, "b": "inf", "segments": [{"lo", "hi", "p", "q", "r"} or
///  {"lo", "hi", "expr_p", "expr_q", "expr_r"}]}
inline CoefficientSet<double> coefficients_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "operator must be a JSON object");
  if (!j.contains("a") || !j.contains("b") || !j.contains("segments")) {
    throw Error(ErrorCode::ParseError, "operator needs \"a\", \"b\" and \"segments\"");
  }
  const double a = number_or_inf(j.at("a"), "a");
  const double b = number_or_inf(j.at("b"), "b");
  if (!j.at("segments").is_array()) throw Error(ErrorCode::ParseError, "segments must be an array");
  std::vector<Segment<double>> segs;
  for (const auto& s : j.at("segments")) {
    if (!s.contains("lo") || !s.contains("hi")) {
      throw Error(ErrorCode::ParseError, "segment needs \"lo\" and \"hi\"");
    }
    const double lo = number_or_inf(s.at("lo"), "lo");
    const double hi = number_or_inf(s.at("hi"), "hi");
    if (s.contains("expr_p") || s.contains("expr_q") || s.contains("expr_r")) {
      auto get = [&](const char* key) -> std::string {
        if (!s.contains(key) || !s.at(key).is_string()) {
          throw Error(ErrorCode::ParseError, std::string("segment needs string \"") + key + "\"");
        }
        return s.at(key).get<std::string>();
      };
      segs.push_back({lo, hi, CallablePQR<double>::from_expressions(get("expr_p"), get("expr_q"),
                                                                    get("expr_r"))});
    } else {
      auto get = [&](const char* key) {
        if (!s.contains(key) || !s.at(key).is_number()) {
          throw Error(ErrorCode::ParseError, std::string("segment needs number \"") + key + "\"");
        }
        return s.at(key).get<double>();
      };
      segs.push_back({lo, hi, ConstantPQR<double>{get("p"), get("q"), get("r")}});
    }
  }
  return CoefficientSet<double>(a, b, std::move(segs));
}

/// Fails with InvalidArgument for callable segments built without source.
inline json coefficients_to_json(const CoefficientSet<double>& c) {
  json segs = json::array();
  for (const auto& s : c.segments()) {
    json js{{"lo", number_to_json(s.lo)}, {"hi", number_to_json(s.hi)}};
    if (s.is_constant()) {
      js["p"] = s.constant().p;
      js["q"] = s.constant().q;
      js["r"] = s.constant().r;
    } else {
      const auto& f = s.callable();
      if (!f.serializable()) {
        throw Error(ErrorCode::InvalidArgument, "callable segment has no expression source");
      }
      js["expr_p"] = f.expr_p;
      js["expr_q"] = f.expr_q;
      js["expr_r"] = f.expr_r;
    }
    segs.push_back(js);
  }
  return {{"a", number_to_json(c.a())}, {"b", number_to_json(c.b())}, {"segments", segs}};
}

/// Problems with a tree description, each with a JSON-pointer path relative
/// to the tree object. Empty when the tree is valid and regular.
struct TreeIssue {
  std::string path;
  std::string message;
};

inline std::vector<TreeIssue> tree_issues(const json& j) {
  std::vector<TreeIssue> out;
  if (!j.is_object()) return {{"", "tree must be a JSON object"}};
  if (j.contains("homogeneous")) {
    const auto& h = j.at("homogeneous");
    if (!h.is_object()) return {{"/homogeneous", "must be an object"}};
    if (!h.contains("b") || !h.at("b").is_number_integer() || h.at("b").get<long long>() < 1) {
      out.push_back({"/homogeneous/b", "b must be an integer >= 1"});
    }
    if (!h.contains("c") || !h.at("c").is_number() || !(h.at("c").get<double>() > 0)) {
      out.push_back({"/homogeneous/c", "c must be a positive number"});
    }
    if (h.contains("levels") &&
        (!h.at("levels").is_number_integer() || h.at("levels").get<long long>() < 1)) {
      out.push_back({"/homogeneous/levels", "levels must be a positive integer"});
    }
    return out;
  }
  if (!j.contains("t") || !j.at("t").is_array()) out.push_back({"/t", "t must be an array"});
  if (!j.contains("b") || !j.at("b").is_array()) out.push_back({"/b", "b must be an array"});
  if (!out.empty()) return out;
  const auto& t = j.at("t");
  const auto& b = j.at("b");
  if (t.size() != b.size()) out.push_back({"/b", "t and b must have equal length"});
  if (t.size() < 2) out.push_back({"/t", "a tree needs at least two levels"});
  for (std::size_t n = 0; n < t.size(); ++n) {
    const std::string p = "/t/" + std::to_string(n);
    if (!t[n].is_number()) {
      out.push_back({p, "must be a number"});
      continue;
    }
    if (n == 0 && t[n].get<double>() != 0) out.push_back({p, "t_0 must be 0"});
    if (n > 0 && t[n - 1].is_number() && !(t[n].get<double>() > t[n - 1].get<double>())) {
      out.push_back({p, "t must be strictly increasing"});
    }
  }
  for (std::size_t n = 0; n < b.size(); ++n) {
    const std::string p = "/b/" + std::to_string(n);
    if (!b[n].is_number_integer()) {
      out.push_back({p, "must be an integer"});
      continue;
    }
    const long long v = b[n].get<long long>();
    if (n == 0 && v != 1) out.push_back({p, "the root has b_0 = 1"});
    if (n > 0 && v < 2) out.push_back({p, "regularity requires b_k >= 2 for k >= 1"});
  }
  return out;
}

/// {"t": [...], "b": [...]} or {"homogeneous": {"b": 2, "c": 1.0, "levels": 64}}.
inline TreeSpec<long double> tree_from_json(const json& j) {
  const auto issues = tree_issues(j);
  if (!issues.empty()) {
    throw Error(ErrorCode::InvalidTree, issues.front().path + ": " + issues.front().message);
  }
  if (j.contains("homogeneous")) {
    const auto& h = j.at("homogeneous");
    const std::size_t levels = h.contains("levels") ? h.at("levels").get<std::size_t>() : 0;
    return TreeSpec<long double>::homogeneous(h.at("b").get<std::uint64_t>(),
                                              h.at("c").get<double>(), levels);
  }
  std::vector<long double> t;
  for (const auto& v : j.at("t")) t.push_back(v.get<double>());
  return TreeSpec<long double>(std::move(t), j.at("b").get<std::vector<std::uint64_t>>());
}

inline json tree_to_json(const TreeSpec<long double>& tree) {
  std::vector<double> t(tree.t().begin(), tree.t().end());
  return {{"t", t}, {"b", tree.b()}};
}

}  // namespace slspec::io
