#include "slspec/cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <thread>
#include <variant>

#include "slspec/coefficients.hpp"
#include "slspec/error.hpp"
#include "slspec/io.hpp"
#include "slspec/qtree.hpp"
#include "slspec/subordinacy.hpp"
#include "slspec/weidmann.hpp"
#include "slspec/weyl.hpp"

namespace slspec::cli {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kCommands = {"mfun",      "scan",      "weidmann",
                                            "tree-bands", "tree-scan", "tree-decompose"};

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> log = [] {
    auto l = spdlog::stderr_color_mt("slspec");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("SLSPEC_LOG")) l->set_level(spdlog::level::from_str(env));
    return l;
  }();
  return log;
}

bool needs_operator(const std::string& cmd) {
  return cmd == "mfun" || cmd == "scan" || cmd == "weidmann";
}

bool needs_tree(const std::string& cmd) { return cmd == "tree-scan" || cmd == "tree-decompose"; }

bool needs_grid(const std::string& cmd) {
  return cmd == "mfun" || cmd == "scan" || cmd == "weidmann" || cmd == "tree-scan";
}

json load_source(const json& inline_json, const std::string& path) {
  if (!inline_json.is_null()) return inline_json;
  if (!path.empty() && path.front() == '{') {
    try {
      return json::parse(path);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::ParseError, std::string("inline JSON: ") + e.what());
    }
  }
  return io::read_json_file(path);
}

CoefficientSet<double> load_operator(const RunConfig& cfg) {
  return io::coefficients_from_json(load_source(cfg.operator_json, cfg.operator_path));
}

bool has_tree_source(const RunConfig& cfg) {
  return !cfg.tree_json.is_null() || !cfg.tree_path.empty();
}

json tree_source(const RunConfig& cfg) {
  if (has_tree_source(cfg)) return load_source(cfg.tree_json, cfg.tree_path);
  json h{{"b", cfg.b.value_or(0)}, {"c", cfg.c.value_or(0.0)}};
  return {{"homogeneous", h}};
}

/// (b, c) of a homogeneous tree given by flags or by a tree document.
std::pair<long long, double> homogeneous_params(const RunConfig& cfg) {
  if (cfg.b && cfg.c) return {*cfg.b, *cfg.c};
  const json t = tree_source(cfg);
  if (!t.contains("homogeneous")) {
    throw Error(ErrorCode::InvalidTree, "tree-bands needs a homogeneous tree");
  }
  return {t["homogeneous"].value("b", 0LL), t["homogeneous"].value("c", 0.0)};
}

// ---------------------------------------------------------------- output

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  /// One JSON object per row, in the same order.
  std::vector<ojson> json_rows;
  ojson summary;
};

std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return fmt::format("{:.16e}", *d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

std::string render_csv(const Table& t) {
  std::string s;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) s += ',';
    s += t.columns[i];
  }
  s += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ',';
      s += format_cell(row[i]);
    }
    s += '\n';
  }
  return s;
}

std::string render_json(const Table& t, const std::string& command) {
  ojson doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = command;
  doc["columns"] = t.columns;
  doc["rows"] = t.json_rows;
  if (!t.summary.is_null()) doc["summary"] = t.summary;
  return doc.dump(2) + "\n";
}

/// Row object built from the cells, with NaN as null.
ojson flat_row(const std::vector<std::string>& cols, const std::vector<Cell>& cells) {
  ojson o;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    std::visit(
        [&](const auto& v) {
          using V = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<V, double>) {
            if (std::isfinite(v)) o[cols[i]] = v;
            else o[cols[i]] = nullptr;
          } else {
            o[cols[i]] = v;
          }
        },
        cells[i]);
  }
  return o;
}

// ---------------------------------------------------------------- workers

struct Outcome {
  std::vector<Cell> cells;
  ojson json;
  int code = kOk;
};

/// Evaluates `work` on every index with a pool of `threads` workers; the
/// results keep input order. Failures become marked rows.
std::vector<Outcome> parallel_map(std::size_t n, int threads,
                                  const std::function<Outcome(std::size_t)>& work,
                                  const std::function<Outcome(std::size_t, const Error&)>& failed) {
  std::vector<Outcome> out(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = work(i);
      } catch (const Error& e) {
        logger()->error("point {}: {} ({})", i, e.what(), to_string(e.code()));
        out[i] = failed(i, e);
        out[i].code = e.is_numerical() ? kNumerical : kValidation;
      } catch (const std::exception& e) {
        logger()->error("point {}: {}", i, e.what());
        out[i] = failed(i, Error(ErrorCode::ToleranceNotMet, e.what()));
        out[i].code = kNumerical;
      }
    }
  };
  unsigned count = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
  count = std::max(1u, std::min<unsigned>(count, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

int collect(Table& table, std::vector<Outcome>& outcomes) {
  int code = kOk;
  for (auto& o : outcomes) {
    code = std::max(code, o.code);
    if (o.json.is_null()) o.json = flat_row(table.columns, o.cells);
    table.rows.push_back(std::move(o.cells));
    table.json_rows.push_back(std::move(o.json));
  }
  return code;
}

/// The leading cells, NaN for the rest, and the error code in the status
/// column.
Outcome error_row(const std::vector<std::string>& cols, std::vector<Cell> leading, const Error& e) {
  Outcome o;
  o.cells = std::move(leading);
  while (o.cells.size() + 1 < cols.size()) o.cells.emplace_back(std::nan(""));
  o.cells.emplace_back(std::string("error:") + to_string(e.code()));
  return o;
}

template <typename Scalar>
ClassifyPolicy<Scalar> classify_policy(const PolicyConfig& p) {
  ClassifyPolicy<Scalar> c;
  c.delta = p.delta;
  c.delta_sub = p.delta_sub;
  c.tol = p.tol;
  c.m_rel_tol = p.m_rel_tol;
  c.x_max = p.xmax;
  return c;
}

template <typename Scalar>
ojson evidence(const SubordinacyVerdict<Scalar>& v) {
  ojson ratios = ojson::array(), ms = ojson::array();
  auto num = [](Scalar x) -> ojson {
    if (std::isfinite(x)) return static_cast<double>(x);
    return nullptr;
  };
  for (const auto& r : v.ratio_trace) {
    ratios.push_back({{"x", num(r.x)}, {"s_over_c", num(r.s_over_c)},
                      {"candidate_ratio", num(r.candidate_ratio)}});
  }
  for (const auto& m : v.m_trace) {
    ms.push_back({{"x", num(m.x)},
                  {"eps", num(m.eps)},
                  {"m", {{"re", num(m.m.real())}, {"im", num(m.m.imag())}}},
                  {"radius", num(m.radius)},
                  {"jl", num(m.jl)},
                  {"valid", m.valid}});
  }
  return {{"ratio_trace", ratios},
          {"m_trace", ms},
          {"candidate", {{"u", num(v.candidate_u)}, {"pu", num(v.candidate_pu)}}}};
}

// ---------------------------------------------------------------- commands

int cmd_mfun(const RunConfig& cfg, Table& table) {
  const auto coeffs = load_operator(cfg);
  const auto lambdas = cfg.grid.values();
  const auto& p = cfg.policy;
  table.columns = {"schema_version", "re_z", "im_z", "re_m", "im_m", "X", "radius", "bc_alpha",
                   "converged", "status"};
  auto outcomes = parallel_map(
      lambdas.size(), cfg.threads,
      [&](std::size_t i) {
        const std::complex<double> z(lambdas[i], p.im);
        MFunctionEstimate<double> est;
        if (p.X) {
          est = m_function(coeffs, z, *p.X, p.tol, p.alpha);
        } else {
          const double cap = coeffs.truncation_cap(p.xmax);
          est = m_function_converged(coeffs, z, std::min(coeffs.a() + 32, cap), cap, p.m_rel_tol,
                                     p.tol, p.alpha);
        }
        Outcome o;
        o.cells = {Cell(static_cast<long long>(kSchemaVersion)), z.real(), z.imag(), est.m.real(),
                   est.m.imag(), est.X, est.radius, est.bc_alpha,
                   Cell(static_cast<long long>(est.converged)), Cell(std::string("ok"))};
        o.json = {{"z", {{"re", z.real()}, {"im", z.imag()}}},
                  {"m", {{"re", est.m.real()}, {"im", est.m.imag()}}},
                  {"X", est.X},
                  {"radius", est.radius},
                  {"bc_alpha", est.bc_alpha},
                  {"converged", est.converged},
                  {"status", "ok"}};
        return o;
      },
      [&](std::size_t i, const Error& e) {
        return error_row(table.columns,
                         {Cell(static_cast<long long>(kSchemaVersion)), lambdas[i], p.im}, e);
      });
  return collect(table, outcomes);
}

int cmd_scan(const RunConfig& cfg, Table& table) {
  const auto coeffs = load_operator(cfg);
  const auto lambdas = cfg.grid.values();
  const auto policy = classify_policy<double>(cfg.policy);
  const double growth_x = std::min(cfg.policy.growth_x, coeffs.b());
  table.columns = {"schema_version", "lambda", "verdict", "im_m_extrapolated", "jl_min", "jl_max",
                   "c3_slope", "status"};
  auto outcomes = parallel_map(
      lambdas.size(), cfg.threads,
      [&](std::size_t i) {
        logger()->info("scan lambda={}", lambdas[i]);
        const auto v = classify_lambda(coeffs, lambdas[i], policy);
        const auto g = growth_checks(coeffs, lambdas[i], growth_x, cfg.policy.tol);
        Outcome o;
        o.cells = {Cell(static_cast<long long>(kSchemaVersion)), lambdas[i],
                   Cell(std::string(to_string(v.kind))), v.im_m_extrapolated, v.jl_min, v.jl_max,
                   g.linear_growth_c3, Cell(std::string("ok"))};
        o.json = flat_row(table.columns, o.cells);
        o.json["evidence"] = evidence(v);
        return o;
      },
      [&](std::size_t i, const Error& e) {
        return error_row(table.columns, {Cell(static_cast<long long>(kSchemaVersion)), lambdas[i],
                                         Cell(std::string("Error"))},
                         e);
      });
  return collect(table, outcomes);
}

int cmd_weidmann(const RunConfig& cfg, Table& table) {
  const auto coeffs = load_operator(cfg);
  const auto lambdas = cfg.grid.values();
  WeidmannPolicy<double> policy;
  policy.classify = classify_policy<double>(cfg.policy);
  const auto split = QSplit<double>::integrable(coeffs);
  const double growth_x = std::min(cfg.policy.growth_x, coeffs.b());
  WeidmannReport<double> rep = weidmann_hypotheses(coeffs, split, policy);
  rep.entries.resize(lambdas.size());
  table.columns = {"schema_version", "lambda", "verdict", "im_m_extrapolated", "jl_min", "jl_max",
                   "c3_slope", "h_tail_variation", "status"};
  std::vector<bool> ok(lambdas.size(), false);
  auto outcomes = parallel_map(
      lambdas.size(), cfg.threads,
      [&](std::size_t i) {
        auto e = weidmann_entry(coeffs, split, lambdas[i], policy);
        const auto g = growth_checks(coeffs, lambdas[i], growth_x, cfg.policy.tol);
        Outcome o;
        o.cells = {Cell(static_cast<long long>(kSchemaVersion)), lambdas[i],
                   Cell(std::string(to_string(e.verdict.kind))), e.verdict.im_m_extrapolated,
                   e.verdict.jl_min, e.verdict.jl_max, g.linear_growth_c3, e.h_tail_variation,
                   Cell(std::string("ok"))};
        rep.entries[i] = std::move(e);
        ok[i] = true;
        return o;
      },
      [&](std::size_t i, const Error& e) {
        return error_row(table.columns, {Cell(static_cast<long long>(kSchemaVersion)), lambdas[i],
                                         Cell(std::string("Error"))},
                         e);
      });
  const int code = collect(table, outcomes);
  if (std::all_of(ok.begin(), ok.end(), [](bool b) { return b; })) summarize(rep, policy);
  ojson hyp = ojson::array();
  for (const auto& h : rep.hypotheses) {
    hyp.push_back({{"X", h.X},
                   {"l1_p_defect", h.l1_p_defect},
                   {"l1_r_defect", h.l1_r_defect},
                   {"q1_l1", h.q1_l1},
                   {"q2_prime_l1", h.q2_prime_l1},
                   {"q2_limit_estimate", h.q2_limit_estimate}});
  }
  table.summary = {{"schrodinger_set_passed", rep.schrodinger_set_passed},
                   {"local_set_passed", rep.local_set_passed},
                   {"fraction_in_n", std::isfinite(rep.fraction_in_n) ? ojson(rep.fraction_in_n)
                                                                      : ojson(nullptr)},
                   {"pass", rep.pass},
                   {"hypotheses", hyp}};
  return code;
}

int cmd_tree_bands(const RunConfig& cfg, Table& table) {
  const auto [b, c] = homogeneous_params(cfg);
  const auto lmax = static_cast<std::size_t>(cfg.policy.lmax);
  const auto bs = band_spectrum<double>(static_cast<std::uint64_t>(b), c, lmax + 1);
  table.columns = {"schema_version", "l", "lower_edge", "upper_edge", "gap_to_next",
                   "point_eigenvalue", "theta"};
  for (std::size_t l = 1; l <= lmax; ++l) {
    const auto [lo, hi] = bs.bands[l - 1];
    std::vector<Cell> row = {Cell(static_cast<long long>(kSchemaVersion)),
                             Cell(static_cast<long long>(l)),
                             lo,
                             hi,
                             bs.bands[l].first - hi,
                             bs.point_spectrum[l - 1],
                             bs.theta};
    table.json_rows.push_back(flat_row(table.columns, row));
    table.rows.push_back(std::move(row));
  }
  return kOk;
}

int cmd_tree_scan(const RunConfig& cfg, Table& table) {
  const auto tree = io::tree_from_json(tree_source(cfg));
  std::function<long double(long double)> V;
  if (!cfg.policy.potential.empty()) {
    const Expression e = Expression::parse(cfg.policy.potential);
    V = [e](long double x) { return e(x); };
  }
  const auto op = tree_to_sl(tree, V);
  const auto lambdas = cfg.grid.values();
  TreeScanPolicy<long double> policy;
  policy.classify = classify_policy<long double>(cfg.policy);
  policy.growth_X = cfg.policy.growth_x;
  table.columns = {"schema_version", "lambda",    "verdict",     "im_m_extrapolated", "jl_min",
                   "jl_max",         "c3_slope",  "bounded_u",   "ac_evidence",       "status"};
  auto outcomes = parallel_map(
      lambdas.size(), cfg.threads,
      [&](std::size_t i) {
        logger()->info("tree-scan lambda={}", lambdas[i]);
        const auto e = tree_ac_point(op, static_cast<long double>(lambdas[i]), policy);
        Outcome o;
        o.cells = {Cell(static_cast<long long>(kSchemaVersion)),
                   lambdas[i],
                   Cell(std::string(to_string(e.verdict.kind))),
                   static_cast<double>(e.verdict.im_m_extrapolated),
                   static_cast<double>(e.verdict.jl_min),
                   static_cast<double>(e.verdict.jl_max),
                   static_cast<double>(e.growth.linear_growth_c3),
                   Cell(static_cast<long long>(e.growth.bounded_u)),
                   Cell(static_cast<long long>(e.ac_evidence)),
                   Cell(std::string("ok"))};
        o.json = flat_row(table.columns, o.cells);
        o.json["evidence"] = evidence(e.verdict);
        return o;
      },
      [&](std::size_t i, const Error& e) {
        return error_row(table.columns, {Cell(static_cast<long long>(kSchemaVersion)), lambdas[i],
                                         Cell(std::string("Error"))},
                         e);
      });
  return collect(table, outcomes);
}

int cmd_tree_decompose(const RunConfig& cfg, Table& table) {
  const auto tree = io::tree_from_json(tree_source(cfg));
  const auto rows = decomposition_multiplicities(tree, static_cast<std::size_t>(cfg.policy.kmax));
  table.columns = {"schema_version", "k", "t_k", "multiplicity"};
  for (const auto& m : rows) {
    table.rows.push_back({Cell(static_cast<long long>(kSchemaVersion)),
                          Cell(static_cast<long long>(m.k)), m.t_k,
                          Cell(std::to_string(m.multiplicity))});
    table.json_rows.push_back(
        {{"schema_version", kSchemaVersion}, {"k", m.k}, {"t_k", m.t_k}, {"multiplicity", m.multiplicity}});
  }
  return kOk;
}

void diag(std::vector<Diagnostic>& out, std::string path, std::string msg) {
  out.push_back({std::move(path), std::move(msg)});
}

}  // namespace

std::vector<double> GridSpec::values() const {
  if (!points.empty()) return points;
  std::vector<double> v;
  if (count == 1) return {lo};
  for (int k = 0; k < count; ++k) {
    const double t = double(k) / double(count - 1);
    if (spacing == "geometric") v.push_back(lo * std::pow(hi / lo, t));
    else v.push_back(lo + (hi - lo) * t);
  }
  v.back() = hi;
  return v;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  RunConfig cfg;
  try {
    cfg.command = j.value("command", std::string());
    if (j.contains("operator")) {
      if (j["operator"].is_string()) cfg.operator_path = j["operator"].get<std::string>();
      else cfg.operator_json = j["operator"];
    }
    if (j.contains("tree")) {
      if (j["tree"].is_string()) cfg.tree_path = j["tree"].get<std::string>();
      else cfg.tree_json = j["tree"];
    }
    if (j.contains("b")) cfg.b = j["b"].get<long long>();
    if (j.contains("c")) cfg.c = j["c"].get<double>();
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      cfg.grid.specified = true;
      if (g.contains("points")) cfg.grid.points = g["points"].get<std::vector<double>>();
      cfg.grid.lo = g.value("lo", 0.0);
      cfg.grid.hi = g.value("hi", cfg.grid.lo);
      cfg.grid.count = g.value("count", 1);
      cfg.grid.spacing = g.value("spacing", std::string("linear"));
    }
    if (j.contains("policy")) {
      const auto& p = j["policy"];
      auto& pc = cfg.policy;
      pc.tol = p.value("tol", pc.tol);
      pc.xmax = p.value("xmax", pc.xmax);
      pc.delta = p.value("delta", pc.delta);
      pc.delta_sub = p.value("delta_sub", pc.delta_sub);
      pc.m_rel_tol = p.value("m_rel_tol", pc.m_rel_tol);
      pc.growth_x = p.value("growth_x", pc.growth_x);
      pc.im = p.value("im", pc.im);
      pc.alpha = p.value("alpha", pc.alpha);
      if (p.contains("X")) pc.X = p["X"].get<double>();
      pc.lmax = p.value("lmax", pc.lmax);
      pc.kmax = p.value("kmax", pc.kmax);
      pc.potential = p.value("potential", pc.potential);
    }
    if (j.contains("output")) {
      const auto& o = j["output"];
      if (o.is_string()) {
        cfg.output = o.get<std::string>();
      } else {
        cfg.output = o.value("path", std::string());
        cfg.format = o.value("format", cfg.format);
      }
    }
    cfg.threads = j.value("threads", 0);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  return cfg;
}

std::vector<Diagnostic> validate(const RunConfig& cfg) {
  std::vector<Diagnostic> out;
  if (std::find(kCommands.begin(), kCommands.end(), cfg.command) == kCommands.end()) {
    diag(out, "/command", "unknown command '" + cfg.command + "'");
    return out;
  }
  const auto& cmd = cfg.command;

  if (needs_operator(cmd)) {
    if (cfg.operator_json.is_null() && cfg.operator_path.empty()) {
      diag(out, "/operator", "an operator is required");
    } else {
      try {
        const auto coeffs = load_operator(cfg);
        if (cmd == "mfun" && cfg.policy.X &&
            (!(*cfg.policy.X > coeffs.a()) || *cfg.policy.X > coeffs.b())) {
          diag(out, "/policy/X", "truncation point must lie in (a, b]");
        }
      } catch (const Error& e) {
        diag(out, "/operator", e.what());
      }
    }
  }

  if (needs_tree(cmd) || cmd == "tree-bands") {
    const bool from_flags = !has_tree_source(cfg);
    if (from_flags && !cfg.b && !cfg.c) {
      diag(out, "/tree", "a tree file or --b and --c are required");
    } else if (from_flags && (!cfg.b || !cfg.c)) {
      diag(out, cfg.b ? "/c" : "/b", "--b and --c must be given together");
    } else {
      try {
        const json t = tree_source(cfg);
        for (const auto& issue : io::tree_issues(t)) {
          const std::string path = from_flags ? issue.path.substr(issue.path.rfind('/'))
                                              : "/tree" + issue.path;
          diag(out, path, issue.message);
        }
        if (cmd == "tree-bands" && !t.contains("homogeneous")) {
          diag(out, "/tree", "band tables need a homogeneous tree");
        }
        if (cmd == "tree-decompose" && out.empty()) {
          const auto tree = io::tree_from_json(t);
          if (cfg.policy.kmax < 0 ||
              static_cast<std::size_t>(cfg.policy.kmax) > tree.truncation_N()) {
            diag(out, "/policy/kmax",
                 "kmax must lie in [0, " + std::to_string(tree.truncation_N()) + "]");
          }
        }
      } catch (const Error& e) {
        diag(out, "/tree", e.what());
      }
    }
    if (!cfg.policy.potential.empty()) {
      try {
        (void)Expression::parse(cfg.policy.potential);
      } catch (const Error& e) {
        diag(out, "/policy/potential", e.what());
      }
    }
  }

  if (needs_grid(cmd)) {
    const auto& g = cfg.grid;
    if (!g.specified) {
      diag(out, "/grid", "a lambda grid is required");
    } else if (g.points.empty()) {
      if (g.count < 1) diag(out, "/grid/count", "count must be >= 1");
      if (g.count > 1 && !(g.lo < g.hi)) diag(out, "/grid", "need lo < hi");
      if (g.spacing != "linear" && g.spacing != "geometric") {
        diag(out, "/grid/spacing", "spacing must be linear or geometric");
      }
      if (g.spacing == "geometric" && !(g.lo > 0)) {
        diag(out, "/grid/lo", "geometric spacing needs lo > 0");
      }
      if (!std::isfinite(g.lo) || !std::isfinite(g.hi)) diag(out, "/grid", "grid bounds must be finite");
    } else {
      for (std::size_t i = 0; i < g.points.size(); ++i) {
        if (!std::isfinite(g.points[i])) {
          diag(out, "/grid/points/" + std::to_string(i), "must be finite");
        }
      }
    }
    if (cmd == "weidmann" && g.specified) {
      const auto v = g.count >= 1 ? g.values() : std::vector<double>{};
      if (std::any_of(v.begin(), v.end(), [](double x) { return !(x > 0); })) {
        diag(out, "/grid", "the Weidmann report covers lambda > 0 only");
      }
    }
  }

  const auto& p = cfg.policy;
  auto positive = [&](double v, const char* path) {
    if (!(v > 0) || !std::isfinite(v)) diag(out, path, "must be positive and finite");
  };
  positive(p.tol, "/policy/tol");
  positive(p.xmax, "/policy/xmax");
  positive(p.delta, "/policy/delta");
  positive(p.delta_sub, "/policy/delta_sub");
  positive(p.m_rel_tol, "/policy/m_rel_tol");
  positive(p.growth_x, "/policy/growth_x");
  if (cmd == "mfun" && (p.im == 0 || !std::isfinite(p.im))) {
    diag(out, "/policy/im", "Im z must be nonzero");
  }
  if (cmd == "tree-bands" && p.lmax < 1) diag(out, "/policy/lmax", "lmax must be >= 1");
  if (cfg.format != "csv" && cfg.format != "json") {
    diag(out, "/output/format", "format must be csv or json");
  }
  if (cfg.threads < 0) diag(out, "/threads", "threads must be >= 0");
  return out;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto diags = validate(cfg);
  if (!diags.empty()) {
    for (const auto& d : diags) err << "error: " << (d.path.empty() ? "/" : d.path) << ": " << d.message << "\n";
    return kValidation;
  }
  Table table;
  int code = kOk;
  try {
    if (cfg.command == "mfun") code = cmd_mfun(cfg, table);
    else if (cfg.command == "scan") code = cmd_scan(cfg, table);
    else if (cfg.command == "weidmann") code = cmd_weidmann(cfg, table);
    else if (cfg.command == "tree-bands") code = cmd_tree_bands(cfg, table);
    else if (cfg.command == "tree-scan") code = cmd_tree_scan(cfg, table);
    else code = cmd_tree_decompose(cfg, table);
  } catch (const Error& e) {
    err << "error: " << e.what() << " (" << to_string(e.code()) << ")\n";
    return e.is_numerical() ? kNumerical : kValidation;
  }

  const std::string text =
      cfg.format == "json" ? render_json(table, cfg.command) : render_csv(table);
  if (cfg.output.empty()) {
    out << text;
    out.flush();
  } else {
    std::ofstream f(cfg.output, std::ios::binary);
    if (!f) {
      err << "error: cannot write " << cfg.output << "\n";
      return kValidation;
    }
    f << text;
  }
  if (code != kOk) err << "error: some grid points failed; their rows are marked in the status column\n";
  return code;
}

namespace {

void add_shared_options(CLI::App* sub, RunConfig& cfg, std::vector<double>& lambda_points) {
  sub->add_option("--operator", cfg.operator_path, "Coefficient set JSON file (or inline JSON)");
  sub->add_option("--tree", cfg.tree_path, "Tree JSON file (or inline JSON)");
  sub->add_option("--b", cfg.b, "Branching number of a homogeneous tree");
  sub->add_option("--c", cfg.c, "Edge length of a homogeneous tree");
  sub->add_option("--lambda", lambda_points, "Explicit lambda values (Re z for mfun)");
  sub->add_option("--lambda-lo", cfg.grid.lo, "Grid lower end");
  sub->add_option("--lambda-hi", cfg.grid.hi, "Grid upper end");
  sub->add_option("--lambda-count", cfg.grid.count, "Number of grid points");
  sub->add_option("--lambda-spacing", cfg.grid.spacing, "linear or geometric");
  sub->add_option("--tol", cfg.policy.tol, "Integration tolerance");
  sub->add_option("--xmax", cfg.policy.xmax, "Truncation limit on an infinite interval");
  sub->add_option("--delta", cfg.policy.delta, "Im m window (delta, 1/delta)");
  sub->add_option("--delta-sub", cfg.policy.delta_sub, "Subordinacy ratio threshold");
  sub->add_option("--m-rel-tol", cfg.policy.m_rel_tol, "Weyl radius target relative to |m|");
  sub->add_option("--growth-x", cfg.policy.growth_x, "Right end of the growth window");
  sub->add_option("--im", cfg.policy.im, "Imaginary part of z (mfun)");
  sub->add_option("--alpha", cfg.policy.alpha, "Boundary angle (mfun)");
  sub->add_option("--X", cfg.policy.X, "Fixed truncation point (mfun)");
  sub->add_option("--lmax", cfg.policy.lmax, "Number of bands (tree-bands)");
  sub->add_option("--kmax", cfg.policy.kmax, "Deepest level (tree-decompose)");
  sub->add_option("--potential", cfg.policy.potential, "Radial potential V(x) (tree-scan)");
  sub->add_option("--threads", cfg.threads, "Worker threads (0: one per core)");
  sub->add_option("--output", cfg.output, "Output file (default: standard output)");
  sub->add_option("--format", cfg.format, "csv or json");
}

}  // namespace

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral diagnostics for Sturm-Liouville operators and radial quantum trees"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::vector<double> lambda_points;
  std::string config_path;

  std::vector<std::pair<CLI::App*, std::string>> subs;
  const std::map<std::string, std::string> about = {
      {"mfun", "Weyl m-function with its disk radius"},
      {"scan", "Classify lambda values (InN or subordinate)"},
      {"weidmann", "Scan plus the asymptotic h monitor and hypothesis checks"},
      {"tree-bands", "Closed-form bands of a homogeneous tree"},
      {"tree-scan", "Classify lambda values on a radial tree"},
      {"tree-decompose", "Multiplicities of the restricted operators"},
      {"bands", "Closed-form bands of a homogeneous tree"},
      {"decompose", "Multiplicities of the restricted operators"}};
  for (const auto& name : kCommands) {
    auto* sub = app.add_subcommand(name, about.at(name));
    add_shared_options(sub, cfg, lambda_points);
    subs.emplace_back(sub, name);
  }
  auto* tree = app.add_subcommand("tree", "Radial tree commands");
  tree->require_subcommand(1);
  for (const char* name : {"bands", "scan", "decompose"}) {
    auto* sub = tree->add_subcommand(name, std::string(name) == "scan" ? about.at("tree-scan") : about.at(name));
    add_shared_options(sub, cfg, lambda_points);
    subs.emplace_back(sub, std::string("tree-") + name);
  }
  auto* run_cmd = app.add_subcommand("run", "Execute a JSON run configuration");
  run_cmd->add_option("--config", config_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  if (run_cmd->parsed()) {
    try {
      cfg = config_from_json(io::read_json_file(config_path));
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kValidation;
    }
    return run(cfg, out, err);
  }

  for (const auto& [sub, name] : subs) {
    if (!sub->parsed()) continue;
    cfg.command = name;
    if (!lambda_points.empty()) cfg.grid.points = lambda_points;
    cfg.grid.specified = !lambda_points.empty() || sub->count("--lambda-lo") > 0 ||
                         sub->count("--lambda-hi") > 0 || sub->count("--lambda-count") > 0;
    if (cfg.grid.specified && lambda_points.empty() && sub->count("--lambda-hi") == 0) {
      cfg.grid.hi = cfg.grid.lo;
    }
  }
  return run(cfg, out, err);
}

}  // namespace slspec::cli
