#pragma once

// HTTP query and upload services over a single in-process store.
//
//   POST /query       JSON QueryRequest          -> {columns, rows}
//   POST /upload      application/n-quads body   -> {inserted, duplicates, graphs}
//   GET  /values?dimension=<name>                -> sorted JSON array
//   GET  /vocabulary                             -> [{curie, iri, kind, label}]
//   GET  /health                                 -> {quads, graphs}
//
// Handlers are plain member functions returning a Response so they can be
// exercised without a socket; mount() wires them into an httplib::Server.

#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "optionkb/query.hpp"
#include "optionkb/rdf.hpp"
#include "optionkb/rwlock.hpp"
#include "optionkb/store.hpp"
#include "optionkb/vocab.hpp"

namespace optionkb::service {

using nlohmann::json;

inline constexpr std::string_view kDefaultAddress = "127.0.0.1:3330";
inline constexpr const char* kAddressEnv = "OPTIONKB_ADDR";

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

inline Response error_response(int status, std::string_view error, std::string_view detail,
                               std::optional<std::size_t> line = std::nullopt,
                               std::optional<std::size_t> column = std::nullopt) {
  json body = {{"error", error}, {"detail", detail}};
  if (line) body["line"] = *line;
  if (column) body["column"] = *column;
  return {status, body.dump()};
}

// Malformed request shape (400), as opposed to a well-formed request whose
// values break query invariants (422, raised as query::QueryError).
class RequestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw RequestError(std::string("missing field '") + key + "'");
  return *it;
}

inline std::int64_t as_int(const json& v, std::string_view what) {
  if (!v.is_number_integer()) throw RequestError(std::string(what) + " must be an integer");
  return v.get<std::int64_t>();
}

inline double as_number(const json& v, std::string_view what) {
  if (!v.is_number()) throw RequestError(std::string(what) + " must be a number");
  return v.get<double>();
}

inline std::string as_string(const json& v, std::string_view what) {
  if (!v.is_string()) throw RequestError(std::string(what) + " must be a string");
  return v.get<std::string>();
}

inline void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw RequestError("unknown field '" + key + "' in " + std::string(where));
  }
}

inline query::Selectors parse_selectors(const json& params) {
  query::Selectors sel;
  auto ints = [&](const char* key) -> std::optional<std::set<std::int64_t>> {
    auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    if (!it->is_array()) throw RequestError(std::string(key) + " must be an array");
    std::set<std::int64_t> out;
    for (const auto& v : *it) out.insert(as_int(v, std::string(key) + " entries"));
    return out;
  };
  if (auto it = params.find("algorithms"); it != params.end()) {
    if (!it->is_array()) throw RequestError("algorithms must be an array");
    std::set<std::string> algs;
    for (const auto& v : *it) algs.insert(as_string(v, "algorithms entries"));
    sel.algorithms = std::move(algs);
  }
  sel.problems = ints("problems");
  sel.instances = ints("instances");
  sel.dimensions = ints("dimensions");
  return sel;
}

inline query::Budget parse_budget(const json& b) {
  if (!b.is_object()) throw RequestError("budget must be an object");
  check_keys(b, {"point", "lo", "hi"}, "budget");
  if (b.contains("point")) {
    if (b.contains("lo") || b.contains("hi")) throw RequestError("budget takes either point or lo/hi");
    return query::PointBudget{as_int(b["point"], "budget.point")};
  }
  return query::RangeBudget{as_int(require(b, "lo"), "budget.lo"), as_int(require(b, "hi"), "budget.hi")};
}

inline query::Slot parse_json_slot(const json& v) {
  return query::parse_slot(as_string(v, "pattern slot"));
}

inline query::BgpQuery parse_bgp(const json& bgp) {
  if (!bgp.is_object()) throw RequestError("bgp must be an object");
  check_keys(bgp, {"patterns", "filters"}, "bgp");
  query::BgpQuery q;
  const auto& patterns = require(bgp, "patterns");
  if (!patterns.is_array()) throw RequestError("bgp.patterns must be an array");
  for (const auto& p : patterns) {
    if (!p.is_array() || p.size() != 4) throw RequestError("each pattern must be a 4-element array [g, s, p, o]");
    q.patterns.push_back({{parse_json_slot(p[0]), parse_json_slot(p[1]), parse_json_slot(p[2]), parse_json_slot(p[3])}});
  }
  if (auto it = bgp.find("filters"); it != bgp.end()) {
    if (!it->is_array()) throw RequestError("bgp.filters must be an array");
    for (const auto& f : *it) {
      if (!f.is_object()) throw RequestError("each filter must be an object");
      check_keys(f, {"var", "op", "value"}, "filter");
      std::string var = as_string(require(f, "var"), "filter.var");
      if (!var.empty() && var.front() == '?') var.erase(0, 1);
      auto op = query::parse_comparator(as_string(require(f, "op"), "filter.op"));
      if (!op) throw RequestError("unknown comparator '" + f["op"].get<std::string>() + "'");
      const auto& value = require(f, "value");
      rdf::Term term;
      if (value.is_number_integer()) {
        term = rdf::Term::integer(value.get<std::int64_t>());
      } else if (value.is_number()) {
        term = rdf::Term::real(value.get<double>());
      } else if (value.is_string()) {
        auto slot = query::parse_slot(value.get<std::string>());
        if (std::holds_alternative<query::Variable>(slot)) throw RequestError("filter value cannot be a variable");
        term = std::get<rdf::Term>(slot);
      } else {
        throw RequestError("filter.value must be a number or a term string");
      }
      q.filters.push_back({std::move(var), *op, std::move(term)});
    }
  }
  return q;
}

}  // namespace detail

class Service {
 public:
  Service() = default;
  explicit Service(store::QuadStore st) : store_(std::move(st)) {}

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Response query(std::string_view body) const {
    json req;
    try {
      req = json::parse(body);
    } catch (const json::parse_error& e) {
      return error_response(400, "malformed-json", e.what(), std::nullopt, e.byte);
    }
    try {
      std::shared_lock lock(mutex_);
      return {200, dispatch(req)};
    } catch (const RequestError& e) {
      return error_response(400, "malformed-request", e.what());
    } catch (const json::exception& e) {
      return error_response(400, "malformed-request", e.what());
    } catch (const query::QueryError& e) {
      return error_response(422, "invalid-query", e.what());
    } catch (const rdf::TermError& e) {
      return error_response(422, "invalid-query", e.what());
    }
  }

  // Parses the whole payload before touching the store; nothing is applied on error.
  Response upload(std::string_view body, std::string_view mode = "merge",
                  std::string_view content_type = "application/n-quads") {
    auto media = content_type.substr(0, content_type.find(';'));
    while (!media.empty() && media.back() == ' ') media.remove_suffix(1);
    if (media != "application/n-quads")
      return error_response(415, "unsupported-media-type", "expected Content-Type application/n-quads");
    if (mode.empty()) mode = "merge";
    if (mode != "merge" && mode != "replace-graphs")
      return error_response(400, "malformed-request", "mode must be 'merge' or 'replace-graphs'");

    std::vector<rdf::Quad> quads;
    try {
      quads = rdf::parse_nquads(body);
    } catch (const rdf::SyntaxError& e) {
      return error_response(400, "syntax-error", e.what(), e.line(), e.column());
    }
    std::set<std::string> graphs;
    for (const auto& q : quads) graphs.insert(q.graph.value());

    store::BulkReport report;
    {
      std::unique_lock lock(mutex_);
      if (mode == "replace-graphs")
        for (const auto& g : graphs) store_.drop_graph(g);
      report = store_.bulk_insert(quads);
    }
    json body_out = {{"inserted", report.inserted},
                     {"duplicates", report.duplicates},
                     {"graphs", std::vector<std::string>(graphs.begin(), graphs.end())}};
    return {200, body_out.dump()};
  }

  Response values(std::string_view dimension) const {
    auto dim = query::parse_value_dimension(dimension);
    if (!dim)
      return error_response(400, "unknown-dimension",
                            "dimension must be one of algorithm, functionId, dimension, instance, study");
    std::shared_lock lock(mutex_);
    auto vals = query::distinct_values(store_, *dim);
    std::string out = "[";
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (i) out += ',';
      query::write_json_cell(vals[i], out);
    }
    out += ']';
    return {200, out};
  }

  Response vocabulary() const {
    json out = json::array();
    for (const auto& t : vocab::vocabulary_terms())
      out.push_back({{"curie", t.curie}, {"iri", t.iri}, {"kind", vocab::to_string(t.kind)}, {"label", t.label}});
    return {200, out.dump()};
  }

  Response health() const {
    std::shared_lock lock(mutex_);
    json out = {{"quads", store_.count()}, {"graphs", store_.graph_count()}};
    return {200, out.dump()};
  }

  void save(const std::filesystem::path& path) const {
    std::shared_lock lock(mutex_);
    store::save_snapshot(store_, path);
  }

  // Runs fn(const QuadStore&) under the reader lock.
  template <typename Fn>
  decltype(auto) read(Fn&& fn) const {
    std::shared_lock lock(mutex_);
    return std::forward<Fn>(fn)(std::as_const(store_));
  }

  void mount(httplib::Server& server) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    auto reply = [](httplib::Response& res, const Response& r) {
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
    server.Post("/query", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, query(req.body));
    });
    server.Post("/upload", [this, reply](const httplib::Request& req, httplib::Response& res) {
      auto mode = req.has_param("mode") ? req.get_param_value("mode") : std::string("merge");
      reply(res, upload(req.body, mode, req.get_header_value("Content-Type")));
    });
    server.Get("/values", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, values(req.get_param_value("dimension")));
    });
    server.Get("/vocabulary", [this, reply](const httplib::Request&, httplib::Response& res) {
      reply(res, vocabulary());
    });
    server.Get("/health", [this, reply](const httplib::Request&, httplib::Response& res) {
      reply(res, health());
    });
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
  }

 private:
  std::string dispatch(const json& req) const {
    if (!req.is_object()) throw RequestError("request must be a JSON object");
    bool has_template = req.contains("template");
    bool has_bgp = req.contains("bgp");
    if (has_template == has_bgp) throw RequestError("request needs exactly one of 'template' or 'bgp'");
    if (has_bgp) {
      detail::check_keys(req, {"bgp"}, "request");
      return query::to_json(query::to_result_table(query::eval_bgp(store_, detail::parse_bgp(req["bgp"]))));
    }
    detail::check_keys(req, {"template", "params"}, "request");
    auto name = detail::as_string(req["template"], "template");
    json params = req.value("params", json::object());
    if (!params.is_object()) throw RequestError("params must be an object");

    if (name == "fixed-budget") {
      detail::check_keys(params, {"algorithms", "problems", "instances", "dimensions", "budget"}, "params");
      query::FixedBudgetQuery q{detail::parse_selectors(params), detail::parse_budget(detail::require(params, "budget"))};
      return query::to_json(query::run_fixed_budget(store_, q));
    }
    if (name == "fixed-target") {
      detail::check_keys(params, {"algorithms", "problems", "instances", "dimensions", "target"}, "params");
      query::FixedTargetQuery q{detail::parse_selectors(params),
                                detail::as_number(detail::require(params, "target"), "target")};
      return query::to_json(query::run_fixed_target(store_, q));
    }
    if (name == "provenance") {
      detail::check_keys(params, {"study", "algorithm"}, "params");
      query::ProvenanceQuery q;
      if (params.contains("study")) q.doi = detail::as_string(params["study"], "study");
      if (params.contains("algorithm")) q.algorithm = detail::as_string(params["algorithm"], "algorithm");
      return query::to_json(query::provenance_table(query::run_provenance(store_, q)));
    }
    throw RequestError("unknown template '" + name + "'");
  }

  store::QuadStore store_;
  mutable WriterPreferringMutex mutex_;
};

// Splits "host:port"; the port defaults to 3330.
inline std::pair<std::string, int> parse_address(std::string_view addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string_view::npos) return {std::string(addr), 3330};
  auto port = rdf::parse_int64(addr.substr(colon + 1));
  if (!port || *port < 0 || *port > 65535) throw std::invalid_argument("invalid port in '" + std::string(addr) + "'");
  return {std::string(addr.substr(0, colon)), static_cast<int>(*port)};
}

}  // namespace optionkb::service
