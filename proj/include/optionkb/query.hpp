#pragma once

// Query layer over the quad store: best-so-far series reconstruction, the
// fixed-budget / fixed-target / provenance templates, dropdown value lists and
// a conjunctive quad-pattern (BGP) engine with comparison filters.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "optionkb/coco.hpp"
#include "optionkb/rdf.hpp"
#include "optionkb/store.hpp"
#include "optionkb/vocab.hpp"

namespace optionkb::query {

using rdf::Term;
using rdf::TermId;
using store::QuadStore;

class QueryError : public std::runtime_error {
 public:
  enum class Kind { Invalid, NoSuchRun, UnboundFilterVariable };

  QueryError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// ---------------------------------------------------------------------------
// Result tables

using Cell = std::variant<std::monostate, std::string, std::int64_t, double>;

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  bool operator==(const ResultTable&) const = default;
};

inline std::string json_quote(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

inline void write_json_cell(const Cell& c, std::string& out) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) out += "null";
        else if constexpr (std::is_same_v<T, std::string>) out += json_quote(v);
        else if constexpr (std::is_same_v<T, std::int64_t>) out += std::to_string(v);
        else out += rdf::format_double(v);
      },
      c);
}

// Canonical JSON: {"columns":[...],"rows":[[...],...]}, doubles in shortest
// round-trip form, absent cells as null.
inline std::string to_json(const ResultTable& table) {
  std::string out = "{\"columns\":[";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += json_quote(table.columns[i]);
  }
  out += "],\"rows\":[";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (r) out += ',';
    out += '[';
    for (std::size_t i = 0; i < table.rows[r].size(); ++i) {
      if (i) out += ',';
      write_json_cell(table.rows[r][i], out);
    }
    out += ']';
  }
  out += "]}";
  return out;
}

inline void write_csv_field(std::string_view s, std::string& out) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) {
    out += s;
    return;
  }
  out += '"';
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

inline std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return {};
        else if constexpr (std::is_same_v<T, std::string>) return v;
        else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(v);
        else return rdf::format_double(v);
      },
      c);
}

// Header row then one line per row; absent cells are empty fields.
inline std::string to_csv(const ResultTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    write_csv_field(table.columns[i], out);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      write_csv_field(cell_text(row[i]), out);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Best-so-far series

struct SeriesPoint {
  std::int64_t evals = 0;
  double best_delta = 0;
  bool operator==(const SeriesPoint&) const = default;
};

// Right-continuous step function: value(b) is the best_delta of the last point
// with evals <= b, undefined before the first point.
struct BestSoFarSeries {
  std::string run;
  std::vector<SeriesPoint> points;
};

namespace detail {

struct Vocabulary {
  Term rdf_type = Term::iri(vocab::rdf_type_iri());
  Term rdfs_label = Term::iri(vocab::rdfs_label_iri());
  Term performance_run = Term::iri(vocab::option_iri(vocab::term::PerformanceRun));
  Term algorithm_class = Term::iri(vocab::option_iri(vocab::term::OptimizationAlgorithm));
  Term executed_by = Term::iri(vocab::option_iri(vocab::term::executedBy));
  Term on_problem = Term::iri(vocab::option_iri(vocab::term::onProblem));
  Term function_id = Term::iri(vocab::option_iri(vocab::term::functionId));
  Term instance_number = Term::iri(vocab::option_iri(vocab::term::instanceNumber));
  Term problem_dimension = Term::iri(vocab::option_iri(vocab::term::problemDimension));
  Term part_of_study = Term::iri(vocab::option_iri(vocab::term::partOfStudy));
  Term has_event = Term::iri(vocab::option_iri(vocab::term::hasEvent));
  Term evaluations = Term::iri(vocab::option_iri(vocab::term::evaluations));
  Term best_fitness_delta = Term::iri(vocab::option_iri(vocab::term::bestFitnessDelta));
  Term doi = Term::iri(vocab::option_iri(vocab::term::doi));
  Term title = Term::iri(vocab::option_iri(vocab::term::title));
  Term author = Term::iri(vocab::option_iri(vocab::term::author));
  Term year = Term::iri(vocab::option_iri(vocab::term::year));
};

inline const Vocabulary& terms() {
  static const Vocabulary v;
  return v;
}

inline TermId id_of(const QuadStore& st, const Term& t) { return st.dictionary().lookup(t).value_or(0); }

// Distinct object ids of (subject, predicate, *) across all graphs, ascending.
inline std::vector<TermId> objects(const QuadStore& st, TermId subject, TermId predicate) {
  std::set<TermId> out;
  if (!subject || !predicate) return {};
  st.for_each_match({0, subject, predicate, 0}, [&](const store::QuadIds& q) { out.insert(q[store::kObject]); });
  return {out.begin(), out.end()};
}

inline std::vector<TermId> subjects(const QuadStore& st, TermId predicate, TermId object) {
  std::set<TermId> out;
  if (!predicate || !object) return {};
  st.for_each_match({0, 0, predicate, object}, [&](const store::QuadIds& q) { out.insert(q[store::kSubject]); });
  return {out.begin(), out.end()};
}

}  // namespace detail

// Gathers (evaluations, bestFitnessDelta) of a run's events, sorted by evals,
// with a running-minimum repair. Duplicate evals keep the smaller value.
inline BestSoFarSeries load_series(const QuadStore& st, const std::string& run_iri) {
  const auto& v = detail::terms();
  TermId run = detail::id_of(st, Term::iri(run_iri));
  TermId has_event = detail::id_of(st, v.has_event);
  auto events = detail::objects(st, run, has_event);
  if (events.empty()) throw QueryError(QueryError::Kind::NoSuchRun, "no such run <" + run_iri + ">");

  TermId evals_p = detail::id_of(st, v.evaluations);
  TermId best_p = detail::id_of(st, v.best_fitness_delta);
  std::map<std::int64_t, double> by_evals;
  const auto& dict = st.dictionary();
  for (TermId ev : events) {
    auto e_ids = detail::objects(st, ev, evals_p);
    auto b_ids = detail::objects(st, ev, best_p);
    for (TermId e_id : e_ids) {
      auto e = dict.decode(e_id).as_integer();
      if (!e) continue;
      for (TermId b_id : b_ids) {
        auto b = dict.decode(b_id).as_number();
        if (!b) continue;
        auto [it, fresh] = by_evals.emplace(*e, *b);
        if (!fresh) it->second = std::min(it->second, *b);
      }
    }
  }
  if (by_evals.empty()) throw QueryError(QueryError::Kind::NoSuchRun, "run <" + run_iri + "> has no complete events");

  BestSoFarSeries series{run_iri, {}};
  series.points.reserve(by_evals.size());
  for (auto [e, b] : by_evals) {
    if (!series.points.empty()) b = std::min(b, series.points.back().best_delta);
    series.points.push_back({e, b});
  }
  return series;
}

// Runs typed as PerformanceRun but without events are skipped by the templates.
inline std::optional<BestSoFarSeries> try_load_series(const QuadStore& st, const std::string& run_iri) {
  try {
    return load_series(st, run_iri);
  } catch (const QueryError& e) {
    if (e.kind() != QueryError::Kind::NoSuchRun) throw;
    return std::nullopt;
  }
}

inline std::optional<double> value_at(const BestSoFarSeries& series, std::int64_t budget) {
  auto it = std::upper_bound(series.points.begin(), series.points.end(), budget,
                             [](std::int64_t b, const SeriesPoint& p) { return b < p.evals; });
  if (it == series.points.begin()) return std::nullopt;
  return std::prev(it)->best_delta;
}

struct TargetOutcome {
  bool reached = false;
  std::int64_t evals = 0;   // valid when reached
  double final_best = 0;    // last point's best_delta

  bool operator==(const TargetOutcome&) const = default;
};

// Smallest recorded evals whose best_delta <= target.
inline TargetOutcome evals_to_target(const BestSoFarSeries& series, double target) {
  TargetOutcome out;
  out.final_best = series.points.empty() ? 0 : series.points.back().best_delta;
  for (const auto& p : series.points) {
    if (p.best_delta <= target) {
      out.reached = true;
      out.evals = p.evals;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Template queries

struct Selectors {
  std::optional<std::set<std::string>> algorithms;
  std::optional<std::set<std::int64_t>> problems;
  std::optional<std::set<std::int64_t>> instances;
  std::optional<std::set<std::int64_t>> dimensions;
};

struct PointBudget {
  std::int64_t budget = 0;
};
struct RangeBudget {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};
using Budget = std::variant<PointBudget, RangeBudget>;

struct FixedBudgetQuery {
  Selectors selectors;
  Budget budget;
};

struct FixedTargetQuery {
  Selectors selectors;
  double target = 0;
};

// Exactly one of doi / algorithm.
struct ProvenanceQuery {
  std::optional<std::string> doi;
  std::optional<std::string> algorithm;
};

inline void validate(const Selectors& s) {
  auto check = [](const auto& opt, std::string_view name) {
    if (opt && opt->empty()) throw QueryError(QueryError::Kind::Invalid, std::string(name) + " selector is empty");
  };
  check(s.algorithms, "algorithms");
  check(s.problems, "problems");
  check(s.instances, "instances");
  check(s.dimensions, "dimensions");
}

inline void validate(const FixedBudgetQuery& q) {
  validate(q.selectors);
  if (auto* p = std::get_if<PointBudget>(&q.budget); p && p->budget < 0)
    throw QueryError(QueryError::Kind::Invalid, "budget must be >= 0");
  if (auto* r = std::get_if<RangeBudget>(&q.budget)) {
    if (r->lo < 0) throw QueryError(QueryError::Kind::Invalid, "budget range must start at >= 0");
    if (r->lo > r->hi) throw QueryError(QueryError::Kind::Invalid, "budget range has lo > hi");
  }
}

inline void validate(const FixedTargetQuery& q) {
  validate(q.selectors);
  if (!std::isfinite(q.target)) throw QueryError(QueryError::Kind::Invalid, "target must be finite");
}

inline void validate(const ProvenanceQuery& q) {
  if (q.doi.has_value() == q.algorithm.has_value())
    throw QueryError(QueryError::Kind::Invalid, "provenance needs exactly one of study DOI or algorithm");
}

struct RunInfo {
  std::string iri;
  std::string algorithm;
  std::int64_t function_id = 0;
  std::int64_t dimension = 0;
  std::int64_t instance = 0;

  auto key() const { return std::tie(algorithm, function_id, dimension, instance, iri); }
};

// Runs with a complete (algorithm label, function id, dimension, instance) key
// that pass the selectors, sorted by that key.
inline std::vector<RunInfo> find_runs(const QuadStore& st, const Selectors& sel) {
  const auto& v = detail::terms();
  const auto& dict = st.dictionary();
  auto pid = [&](const Term& t) { return detail::id_of(st, t); };
  TermId type = pid(v.rdf_type), run_class = pid(v.performance_run), label = pid(v.rdfs_label),
         executed_by = pid(v.executed_by), on_problem = pid(v.on_problem), function_id = pid(v.function_id),
         instance_number = pid(v.instance_number), problem_dimension = pid(v.problem_dimension);

  auto first_int = [&](TermId s, TermId p) -> std::optional<std::int64_t> {
    for (TermId o : detail::objects(st, s, p))
      if (auto i = dict.decode(o).as_integer()) return i;
    return std::nullopt;
  };
  std::map<TermId, std::optional<std::string>> label_cache;
  auto alg_label = [&](TermId alg) -> const std::optional<std::string>& {
    auto [it, fresh] = label_cache.try_emplace(alg);
    if (fresh) {
      std::optional<std::string> best;
      for (TermId o : detail::objects(st, alg, label))
        if (auto s = dict.decode(o).as_string(); s && (!best || *s < *best)) best = s;
      it->second = best;
    }
    return it->second;
  };

  std::vector<RunInfo> out;
  for (TermId run : detail::subjects(st, type, run_class)) {
    const Term& run_term = dict.decode(run);
    if (!run_term.is_iri()) continue;
    auto dim = first_int(run, problem_dimension);
    auto inst = first_int(run, instance_number);
    if (!dim || !inst) continue;
    if (sel.dimensions && !sel.dimensions->contains(*dim)) continue;
    if (sel.instances && !sel.instances->contains(*inst)) continue;

    std::optional<std::int64_t> func;
    for (TermId prob : detail::objects(st, run, on_problem))
      if ((func = first_int(prob, function_id))) break;
    if (!func || (sel.problems && !sel.problems->contains(*func))) continue;

    std::optional<std::string> alg;
    for (TermId a : detail::objects(st, run, executed_by)) {
      const auto& l = alg_label(a);
      if (l && (!alg || *l < *alg)) alg = l;
    }
    if (!alg || (sel.algorithms && !sel.algorithms->contains(*alg))) continue;

    out.push_back({run_term.value(), *alg, *func, *dim, *inst});
  }
  std::sort(out.begin(), out.end(), [](const RunInfo& a, const RunInfo& b) { return a.key() < b.key(); });
  return out;
}

inline const std::vector<std::string>& fixed_budget_columns() {
  static const std::vector<std::string> cols = {"algorithm", "functionId", "dimension",        "instance",
                                                "evals",     "bestFitnessDelta", "status"};
  return cols;
}

inline const std::vector<std::string>& fixed_target_columns() {
  static const std::vector<std::string> cols = {"algorithm",     "functionId",     "dimension", "instance",
                                                "evalsToTarget", "finalBestDelta", "status"};
  return cols;
}

inline const std::vector<std::string>& provenance_columns() {
  static const std::vector<std::string> cols = {"doi", "title", "authors", "year"};
  return cols;
}

// Point(b): one row per run at evals = b; status "recorded" on an exact hit,
// "carried" otherwise, absent value and status before the first event.
// Range(lo, hi): one "recorded" row per event with lo <= evals <= hi; a run
// silent in the range but with earlier events yields one "carried" row at lo.
inline ResultTable run_fixed_budget(const QuadStore& st, const FixedBudgetQuery& q) {
  validate(q);
  ResultTable table{fixed_budget_columns(), {}};
  for (const auto& run : find_runs(st, q.selectors)) {
    auto loaded = try_load_series(st, run.iri);
    if (!loaded) continue;
    const auto& series = *loaded;
    auto row = [&](std::int64_t evals, Cell value, Cell status) {
      table.rows.push_back({run.algorithm, run.function_id, run.dimension, run.instance, evals, std::move(value),
                            std::move(status)});
    };
    if (auto* p = std::get_if<PointBudget>(&q.budget)) {
      auto v = value_at(series, p->budget);
      if (!v) {
        row(p->budget, std::monostate{}, std::monostate{});
        continue;
      }
      bool exact = std::any_of(series.points.begin(), series.points.end(),
                               [&](const SeriesPoint& pt) { return pt.evals == p->budget; });
      row(p->budget, *v, std::string(exact ? "recorded" : "carried"));
    } else {
      const auto& r = std::get<RangeBudget>(q.budget);
      bool any = false;
      for (const auto& pt : series.points) {
        if (pt.evals < r.lo || pt.evals > r.hi) continue;
        row(pt.evals, pt.best_delta, std::string("recorded"));
        any = true;
      }
      if (!any) {
        if (auto v = value_at(series, r.lo)) row(r.lo, *v, std::string("carried"));
      }
    }
  }
  return table;
}

inline ResultTable run_fixed_target(const QuadStore& st, const FixedTargetQuery& q) {
  validate(q);
  ResultTable table{fixed_target_columns(), {}};
  for (const auto& run : find_runs(st, q.selectors)) {
    auto series = try_load_series(st, run.iri);
    if (!series) continue;
    auto outcome = evals_to_target(*series, q.target);
    Cell evals = outcome.reached ? Cell{outcome.evals} : Cell{};
    table.rows.push_back({run.algorithm, run.function_id, run.dimension, run.instance, evals, outcome.final_best,
                          std::string(outcome.reached ? "reached" : "not-reached")});
  }
  return table;
}

// Study records sorted by DOI; authors sorted within each record.
inline std::vector<coco::ProvenanceRecord> run_provenance(const QuadStore& st, const ProvenanceQuery& q) {
  validate(q);
  const auto& v = detail::terms();
  const auto& dict = st.dictionary();
  auto pid = [&](const Term& t) { return detail::id_of(st, t); };

  std::set<TermId> studies;
  if (q.doi) {
    for (TermId s : detail::subjects(st, pid(v.doi), pid(Term::string(*q.doi)))) studies.insert(s);
  } else {
    TermId type = pid(v.rdf_type), alg_class = pid(v.algorithm_class);
    for (TermId alg : detail::subjects(st, pid(v.rdfs_label), pid(Term::string(*q.algorithm)))) {
      auto types = detail::objects(st, alg, type);
      if (!std::binary_search(types.begin(), types.end(), alg_class)) continue;
      for (TermId run : detail::subjects(st, pid(v.executed_by), alg))
        for (TermId study : detail::objects(st, run, pid(v.part_of_study))) studies.insert(study);
    }
  }

  auto strings = [&](TermId s, const Term& p) {
    std::vector<std::string> out;
    for (TermId o : detail::objects(st, s, pid(p)))
      if (auto str = dict.decode(o).as_string()) out.push_back(*str);
    std::sort(out.begin(), out.end());
    return out;
  };

  std::vector<coco::ProvenanceRecord> out;
  for (TermId study : studies) {
    coco::ProvenanceRecord rec;
    auto dois = strings(study, v.doi);
    if (dois.empty()) continue;
    rec.doi = dois.front();
    auto titles = strings(study, v.title);
    if (!titles.empty()) rec.title = titles.front();
    rec.authors = strings(study, v.author);
    for (TermId o : detail::objects(st, study, pid(v.year))) {
      const Term& y = dict.decode(o);
      if (y.is_literal() && y.datatype() == rdf::xsd::gyear_iri()) {
        if (auto n = rdf::parse_int64(y.value())) {
          rec.year = static_cast<int>(*n);
          break;
        }
      }
    }
    out.push_back(std::move(rec));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.doi < b.doi; });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline ResultTable provenance_table(const std::vector<coco::ProvenanceRecord>& records) {
  ResultTable table{provenance_columns(), {}};
  for (const auto& r : records) {
    std::string authors;
    for (std::size_t i = 0; i < r.authors.size(); ++i) {
      if (i) authors += "; ";
      authors += r.authors[i];
    }
    table.rows.push_back({r.doi, r.title, authors, static_cast<std::int64_t>(r.year)});
  }
  return table;
}

// ---------------------------------------------------------------------------
// Dropdown values

enum class ValueDimension { Algorithm, FunctionId, Dimension, Instance, Study };

inline std::optional<ValueDimension> parse_value_dimension(std::string_view name) {
  if (name == "algorithm") return ValueDimension::Algorithm;
  if (name == "functionId") return ValueDimension::FunctionId;
  if (name == "dimension") return ValueDimension::Dimension;
  if (name == "instance") return ValueDimension::Instance;
  if (name == "study") return ValueDimension::Study;
  return std::nullopt;
}

// Strings sort lexicographically, integers ascending.
inline std::vector<Cell> distinct_values(const QuadStore& st, ValueDimension dim) {
  const auto& v = detail::terms();
  const auto& dict = st.dictionary();
  auto pid = [&](const Term& t) { return detail::id_of(st, t); };

  auto object_values = [&](const Term& predicate, bool integers) {
    std::set<std::int64_t> ints;
    std::set<std::string> strs;
    TermId p = pid(predicate);
    if (p) {
      st.for_each_match({0, 0, p, 0}, [&](const store::QuadIds& q) {
        const Term& o = dict.decode(q[store::kObject]);
        if (integers) {
          if (auto i = o.as_integer()) ints.insert(*i);
        } else if (auto s = o.as_string()) {
          strs.insert(*s);
        }
      });
    }
    std::vector<Cell> out;
    if (integers)
      for (auto i : ints) out.emplace_back(i);
    else
      for (auto& s : strs) out.emplace_back(s);
    return out;
  };

  switch (dim) {
    case ValueDimension::Algorithm: {
      std::set<std::string> labels;
      TermId label = pid(v.rdfs_label);
      for (TermId alg : detail::subjects(st, pid(v.rdf_type), pid(v.algorithm_class)))
        for (TermId o : detail::objects(st, alg, label))
          if (auto s = dict.decode(o).as_string()) labels.insert(*s);
      return {labels.begin(), labels.end()};
    }
    case ValueDimension::FunctionId: return object_values(v.function_id, true);
    case ValueDimension::Dimension: return object_values(v.problem_dimension, true);
    case ValueDimension::Instance: return object_values(v.instance_number, true);
    case ValueDimension::Study: return object_values(v.doi, false);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Basic graph patterns

struct Variable {
  std::string name;
  auto operator<=>(const Variable&) const = default;
};

using Slot = std::variant<Term, Variable>;

// Slots in canonical quad order: graph, subject, predicate, object.
struct BgpPattern {
  std::array<Slot, 4> slots;
};

enum class Comparator { Less, LessEqual, Equal, GreaterEqual, Greater, NotEqual };

inline std::optional<Comparator> parse_comparator(std::string_view op) {
  if (op == "<") return Comparator::Less;
  if (op == "<=" || op == "\xE2\x89\xA4") return Comparator::LessEqual;
  if (op == "=" || op == "==") return Comparator::Equal;
  if (op == ">=" || op == "\xE2\x89\xA5") return Comparator::GreaterEqual;
  if (op == ">") return Comparator::Greater;
  if (op == "!=" || op == "\xE2\x89\xA0") return Comparator::NotEqual;
  return std::nullopt;
}

struct Filter {
  std::string variable;
  Comparator op;
  Term value;
};

struct BgpQuery {
  std::vector<BgpPattern> patterns;
  std::vector<Filter> filters;
};

struct BindingTable {
  std::vector<std::string> variables;        // order of first appearance
  std::vector<std::vector<Term>> rows;
};

// Numeric literals compare by value; literals of one datatype compare
// lexically; any other pair supports only = and !=.
inline bool compare_terms(const Term& a, Comparator op, const Term& b) {
  std::optional<std::partial_ordering> ord;
  if (auto x = a.as_number(), y = b.as_number(); x && y) {
    ord = *x <=> *y;
  } else if (a.is_literal() && b.is_literal() && a.datatype() == b.datatype()) {
    ord = a.value() <=> b.value();
  }
  if (!ord) {
    if (op == Comparator::Equal) return a == b;
    if (op == Comparator::NotEqual) return a != b;
    return false;
  }
  switch (op) {
    case Comparator::Less: return *ord < 0;
    case Comparator::LessEqual: return *ord <= 0;
    case Comparator::Equal: return *ord == 0;
    case Comparator::GreaterEqual: return *ord >= 0;
    case Comparator::Greater: return *ord > 0;
    case Comparator::NotEqual: return *ord != 0;
  }
  return false;
}

inline void validate(const BgpQuery& q) {
  if (q.patterns.empty()) throw QueryError(QueryError::Kind::Invalid, "bgp needs at least one pattern");
  std::set<std::string> vars;
  for (const auto& p : q.patterns) {
    for (std::size_t pos = 0; pos < 4; ++pos) {
      if (auto* v = std::get_if<Variable>(&p.slots[pos])) {
        if (v->name.empty()) throw QueryError(QueryError::Kind::Invalid, "empty variable name");
        vars.insert(v->name);
      } else {
        const Term& t = std::get<Term>(p.slots[pos]);
        if (pos != store::kObject && t.is_literal())
          throw QueryError(QueryError::Kind::Invalid, "literal outside object position");
        if ((pos == store::kGraph || pos == store::kPredicate) && !t.is_iri())
          throw QueryError(QueryError::Kind::Invalid, "graph and predicate must be IRIs");
      }
    }
  }
  for (const auto& f : q.filters)
    if (!vars.contains(f.variable))
      throw QueryError(QueryError::Kind::UnboundFilterVariable, "filter variable ?" + f.variable + " is not bound");
}

// Patterns are evaluated in the given order and hash-joined on shared
// variables; filters apply to complete rows. Rows are distinct and sorted by
// their serialized terms.
inline BindingTable eval_bgp(const QuadStore& st, const BgpQuery& q) {
  validate(q);
  const auto& dict = st.dictionary();

  std::vector<std::string> vars;
  auto var_index = [&](const std::string& name) {
    auto it = std::find(vars.begin(), vars.end(), name);
    if (it != vars.end()) return static_cast<std::size_t>(it - vars.begin());
    vars.push_back(name);
    return vars.size() - 1;
  };

  using Row = std::vector<TermId>;
  std::vector<Row> rows{Row{}};

  for (const auto& pattern : q.patterns) {
    store::IdPattern ids{};
    std::array<std::optional<std::size_t>, 4> slot_var{};
    bool impossible = false;
    for (std::size_t pos = 0; pos < 4; ++pos) {
      if (auto* v = std::get_if<Variable>(&pattern.slots[pos])) {
        slot_var[pos] = var_index(v->name);
      } else {
        auto id = dict.lookup(std::get<Term>(pattern.slots[pos]));
        if (!id) impossible = true;
        else ids[pos] = *id;
      }
    }
    const std::size_t width = vars.size();
    if (impossible) {
      rows.clear();
      break;
    }

    std::size_t prior_width = rows.empty() ? 0 : rows.front().size();
    std::vector<std::size_t> shared;
    for (std::size_t pos = 0; pos < 4; ++pos)
      if (slot_var[pos] && *slot_var[pos] < prior_width &&
          std::find(shared.begin(), shared.end(), *slot_var[pos]) == shared.end())
        shared.push_back(*slot_var[pos]);

    // Bindings contributed by this pattern, consistent within the pattern.
    std::vector<Row> matches;
    st.for_each_match(ids, [&](const store::QuadIds& quad) {
      Row m(width, 0);
      for (std::size_t pos = 0; pos < 4; ++pos) {
        if (!slot_var[pos]) continue;
        TermId& cell = m[*slot_var[pos]];
        if (cell != 0 && cell != quad[pos]) return;
        cell = quad[pos];
      }
      matches.push_back(std::move(m));
    });

    auto key_of = [&](const Row& r) {
      std::string key;
      for (auto i : shared) key.append(reinterpret_cast<const char*>(&r[i]), sizeof(TermId));
      return key;
    };
    std::unordered_multimap<std::string, const Row*> table;
    for (const auto& r : rows) table.emplace(key_of(r), &r);

    std::vector<Row> joined;
    for (const auto& m : matches) {
      auto [first, last] = table.equal_range(key_of(m));
      for (auto it = first; it != last; ++it) {
        Row out = *it->second;
        out.resize(width, 0);
        for (std::size_t i = prior_width; i < width; ++i) out[i] = m[i];
        joined.push_back(std::move(out));
      }
    }
    rows = std::move(joined);
    if (rows.empty()) break;
  }

  // Remaining variables of patterns never reached still belong to the header.
  for (const auto& pattern : q.patterns)
    for (const auto& slot : pattern.slots)
      if (auto* v = std::get_if<Variable>(&slot)) var_index(v->name);

  BindingTable result{vars, {}};
  std::set<std::vector<std::string>> seen;
  std::vector<std::pair<std::vector<std::string>, std::vector<Term>>> keyed;
  for (const auto& r : rows) {
    if (r.size() != vars.size()) continue;
    std::vector<Term> terms;
    terms.reserve(r.size());
    for (TermId id : r) terms.push_back(dict.decode(id));
    bool keep = true;
    for (const auto& f : q.filters) {
      auto idx = static_cast<std::size_t>(std::find(vars.begin(), vars.end(), f.variable) - vars.begin());
      if (!compare_terms(terms[idx], f.op, f.value)) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    std::vector<std::string> key;
    key.reserve(terms.size());
    for (const auto& t : terms) key.push_back(rdf::to_nquads_term(t));
    if (seen.insert(key).second) keyed.emplace_back(std::move(key), std::move(terms));
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [key, terms] : keyed) result.rows.push_back(std::move(terms));
  return result;
}

// Binding table as a result table of serialized N-Quads terms.
inline ResultTable to_result_table(const BindingTable& bindings) {
  ResultTable table{bindings.variables, {}};
  for (const auto& row : bindings.rows) {
    std::vector<Cell> cells;
    for (const auto& t : row) cells.emplace_back(rdf::to_nquads_term(t));
    table.rows.push_back(std::move(cells));
  }
  return table;
}

// Parses one slot: "?name" is a variable, "<iri>", "_:label" and
// "\"lex\"^^<dt>" use N-Quads syntax, "prefix:local" expands a known CURIE.
inline Slot parse_slot(std::string_view text) {
  if (text.empty()) throw QueryError(QueryError::Kind::Invalid, "empty pattern slot");
  if (text.front() == '?') {
    if (text.size() == 1) throw QueryError(QueryError::Kind::Invalid, "empty variable name");
    return Variable{std::string(text.substr(1))};
  }
  if (text.front() == '<' || text.front() == '"' || text.starts_with("_:")) {
    // Reuse the statement parser on a synthetic line.
    std::string line = "<urn:x:s> <urn:x:p> " + std::string(text) + " <urn:x:g> .";
    try {
      return rdf::parse_nquads_line(line, 1).object;
    } catch (const rdf::SyntaxError& e) {
      throw QueryError(QueryError::Kind::Invalid, "invalid term '" + std::string(text) + "': " + e.reason());
    }
  }
  try {
    return Term::iri(vocab::expand_curie(text));
  } catch (const vocab::VocabError& e) {
    throw QueryError(QueryError::Kind::Invalid, "invalid term '" + std::string(text) + "': " + e.what());
  }
}

}  // namespace optionkb::query
