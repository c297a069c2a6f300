#pragma once

// BBOB/COCO result-file parsing (.info metadata, .dat improvement logs) and
// annotation of parsed runs into one named graph per algorithm.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "optionkb/rdf.hpp"
#include "optionkb/store.hpp"
#include "optionkb/vocab.hpp"

namespace optionkb::coco {

using rdf::Quad;
using rdf::Term;

struct TrialSummary {
  std::int64_t instance = 0;
  std::int64_t final_evals = 0;
  double final_best_delta = 0;

  bool operator==(const TrialSummary&) const = default;
};

struct InfoRecord {
  std::int64_t func_id = 0;
  std::int64_t dim = 0;
  double precision = 0;
  std::string alg_id;
  std::string data_path;
  std::vector<TrialSummary> trials;
};

struct EventRow {
  std::int64_t evals = 0;
  double delta = 0;
  double best_delta = 0;

  bool operator==(const EventRow&) const = default;
};

struct DatRun {
  std::optional<double> fopt;
  std::vector<EventRow> rows;
};

struct ProvenanceRecord {
  std::string doi;
  std::string title;
  std::vector<std::string> authors;
  int year = 0;

  bool operator==(const ProvenanceRecord&) const = default;
};

struct IngestReport {
  std::size_t files_parsed = 0;
  std::size_t runs_annotated = 0;
  std::size_t quads_emitted = 0;
  std::vector<std::string> warnings;
};

enum class Mode { Strict, Lenient };

class IngestError : public std::runtime_error {
 public:
  enum class Kind { SyntaxError, MissingField, NonMonotoneEvals, NonMonotoneBestDelta, PairingMismatch, InvalidProvenance };

  IngestError(Kind kind, std::size_t line, std::string detail, std::string file = {})
      : std::runtime_error(compose(kind, line, detail, file)),
        kind_(kind),
        line_(line),
        detail_(std::move(detail)),
        file_(std::move(file)) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::string& file() const noexcept { return file_; }

  IngestError with_file(std::string file) const { return IngestError(kind_, line_, detail_, std::move(file)); }

  static std::string_view kind_name(Kind kind) {
    switch (kind) {
      case Kind::SyntaxError: return "SyntaxError";
      case Kind::MissingField: return "MissingField";
      case Kind::NonMonotoneEvals: return "NonMonotoneEvals";
      case Kind::NonMonotoneBestDelta: return "NonMonotoneBestDelta";
      case Kind::PairingMismatch: return "PairingMismatch";
      case Kind::InvalidProvenance: return "InvalidProvenance";
    }
    return "Error";
  }

 private:
  static std::string compose(Kind kind, std::size_t line, const std::string& detail, const std::string& file) {
    std::string msg;
    if (!file.empty()) msg += file + ":";
    if (line) msg += std::to_string(line) + ":";
    if (!msg.empty()) msg += ' ';
    msg += std::string(kind_name(kind)) + ": " + detail;
    return msg;
  }

  Kind kind_;
  std::size_t line_;
  std::string detail_;
  std::string file_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::pair<std::size_t, std::string_view>> split_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t pos = 0, no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    lines.emplace_back(++no, line);
  }
  return lines;
}

inline std::optional<std::int64_t> parse_evals(std::string_view s) {
  if (auto i = rdf::parse_int64(s)) return i;
  // Some writers emit evaluation counts in float notation, e.g. 1e+05.
  auto d = rdf::parse_finite_double(s);
  if (d && *d == std::floor(*d) && std::abs(*d) < 9.0e18) return static_cast<std::int64_t>(*d);
  return std::nullopt;
}

// Splits `key = value, key = 'quoted, value', ...` honouring quotes.
inline std::vector<std::pair<std::string, std::string>> split_header(std::string_view line, std::size_t line_no) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t i = 0;
  while (i < line.size()) {
    auto eq = line.find('=', i);
    if (eq == std::string_view::npos) {
      if (!trim(line.substr(i)).empty())
        throw IngestError(IngestError::Kind::SyntaxError, line_no, "expected 'key = value' in header");
      break;
    }
    std::string key(trim(line.substr(i, eq - i)));
    if (key.empty()) throw IngestError(IngestError::Kind::SyntaxError, line_no, "empty key in header");
    i = eq + 1;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::string value;
    if (i < line.size() && (line[i] == '\'' || line[i] == '"')) {
      char quote = line[i++];
      auto close = line.find(quote, i);
      if (close == std::string_view::npos)
        throw IngestError(IngestError::Kind::SyntaxError, line_no, "unterminated quoted value for '" + key + "'");
      value = std::string(line.substr(i, close - i));
      i = close + 1;
      auto comma = line.find(',', i);
      if (!trim(line.substr(i, comma == std::string_view::npos ? std::string_view::npos : comma - i)).empty())
        throw IngestError(IngestError::Kind::SyntaxError, line_no, "unexpected text after quoted value");
      i = comma == std::string_view::npos ? line.size() : comma + 1;
    } else {
      auto comma = line.find(',', i);
      value = std::string(trim(line.substr(i, comma == std::string_view::npos ? std::string_view::npos : comma - i)));
      i = comma == std::string_view::npos ? line.size() : comma + 1;
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

inline TrialSummary parse_trial(std::string_view token, std::size_t line_no) {
  auto colon = token.find(':');
  auto bar = token.find('|');
  if (colon == std::string_view::npos || bar == std::string_view::npos || bar < colon)
    throw IngestError(IngestError::Kind::SyntaxError, line_no,
                      "trial summary '" + std::string(token) + "' is not '<instance>:<evals>|<delta>'");
  auto inst = rdf::parse_int64(trim(token.substr(0, colon)));
  auto evals = parse_evals(trim(token.substr(colon + 1, bar - colon - 1)));
  auto delta = rdf::parse_finite_double(trim(token.substr(bar + 1)));
  if (!inst || !evals || !delta)
    throw IngestError(IngestError::Kind::SyntaxError, line_no, "malformed trial summary '" + std::string(token) + "'");
  return {*inst, *evals, *delta};
}

}  // namespace detail

// Parses .info metadata. Unknown header keys are ignored with a warning.
inline std::vector<InfoRecord> parse_info(std::string_view text, std::vector<std::string>* warnings = nullptr) {
  using detail::trim;
  std::vector<InfoRecord> records;
  std::optional<InfoRecord> pending;
  std::size_t pending_line = 0;

  for (auto [line_no, raw] : detail::split_lines(text)) {
    auto line = trim(raw);
    if (line.empty() || line.front() == '%') continue;

    if (line.find('=') != std::string_view::npos) {
      if (pending)
        throw IngestError(IngestError::Kind::SyntaxError, pending_line, "record header without a data line");
      InfoRecord rec;
      bool have_func = false, have_dim = false, have_prec = false, have_alg = false;
      for (auto& [key, value] : detail::split_header(line, line_no)) {
        if (key == "funcId") {
          auto v = rdf::parse_int64(value);
          if (!v || *v < 1) throw IngestError(IngestError::Kind::SyntaxError, line_no, "invalid funcId '" + value + "'");
          rec.func_id = *v;
          have_func = true;
        } else if (key == "DIM") {
          auto v = rdf::parse_int64(value);
          if (!v || *v < 1) throw IngestError(IngestError::Kind::SyntaxError, line_no, "invalid DIM '" + value + "'");
          rec.dim = *v;
          have_dim = true;
        } else if (key == "Precision") {
          auto v = rdf::parse_finite_double(value);
          if (!v || *v <= 0)
            throw IngestError(IngestError::Kind::SyntaxError, line_no, "invalid Precision '" + value + "'");
          rec.precision = *v;
          have_prec = true;
        } else if (key == "algId") {
          if (value.empty()) throw IngestError(IngestError::Kind::SyntaxError, line_no, "empty algId");
          rec.alg_id = value;
          have_alg = true;
        } else if (warnings) {
          warnings->push_back("line " + std::to_string(line_no) + ": ignoring header key '" + key + "'");
        }
      }
      if (!have_func) throw IngestError(IngestError::Kind::MissingField, line_no, "funcId");
      if (!have_dim) throw IngestError(IngestError::Kind::MissingField, line_no, "DIM");
      if (!have_prec) throw IngestError(IngestError::Kind::MissingField, line_no, "Precision");
      if (!have_alg) throw IngestError(IngestError::Kind::MissingField, line_no, "algId");
      pending = std::move(rec);
      pending_line = line_no;
      continue;
    }

    if (!pending) throw IngestError(IngestError::Kind::SyntaxError, line_no, "data line without a record header");
    std::set<std::int64_t> seen;
    std::size_t pos = 0;
    bool first = true;
    while (pos <= line.size()) {
      auto comma = line.find(',', pos);
      auto token = trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
      pos = comma == std::string_view::npos ? line.size() + 1 : comma + 1;
      if (first) {
        if (token.empty()) throw IngestError(IngestError::Kind::SyntaxError, line_no, "empty data path");
        pending->data_path = std::string(token);
        first = false;
        continue;
      }
      if (token.empty()) continue;
      auto trial = detail::parse_trial(token, line_no);
      if (!seen.insert(trial.instance).second)
        throw IngestError(IngestError::Kind::SyntaxError, line_no,
                          "duplicate instance " + std::to_string(trial.instance) + " in record");
      pending->trials.push_back(trial);
    }
    records.push_back(std::move(*pending));
    pending.reset();
  }
  if (pending) throw IngestError(IngestError::Kind::SyntaxError, pending_line, "record header without a data line");
  return records;
}

// Parses a .dat improvement log. Each '%' header line opens a new run.
// In lenient mode a rising best_delta is clamped to the running minimum and
// reported in `warnings`; in strict mode it is an error.
inline std::vector<DatRun> parse_dat(std::string_view text, Mode mode = Mode::Strict,
                                     std::vector<std::string>* warnings = nullptr) {
  using detail::trim;
  std::vector<DatRun> runs;
  std::size_t header_line = 0;

  auto close_run = [&] {
    if (!runs.empty() && runs.back().rows.empty())
      throw IngestError(IngestError::Kind::SyntaxError, header_line, "run header without data rows");
  };

  for (auto [line_no, raw] : detail::split_lines(text)) {
    auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '%') {
      close_run();
      DatRun run;
      auto open = line.find('(');
      if (open != std::string_view::npos) {
        auto close = line.find(')', open);
        if (close != std::string_view::npos) run.fopt = rdf::parse_finite_double(trim(line.substr(open + 1, close - open - 1)));
      }
      runs.push_back(std::move(run));
      header_line = line_no;
      continue;
    }
    if (runs.empty()) throw IngestError(IngestError::Kind::SyntaxError, line_no, "data row before any run header");

    std::vector<std::string_view> cols;
    std::size_t pos = 0;
    while (pos < line.size() && cols.size() < 3) {
      auto b = line.find_first_not_of(" \t", pos);
      if (b == std::string_view::npos) break;
      auto e = line.find_first_of(" \t", b);
      cols.push_back(line.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b));
      pos = e == std::string_view::npos ? line.size() : e;
    }
    if (cols.size() < 3) throw IngestError(IngestError::Kind::SyntaxError, line_no, "expected at least 3 columns");
    auto evals = detail::parse_evals(cols[0]);
    auto delta = rdf::parse_finite_double(cols[1]);
    auto best = rdf::parse_finite_double(cols[2]);
    if (!evals) throw IngestError(IngestError::Kind::SyntaxError, line_no, "invalid evaluation count");
    if (!delta || !best) throw IngestError(IngestError::Kind::SyntaxError, line_no, "invalid fitness value");

    auto& rows = runs.back().rows;
    EventRow row{*evals, *delta, *best};
    if (!rows.empty()) {
      if (row.evals <= rows.back().evals)
        throw IngestError(IngestError::Kind::NonMonotoneEvals, line_no,
                          "evaluations " + std::to_string(row.evals) + " do not exceed previous " +
                              std::to_string(rows.back().evals));
      if (row.best_delta > rows.back().best_delta) {
        if (mode == Mode::Strict)
          throw IngestError(IngestError::Kind::NonMonotoneBestDelta, line_no,
                            "best delta " + rdf::format_double(row.best_delta) + " exceeds previous " +
                                rdf::format_double(rows.back().best_delta));
        if (warnings)
          warnings->push_back("line " + std::to_string(line_no) + ": best delta " + rdf::format_double(row.best_delta) +
                              " clamped to running minimum " + rdf::format_double(rows.back().best_delta));
        row.best_delta = rows.back().best_delta;
      }
    }
    rows.push_back(row);
  }
  close_run();
  return runs;
}

// Percent-encodes every byte outside [A-Za-z0-9._-].
inline std::string encode_iri_component(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    bool keep = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' || c == '_' ||
                c == '-';
    if (keep) {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xF];
    }
  }
  return out;
}

inline constexpr std::string_view kDefaultBase = "urn:option:";

struct IriMinter {
  std::string base = std::string(kDefaultBase);

  std::string algorithm(std::string_view alg_id) const { return base + "alg/" + encode_iri_component(alg_id); }
  std::string problem(std::int64_t func_id) const { return base + "prob/f" + std::to_string(func_id); }
  std::string study(std::string_view doi) const { return base + "study/" + encode_iri_component(doi); }
  std::string run(std::string_view alg_id, std::int64_t func_id, std::int64_t dim, std::int64_t inst) const {
    return base + "run/" + encode_iri_component(alg_id) + "/f" + std::to_string(func_id) + "/d" + std::to_string(dim) +
           "/i" + std::to_string(inst);
  }
  static std::string event(std::string_view run_iri, std::int64_t evals) {
    return std::string(run_iri) + "/e" + std::to_string(evals);
  }
};

inline void validate(const ProvenanceRecord& prov) {
  auto bad = [](std::string msg) { return IngestError(IngestError::Kind::InvalidProvenance, 0, std::move(msg)); };
  if (prov.doi.empty()) throw bad("doi must be non-empty");
  if (prov.title.empty()) throw bad("title must be non-empty");
  if (prov.authors.empty()) throw bad("at least one author is required");
  for (const auto& a : prov.authors)
    if (a.empty()) throw bad("author names must be non-empty");
  if (prov.year < 1990 || prov.year > 2100) throw bad("year must lie in [1990, 2100]");
}

// Emits quads in schema order, graph by graph (algorithms in order of first
// appearance). Within a graph: algorithm, problems, study, runs, events.
// Identical quads produced by colliding run keys are emitted once.
inline std::vector<Quad> annotate(const std::vector<InfoRecord>& infos,
                                  const std::vector<std::vector<DatRun>>& runs_by_record,
                                  const ProvenanceRecord& prov, std::string_view base = kDefaultBase,
                                  std::vector<std::string>* warnings = nullptr) {
  validate(prov);
  if (infos.size() != runs_by_record.size())
    throw IngestError(IngestError::Kind::PairingMismatch, 0,
                      std::to_string(infos.size()) + " records but " + std::to_string(runs_by_record.size()) +
                          " run groups");
  for (std::size_t r = 0; r < infos.size(); ++r) {
    if (infos[r].trials.size() != runs_by_record[r].size())
      throw IngestError(IngestError::Kind::PairingMismatch, 0,
                        "record " + std::to_string(r) + " (algId '" + infos[r].alg_id + "', f" +
                            std::to_string(infos[r].func_id) + ", DIM " + std::to_string(infos[r].dim) + ") lists " +
                            std::to_string(infos[r].trials.size()) + " trials but has " +
                            std::to_string(runs_by_record[r].size()) + " runs");
  }

  const IriMinter mint{std::string(base)};
  const Term rdf_type = Term::iri(vocab::rdf_type_iri());
  const Term rdfs_label = Term::iri(vocab::rdfs_label_iri());
  auto opt = [](std::string_view local) { return Term::iri(vocab::option_iri(local)); };
  namespace t = vocab::term;

  std::vector<std::string> alg_order;
  for (const auto& rec : infos)
    if (std::find(alg_order.begin(), alg_order.end(), rec.alg_id) == alg_order.end()) alg_order.push_back(rec.alg_id);

  std::vector<Quad> out;
  std::set<Quad> emitted;
  auto emit = [&](const Term& g, const Term& s, const Term& p, Term o) {
    Quad q{g, s, p, std::move(o)};
    if (emitted.insert(q).second) out.push_back(std::move(q));
  };

  const Term study = Term::iri(mint.study(prov.doi));

  for (const auto& alg_id : alg_order) {
    const Term alg = Term::iri(mint.algorithm(alg_id));
    const Term& graph = alg;

    emit(graph, alg, rdf_type, opt(t::OptimizationAlgorithm));
    emit(graph, alg, rdfs_label, Term::string(alg_id));

    for (const auto& rec : infos) {
      if (rec.alg_id != alg_id) continue;
      Term prob = Term::iri(mint.problem(rec.func_id));
      emit(graph, prob, rdf_type, opt(t::BenchmarkProblem));
      emit(graph, prob, opt(t::functionId), Term::integer(rec.func_id));
    }

    emit(graph, study, rdf_type, opt(t::Study));
    emit(graph, study, opt(t::doi), Term::string(prov.doi));
    emit(graph, study, opt(t::title), Term::string(prov.title));
    emit(graph, study, opt(t::year), Term::gyear(prov.year));
    for (const auto& author : prov.authors) emit(graph, study, opt(t::author), Term::string(author));

    std::set<std::string> seen_runs;
    for (std::size_t r = 0; r < infos.size(); ++r) {
      const auto& rec = infos[r];
      if (rec.alg_id != alg_id) continue;
      Term prob = Term::iri(mint.problem(rec.func_id));
      for (std::size_t k = 0; k < rec.trials.size(); ++k) {
        auto inst = rec.trials[k].instance;
        auto run_iri = mint.run(alg_id, rec.func_id, rec.dim, inst);
        if (!seen_runs.insert(run_iri).second && warnings)
          warnings->push_back("duplicate run key (algId '" + alg_id + "', f" + std::to_string(rec.func_id) + ", DIM " +
                              std::to_string(rec.dim) + ", instance " + std::to_string(inst) +
                              "): rows merged under " + run_iri);
        Term run = Term::iri(run_iri);
        const auto& dat = runs_by_record[r][k];
        emit(graph, run, rdf_type, opt(t::PerformanceRun));
        emit(graph, run, opt(t::executedBy), alg);
        emit(graph, run, opt(t::onProblem), prob);
        emit(graph, run, opt(t::instanceNumber), Term::integer(inst));
        emit(graph, run, opt(t::problemDimension), Term::integer(rec.dim));
        if (dat.fopt) emit(graph, run, opt(t::foptValue), Term::real(*dat.fopt));
        emit(graph, run, opt(t::partOfStudy), study);
      }
    }

    for (std::size_t r = 0; r < infos.size(); ++r) {
      const auto& rec = infos[r];
      if (rec.alg_id != alg_id) continue;
      for (std::size_t k = 0; k < rec.trials.size(); ++k) {
        auto run_iri = mint.run(alg_id, rec.func_id, rec.dim, rec.trials[k].instance);
        Term run = Term::iri(run_iri);
        for (const auto& row : runs_by_record[r][k].rows) {
          Term ev = Term::iri(IriMinter::event(run_iri, row.evals));
          emit(graph, ev, rdf_type, opt(t::EvaluationEvent));
          emit(graph, run, opt(t::hasEvent), ev);
          emit(graph, ev, opt(t::evaluations), Term::integer(row.evals));
          emit(graph, ev, opt(t::fitnessDelta), Term::real(row.delta));
          emit(graph, ev, opt(t::bestFitnessDelta), Term::real(row.best_delta));
        }
      }
    }
  }
  return out;
}

inline bool relatively_equal(double a, double b, double rel_tol) {
  return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

// Compares one .info trial summary against the final row of its .dat run.
// Returns a warning message on mismatch.
inline std::optional<std::string> cross_check(const InfoRecord& rec, const TrialSummary& trial, const DatRun& run) {
  const auto& last = run.rows.back();
  bool evals_ok = last.evals == trial.final_evals;
  bool delta_ok = relatively_equal(last.best_delta, trial.final_best_delta, 1e-9);
  if (evals_ok && delta_ok) return std::nullopt;
  return "summary mismatch for algId '" + rec.alg_id + "', f" + std::to_string(rec.func_id) + ", DIM " +
         std::to_string(rec.dim) + ", instance " + std::to_string(trial.instance) + ": .info reports " +
         std::to_string(trial.final_evals) + "|" + rdf::format_double(trial.final_best_delta) +
         ", .dat final row is " + std::to_string(last.evals) + "|" + rdf::format_double(last.best_delta);
}

struct IngestOptions {
  Mode mode = Mode::Lenient;
  std::string base = std::string(kDefaultBase);
};

struct IngestResult {
  std::vector<Quad> quads;
  IngestReport report;
};

// Walks `root` for *.info files (sorted by path), resolves each record's data
// file relative to its .info file, parses, cross-checks and annotates.
inline IngestResult ingest_directory(const std::filesystem::path& root, const ProvenanceRecord& prov,
                                     const IngestOptions& options = {}) {
  namespace fs = std::filesystem;
  validate(prov);
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw store::IoError(root, "not a directory");

  std::vector<fs::path> info_files;
  for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (it->is_regular_file() && it->path().extension() == ".info") info_files.push_back(it->path());
  }
  if (ec) throw store::IoError(root, "directory walk failed: " + ec.message());
  std::sort(info_files.begin(), info_files.end());

  IngestResult result;
  auto& report = result.report;
  std::vector<InfoRecord> records;
  std::vector<std::vector<DatRun>> runs;
  std::map<fs::path, std::vector<DatRun>> dat_cache;

  for (const auto& info_path : info_files) {
    auto file_warn = [&](const fs::path& p, std::vector<std::string>& ws) {
      for (auto& w : ws) report.warnings.push_back(p.string() + ": " + w);
      ws.clear();
    };
    std::vector<std::string> ws;
    std::vector<InfoRecord> file_records;
    try {
      file_records = parse_info(store::read_file(info_path), &ws);
    } catch (const IngestError& e) {
      throw e.with_file(info_path.string());
    }
    ++report.files_parsed;
    file_warn(info_path, ws);

    for (auto& rec : file_records) {
      std::string rel = rec.data_path;
      std::replace(rel.begin(), rel.end(), '\\', '/');
      fs::path dat_path = (info_path.parent_path() / rel).lexically_normal();
      auto cached = dat_cache.find(dat_path);
      if (cached == dat_cache.end()) {
        std::vector<DatRun> parsed;
        try {
          parsed = parse_dat(store::read_file(dat_path), options.mode, &ws);
        } catch (const IngestError& e) {
          throw e.with_file(dat_path.string());
        }
        ++report.files_parsed;
        file_warn(dat_path, ws);
        cached = dat_cache.emplace(dat_path, std::move(parsed)).first;
      }
      const auto& dat_runs = cached->second;
      if (dat_runs.size() != rec.trials.size())
        throw IngestError(IngestError::Kind::PairingMismatch, 0,
                          std::to_string(rec.trials.size()) + " trial summaries but " + dat_path.string() + " holds " +
                              std::to_string(dat_runs.size()) + " runs",
                          info_path.string());
      for (std::size_t k = 0; k < rec.trials.size(); ++k)
        if (auto w = cross_check(rec, rec.trials[k], dat_runs[k])) report.warnings.push_back(info_path.string() + ": " + *w);
      report.runs_annotated += rec.trials.size();
      runs.push_back(dat_runs);
      records.push_back(std::move(rec));
    }
  }

  std::vector<std::string> annotate_warnings;
  result.quads = annotate(records, runs, prov, options.base, &annotate_warnings);
  for (auto& w : annotate_warnings) report.warnings.push_back(std::move(w));
  report.quads_emitted = result.quads.size();
  return result;
}

}  // namespace optionkb::coco
