#pragma once

// Minimal OPTION-compatible vocabulary: prefix table, CURIE handling and the
// closed set of 20 option terms used by the annotation schema.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace optionkb::vocab {

inline constexpr std::string_view kOptionNs = "urn:option:vocab#";
inline constexpr std::string_view kRdfNs = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kRdfsNs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view kXsdNs = "http://www.w3.org/2001/XMLSchema#";

class VocabError : public std::runtime_error {
 public:
  enum class Kind { UnknownPrefix, MalformedCurie };

  VocabError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class PrefixTable {
 public:
  PrefixTable() = default;
  explicit PrefixTable(std::map<std::string, std::string> entries) : entries_(std::move(entries)) {}

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

  std::optional<std::string_view> namespace_of(std::string_view prefix) const {
    auto it = entries_.find(std::string(prefix));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::string, std::string> entries_;
};

inline const PrefixTable& default_prefixes() {
  static const PrefixTable table({
      {"option", std::string(kOptionNs)},
      {"rdf", std::string(kRdfNs)},
      {"rdfs", std::string(kRdfsNs)},
      {"xsd", std::string(kXsdNs)},
  });
  return table;
}

inline std::string expand_curie(std::string_view curie, const PrefixTable& prefixes = default_prefixes()) {
  auto colon = curie.find(':');
  if (colon == std::string_view::npos || curie.find(':', colon + 1) != std::string_view::npos)
    throw VocabError(VocabError::Kind::MalformedCurie, "malformed curie '" + std::string(curie) + "'");
  auto prefix = curie.substr(0, colon);
  auto local = curie.substr(colon + 1);
  if (local.empty())
    throw VocabError(VocabError::Kind::MalformedCurie, "empty local name in '" + std::string(curie) + "'");
  auto ns = prefixes.namespace_of(prefix);
  if (!ns) throw VocabError(VocabError::Kind::UnknownPrefix, "unknown prefix '" + std::string(prefix) + "'");
  std::string iri(*ns);
  iri += local;
  return iri;
}

// Longest namespace match wins.
inline std::optional<std::string> compress_iri(std::string_view iri, const PrefixTable& prefixes = default_prefixes()) {
  const std::pair<const std::string, std::string>* best = nullptr;
  for (const auto& entry : prefixes.entries()) {
    const auto& ns = entry.second;
    if (iri.size() > ns.size() && iri.starts_with(ns) && (!best || ns.size() > best->second.size()))
      best = &entry;
  }
  if (!best) return std::nullopt;
  auto local = iri.substr(best->second.size());
  if (local.find(':') != std::string_view::npos) return std::nullopt;
  return best->first + ":" + std::string(local);
}

enum class TermKind { Class, Property };

inline std::string_view to_string(TermKind kind) { return kind == TermKind::Class ? "class" : "property"; }

struct VocabTerm {
  std::string curie;
  std::string iri;
  TermKind kind;
  std::string label;

  bool operator==(const VocabTerm&) const = default;
};

// Option terms by local name.
namespace term {
inline constexpr std::string_view OptimizationAlgorithm = "OptimizationAlgorithm";
inline constexpr std::string_view BenchmarkProblem = "BenchmarkProblem";
inline constexpr std::string_view PerformanceRun = "PerformanceRun";
inline constexpr std::string_view EvaluationEvent = "EvaluationEvent";
inline constexpr std::string_view Study = "Study";

inline constexpr std::string_view functionId = "functionId";
inline constexpr std::string_view executedBy = "executedBy";
inline constexpr std::string_view onProblem = "onProblem";
inline constexpr std::string_view instanceNumber = "instanceNumber";
inline constexpr std::string_view problemDimension = "problemDimension";
inline constexpr std::string_view foptValue = "foptValue";
inline constexpr std::string_view partOfStudy = "partOfStudy";
inline constexpr std::string_view hasEvent = "hasEvent";
inline constexpr std::string_view evaluations = "evaluations";
inline constexpr std::string_view fitnessDelta = "fitnessDelta";
inline constexpr std::string_view bestFitnessDelta = "bestFitnessDelta";
inline constexpr std::string_view doi = "doi";
inline constexpr std::string_view title = "title";
inline constexpr std::string_view author = "author";
inline constexpr std::string_view year = "year";
}  // namespace term

inline std::string option_iri(std::string_view local) {
  std::string iri(kOptionNs);
  iri += local;
  return iri;
}

inline std::string rdf_type_iri() { return std::string(kRdfNs) + "type"; }
inline std::string rdfs_label_iri() { return std::string(kRdfsNs) + "label"; }

// Classes first, then properties; alphabetical within kind. Stable across runs.
inline const std::vector<VocabTerm>& vocabulary_terms() {
  static const std::vector<VocabTerm> terms = [] {
    struct Entry {
      std::string_view local;
      TermKind kind;
      std::string_view label;
    };
    std::vector<Entry> entries = {
        {term::OptimizationAlgorithm, TermKind::Class, "optimization algorithm"},
        {term::BenchmarkProblem, TermKind::Class, "benchmark problem"},
        {term::PerformanceRun, TermKind::Class, "performance run"},
        {term::EvaluationEvent, TermKind::Class, "evaluation event"},
        {term::Study, TermKind::Class, "study"},
        {term::functionId, TermKind::Property, "function id"},
        {term::executedBy, TermKind::Property, "executed by"},
        {term::onProblem, TermKind::Property, "on problem"},
        {term::instanceNumber, TermKind::Property, "instance number"},
        {term::problemDimension, TermKind::Property, "problem dimension"},
        {term::foptValue, TermKind::Property, "fopt value"},
        {term::partOfStudy, TermKind::Property, "part of study"},
        {term::hasEvent, TermKind::Property, "has event"},
        {term::evaluations, TermKind::Property, "evaluations"},
        {term::fitnessDelta, TermKind::Property, "fitness delta"},
        {term::bestFitnessDelta, TermKind::Property, "best fitness delta"},
        {term::doi, TermKind::Property, "DOI"},
        {term::title, TermKind::Property, "title"},
        {term::author, TermKind::Property, "author"},
        {term::year, TermKind::Property, "publication year"},
    };
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.kind != b.kind) return a.kind == TermKind::Class;
      return a.local < b.local;
    });
    std::vector<VocabTerm> out;
    out.reserve(entries.size());
    for (const auto& e : entries)
      out.push_back({"option:" + std::string(e.local), option_iri(e.local), e.kind, std::string(e.label)});
    return out;
  }();
  return terms;
}

}  // namespace optionkb::vocab
