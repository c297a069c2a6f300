#pragma once

// In-memory quad store with four dictionary-encoded orderings (GSPO, SPOG,
// POSG, OSPG) and snapshot persistence as canonical N-Quads.
//
// Concurrency: any number of concurrent readers OR a single writer. The store
// itself does no locking; callers (the service) serialize writers.

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "optionkb/rdf.hpp"

namespace optionkb::store {

using rdf::Quad;
using rdf::Term;
using rdf::TermId;

// Ids in canonical position order: graph, subject, predicate, object.
using QuadIds = std::array<TermId, 4>;

enum Position : std::size_t { kGraph = 0, kSubject = 1, kPredicate = 2, kObject = 3 };

enum class IndexOrder { GSPO, SPOG, POSG, OSPG };

inline constexpr std::array<IndexOrder, 4> kAllOrders = {IndexOrder::GSPO, IndexOrder::SPOG, IndexOrder::POSG,
                                                         IndexOrder::OSPG};

// Key position i of an index holds canonical position permutation(order)[i].
inline constexpr std::array<std::size_t, 4> permutation(IndexOrder order) {
  switch (order) {
    case IndexOrder::GSPO: return {kGraph, kSubject, kPredicate, kObject};
    case IndexOrder::SPOG: return {kSubject, kPredicate, kObject, kGraph};
    case IndexOrder::POSG: return {kPredicate, kObject, kSubject, kGraph};
    case IndexOrder::OSPG: return {kObject, kSubject, kPredicate, kGraph};
  }
  return {0, 1, 2, 3};
}

inline std::string_view to_string(IndexOrder order) {
  switch (order) {
    case IndexOrder::GSPO: return "GSPO";
    case IndexOrder::SPOG: return "SPOG";
    case IndexOrder::POSG: return "POSG";
    case IndexOrder::OSPG: return "OSPG";
  }
  return "?";
}

inline QuadIds to_key(const QuadIds& ids, IndexOrder order) {
  auto perm = permutation(order);
  return {ids[perm[0]], ids[perm[1]], ids[perm[2]], ids[perm[3]]};
}

inline QuadIds from_key(const QuadIds& key, IndexOrder order) {
  auto perm = permutation(order);
  QuadIds ids{};
  for (std::size_t i = 0; i < 4; ++i) ids[perm[i]] = key[i];
  return ids;
}

// A concrete term or wildcard (nullopt) per position.
struct QuadPattern {
  std::optional<Term> graph;
  std::optional<Term> subject;
  std::optional<Term> predicate;
  std::optional<Term> object;

  const std::optional<Term>& at(std::size_t pos) const {
    switch (pos) {
      case kGraph: return graph;
      case kSubject: return subject;
      case kPredicate: return predicate;
      default: return object;
    }
  }

  bool matches(const Quad& q) const {
    return (!graph || *graph == q.graph) && (!subject || *subject == q.subject) &&
           (!predicate || *predicate == q.predicate) && (!object || *object == q.object);
  }
};

// Encoded pattern: 0 marks a wildcard.
using IdPattern = std::array<TermId, 4>;

struct BulkReport {
  std::size_t inserted = 0;
  std::size_t duplicates = 0;
};

class QuadStore {
 public:
  // Returns true iff the quad was absent.
  bool insert(const Quad& q) {
    if (!rdf::is_valid_quad(q)) throw rdf::TermError("quad violates position rules");
    QuadIds ids{dict_.encode(q.graph), dict_.encode(q.subject), dict_.encode(q.predicate), dict_.encode(q.object)};
    return insert_ids(ids);
  }

  template <typename Range>
  BulkReport bulk_insert(const Range& quads) {
    BulkReport report;
    for (const Quad& q : quads) {
      if (insert(q))
        ++report.inserted;
      else
        ++report.duplicates;
    }
    return report;
  }

  bool contains(const Quad& q) const {
    auto ids = lookup_ids(q);
    return ids && index(IndexOrder::GSPO).contains(*ids);
  }

  std::size_t count() const noexcept { return index(IndexOrder::GSPO).size(); }

  // Graph IRIs sorted lexicographically.
  std::vector<std::string> list_graphs() const {
    std::vector<std::string> out;
    out.reserve(graph_counts_.size());
    for (const auto& [gid, n] : graph_counts_) out.push_back(dict_.decode(gid).value());
    std::sort(out.begin(), out.end());
    return out;
  }

  std::size_t graph_count() const noexcept { return graph_counts_.size(); }

  std::size_t drop_graph(const std::string& graph_iri) {
    auto gid = dict_.lookup(Term::iri(graph_iri));
    if (!gid) return 0;
    auto& gspo = index(IndexOrder::GSPO);
    auto first = gspo.lower_bound({*gid, 0, 0, 0});
    auto last = gspo.lower_bound({*gid + 1, 0, 0, 0});
    std::vector<QuadIds> doomed(first, last);
    for (const auto& ids : doomed) erase_ids(ids);
    return doomed.size();
  }

  // Matching quads in ascending order of the index chosen for the bound prefix.
  std::vector<Quad> match(const QuadPattern& p) const {
    std::vector<Quad> out;
    auto ids = encode_pattern(p);
    if (!ids) return out;
    for_each_match(*ids, [&](const QuadIds& q) { out.push_back(decode(q)); });
    return out;
  }

  // Encodes a pattern; nullopt if some concrete term is unknown (nothing can match).
  std::optional<IdPattern> encode_pattern(const QuadPattern& p) const {
    IdPattern ids{};
    for (std::size_t pos = 0; pos < 4; ++pos) {
      if (const auto& t = p.at(pos)) {
        auto id = dict_.lookup(*t);
        if (!id) return std::nullopt;
        ids[pos] = *id;
      }
    }
    return ids;
  }

  // Index with the longest bound prefix for the given pattern; first in kAllOrders on ties.
  static IndexOrder choose_index(const IdPattern& pattern) {
    IndexOrder best = IndexOrder::GSPO;
    std::size_t best_len = 0;
    for (auto order : kAllOrders) {
      auto perm = permutation(order);
      std::size_t len = 0;
      while (len < 4 && pattern[perm[len]] != 0) ++len;
      if (len > best_len) {
        best_len = len;
        best = order;
      }
    }
    return best;
  }

  template <typename Fn>
  void for_each_match(const IdPattern& pattern, Fn&& fn) const {
    auto order = choose_index(pattern);
    auto perm = permutation(order);
    std::size_t prefix = 0;
    while (prefix < 4 && pattern[perm[prefix]] != 0) ++prefix;

    const auto& idx = index(order);
    QuadIds low{};
    for (std::size_t i = 0; i < prefix; ++i) low[i] = pattern[perm[i]];
    for (auto it = idx.lower_bound(low); it != idx.end(); ++it) {
      const QuadIds& key = *it;
      bool in_prefix = true;
      for (std::size_t i = 0; i < prefix; ++i) {
        if (key[i] != low[i]) {
          in_prefix = false;
          break;
        }
      }
      if (!in_prefix) break;
      bool ok = true;
      for (std::size_t i = prefix; i < 4; ++i) {
        if (pattern[perm[i]] != 0 && key[i] != pattern[perm[i]]) {
          ok = false;
          break;
        }
      }
      if (ok) fn(from_key(key, order));
    }
  }

  Quad decode(const QuadIds& ids) const {
    return Quad{dict_.decode(ids[kGraph]), dict_.decode(ids[kSubject]), dict_.decode(ids[kPredicate]),
                dict_.decode(ids[kObject])};
  }

  // Quads sorted by term order (graph, subject, predicate, object).
  std::vector<Quad> all_quads() const {
    std::vector<Quad> out;
    out.reserve(count());
    for (const auto& ids : index(IndexOrder::GSPO)) out.push_back(decode(ids));
    std::sort(out.begin(), out.end());
    return out;
  }

  // Canonical-order id tuples reconstructed from one index; used to audit index agreement.
  std::vector<QuadIds> index_contents(IndexOrder order) const {
    std::vector<QuadIds> out;
    out.reserve(index(order).size());
    for (const auto& key : index(order)) out.push_back(from_key(key, order));
    std::sort(out.begin(), out.end());
    return out;
  }

  const rdf::Dictionary& dictionary() const noexcept { return dict_; }

 private:
  std::set<QuadIds>& index(IndexOrder order) { return indexes_[static_cast<std::size_t>(order)]; }
  const std::set<QuadIds>& index(IndexOrder order) const { return indexes_[static_cast<std::size_t>(order)]; }

  std::optional<QuadIds> lookup_ids(const Quad& q) const {
    auto g = dict_.lookup(q.graph), s = dict_.lookup(q.subject), p = dict_.lookup(q.predicate),
         o = dict_.lookup(q.object);
    if (!g || !s || !p || !o) return std::nullopt;
    return QuadIds{*g, *s, *p, *o};
  }

  bool insert_ids(const QuadIds& ids) {
    if (!index(IndexOrder::GSPO).insert(ids).second) return false;
    for (auto order : kAllOrders)
      if (order != IndexOrder::GSPO) index(order).insert(to_key(ids, order));
    ++graph_counts_[ids[kGraph]];
    return true;
  }

  void erase_ids(const QuadIds& ids) {
    for (auto order : kAllOrders) index(order).erase(to_key(ids, order));
    auto it = graph_counts_.find(ids[kGraph]);
    if (it != graph_counts_.end() && --it->second == 0) graph_counts_.erase(it);
  }

  rdf::Dictionary dict_;
  std::array<std::set<QuadIds>, 4> indexes_;
  std::map<TermId, std::size_t> graph_counts_;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::filesystem::path& path, const std::string& what)
      : std::runtime_error(path.string() + ": " + what), path_(path) {}
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError(path, "read failed");
  return buf.str();
}

// Writes through a temporary sibling and renames, so a crash never leaves a torn file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp, "cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError(tmp, "write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError(path, "rename failed: " + ec.message());
}

inline void save_snapshot(const QuadStore& store, const std::filesystem::path& path) {
  write_file_atomic(path, rdf::serialize_nquads(store.all_quads()));
}

// A missing file yields an empty store. Syntax errors propagate as rdf::SyntaxError.
inline QuadStore load_snapshot(const std::filesystem::path& path) {
  QuadStore store;
  if (!std::filesystem::exists(path)) return store;
  auto text = read_file(path);
  rdf::for_each_nquad(text, [&](Quad&& q) { store.insert(q); });
  return store;
}

}  // namespace optionkb::store
