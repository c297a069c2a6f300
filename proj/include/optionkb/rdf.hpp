#pragma once

// Term/quad model, dictionary encoding and the canonical N-Quads subset codec.

#include <cctype>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "optionkb/vocab.hpp"

namespace optionkb::rdf {

namespace xsd {
inline const std::string& string_iri() {
  static const std::string s = std::string(vocab::kXsdNs) + "string";
  return s;
}
inline const std::string& integer_iri() {
  static const std::string s = std::string(vocab::kXsdNs) + "integer";
  return s;
}
inline const std::string& double_iri() {
  static const std::string s = std::string(vocab::kXsdNs) + "double";
  return s;
}
inline const std::string& gyear_iri() {
  static const std::string s = std::string(vocab::kXsdNs) + "gYear";
  return s;
}
}  // namespace xsd

class TermError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw TermError("cannot format double");
  return std::string(buf, ptr);
}

inline std::optional<std::int64_t> parse_int64(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

// Accepts fixed and scientific notation; rejects non-finite values.
inline std::optional<double> parse_finite_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

struct Iri {
  std::string value;
  auto operator<=>(const Iri&) const = default;
};

struct Literal {
  std::string lexical;
  std::string datatype;
  auto operator<=>(const Literal&) const = default;
};

struct Blank {
  std::string label;
  auto operator<=>(const Blank&) const = default;
};

inline bool is_valid_iri(std::string_view v) {
  if (v.empty()) return false;
  for (char c : v) {
    if (c == '<' || c == '>' || c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v')
      return false;
  }
  return true;
}

inline bool is_valid_blank_label(std::string_view v) {
  auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (v.empty() || !alpha(v.front())) return false;
  for (char c : v.substr(1))
    if (!alpha(c) && !digit(c)) return false;
  return true;
}

inline bool is_supported_datatype(std::string_view dt) {
  return dt == xsd::string_iri() || dt == xsd::integer_iri() || dt == xsd::double_iri() || dt == xsd::gyear_iri();
}

// gYear lexical: optional '-', at least four digits.
inline bool is_valid_gyear(std::string_view v) {
  if (!v.empty() && v.front() == '-') v.remove_prefix(1);
  if (v.size() < 4) return false;
  for (char c : v)
    if (c < '0' || c > '9') return false;
  return true;
}

// An IRI, typed literal or blank node. Numeric literal lexicals are stored in
// canonical form, so equal values compare equal regardless of input spelling.
class Term {
 public:
  enum class Kind { Iri, Literal, Blank };

  Term() : value_(rdf::Iri{"urn:option:undefined"}) {}

  static Term iri(std::string value) {
    if (!is_valid_iri(value)) throw TermError("invalid IRI '" + value + "'");
    return Term(rdf::Iri{std::move(value)});
  }

  static Term blank(std::string label) {
    if (!is_valid_blank_label(label)) throw TermError("invalid blank node label '" + label + "'");
    return Term(rdf::Blank{std::move(label)});
  }

  static Term literal(std::string lexical, std::string datatype) {
    if (!is_supported_datatype(datatype)) throw TermError("unsupported datatype <" + datatype + ">");
    if (datatype == xsd::integer_iri()) {
      auto v = parse_int64(lexical);
      if (!v) throw TermError("invalid xsd:integer lexical '" + lexical + "'");
      lexical = std::to_string(*v);
    } else if (datatype == xsd::double_iri()) {
      auto v = parse_finite_double(lexical);
      if (!v) throw TermError("invalid xsd:double lexical '" + lexical + "'");
      lexical = format_double(*v);
    } else if (datatype == xsd::gyear_iri()) {
      if (!is_valid_gyear(lexical)) throw TermError("invalid xsd:gYear lexical '" + lexical + "'");
    }
    return Term(rdf::Literal{std::move(lexical), std::move(datatype)});
  }

  static Term string(std::string s) { return Term(rdf::Literal{std::move(s), xsd::string_iri()}); }
  static Term integer(std::int64_t v) { return Term(rdf::Literal{std::to_string(v), xsd::integer_iri()}); }
  static Term real(double v) {
    if (!std::isfinite(v)) throw TermError("non-finite xsd:double");
    return Term(rdf::Literal{format_double(v), xsd::double_iri()});
  }
  static Term gyear(int year) {
    std::string lex = std::to_string(year < 0 ? -year : year);
    if (lex.size() < 4) lex.insert(0, 4 - lex.size(), '0');
    if (year < 0) lex.insert(0, 1, '-');
    return Term(rdf::Literal{std::move(lex), xsd::gyear_iri()});
  }

  Kind kind() const noexcept { return static_cast<Kind>(value_.index()); }
  bool is_iri() const noexcept { return kind() == Kind::Iri; }
  bool is_literal() const noexcept { return kind() == Kind::Literal; }
  bool is_blank() const noexcept { return kind() == Kind::Blank; }

  // IRI value, literal lexical form or blank label.
  const std::string& value() const noexcept {
    return std::visit(
        [](const auto& v) -> const std::string& {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, rdf::Iri>) return v.value;
          else if constexpr (std::is_same_v<T, rdf::Literal>) return v.lexical;
          else return v.label;
        },
        value_);
  }

  const std::string& datatype() const {
    if (!is_literal()) throw TermError("datatype() on non-literal term");
    return std::get<rdf::Literal>(value_).datatype;
  }

  std::optional<std::int64_t> as_integer() const {
    if (!is_literal() || datatype() != xsd::integer_iri()) return std::nullopt;
    return parse_int64(value());
  }

  // Numeric value of an integer or double literal.
  std::optional<double> as_number() const {
    if (!is_literal()) return std::nullopt;
    const auto& dt = datatype();
    if (dt == xsd::double_iri()) return parse_finite_double(value());
    if (dt == xsd::integer_iri()) {
      if (auto i = parse_int64(value())) return static_cast<double>(*i);
    }
    return std::nullopt;
  }

  std::optional<std::string> as_string() const {
    if (!is_literal() || datatype() != xsd::string_iri()) return std::nullopt;
    return value();
  }

  auto operator<=>(const Term&) const = default;
  bool operator==(const Term&) const = default;

  std::size_t hash() const noexcept {
    std::size_t h = std::hash<std::string>{}(value());
    h ^= std::hash<std::size_t>{}(value_.index()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    if (is_literal()) h ^= std::hash<std::string>{}(std::get<rdf::Literal>(value_).datatype) + (h << 6) + (h >> 2);
    return h;
  }

 private:
  explicit Term(std::variant<rdf::Iri, rdf::Literal, rdf::Blank> v) : value_(std::move(v)) {}

  std::variant<rdf::Iri, rdf::Literal, rdf::Blank> value_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept { return t.hash(); }
};

struct Quad {
  Term graph;
  Term subject;
  Term predicate;
  Term object;

  auto operator<=>(const Quad&) const = default;
  bool operator==(const Quad&) const = default;
};

inline bool is_valid_quad(const Quad& q) {
  return q.graph.is_iri() && (q.subject.is_iri() || q.subject.is_blank()) && q.predicate.is_iri();
}

inline Quad make_quad(Term graph, Term subject, Term predicate, Term object) {
  Quad q{std::move(graph), std::move(subject), std::move(predicate), std::move(object)};
  if (!is_valid_quad(q)) throw TermError("quad violates position rules");
  return q;
}

using TermId = std::uint64_t;

class UnknownIdError : public std::out_of_range {
 public:
  explicit UnknownIdError(TermId id) : std::out_of_range("unknown term id " + std::to_string(id)), id_(id) {}
  TermId id() const noexcept { return id_; }

 private:
  TermId id_;
};

// Bijective Term <-> id map. Ids are dense, assigned in first-seen order from 1.
// Decoded references stay valid for the dictionary's lifetime.
class Dictionary {
 public:
  TermId encode(const Term& t) {
    if (auto it = ids_.find(t); it != ids_.end()) return it->second;
    terms_.push_back(t);
    TermId id = terms_.size();
    ids_.emplace(t, id);
    return id;
  }

  std::optional<TermId> lookup(const Term& t) const {
    auto it = ids_.find(t);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const Term& decode(TermId id) const {
    if (id == 0 || id > terms_.size()) throw UnknownIdError(id);
    return terms_[id - 1];
  }

  std::size_t size() const noexcept { return terms_.size(); }

 private:
  std::deque<Term> terms_;
  std::unordered_map<Term, TermId, TermHash> ids_;
};

// ---------------------------------------------------------------------------
// N-Quads subset

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::size_t line, std::size_t column, std::string reason)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + reason),
        line_(line),
        column_(column),
        reason_(std::move(reason)) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string reason_;
};

inline void escape_lexical(std::string_view lex, std::string& out) {
  for (char c : lex) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
}

inline void write_term(const Term& t, std::string& out) {
  switch (t.kind()) {
    case Term::Kind::Iri:
      out += '<';
      out += t.value();
      out += '>';
      break;
    case Term::Kind::Blank:
      out += "_:";
      out += t.value();
      break;
    case Term::Kind::Literal:
      out += '"';
      escape_lexical(t.value(), out);
      out += "\"^^<";
      out += t.datatype();
      out += '>';
      break;
  }
}

inline std::string to_nquads_term(const Term& t) {
  std::string out;
  write_term(t, out);
  return out;
}

inline void write_quad(const Quad& q, std::string& out) {
  write_term(q.subject, out);
  out += ' ';
  write_term(q.predicate, out);
  out += ' ';
  write_term(q.object, out);
  out += ' ';
  write_term(q.graph, out);
  out += " .\n";
}

template <typename Range>
std::string serialize_nquads(const Range& quads) {
  std::string out;
  for (const Quad& q : quads) write_quad(q, out);
  return out;
}

namespace detail {

class LineCursor {
 public:
  LineCursor(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

  bool at_end() const { return pos_ >= line_.size(); }
  char peek() const { return at_end() ? '\0' : line_[pos_]; }
  std::size_t column() const { return pos_ + 1; }

  bool skip_ws() {
    std::size_t start = pos_;
    while (!at_end() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
    return pos_ > start;
  }

  [[noreturn]] void fail(std::string reason) const { throw SyntaxError(line_no_, column(), std::move(reason)); }
  [[noreturn]] void fail_at(std::size_t col, std::string reason) const {
    throw SyntaxError(line_no_, col, std::move(reason));
  }

  std::string read_iri_ref() {
    // at '<'
    std::size_t start_col = column();
    ++pos_;
    auto close = line_.find('>', pos_);
    if (close == std::string_view::npos) fail_at(start_col, "unterminated IRI");
    std::string value(line_.substr(pos_, close - pos_));
    if (!is_valid_iri(value)) fail_at(start_col, "invalid IRI");
    pos_ = close + 1;
    return value;
  }

  Term read_blank() {
    std::size_t start_col = column();
    if (line_.substr(pos_, 2) != "_:") fail("expected blank node");
    pos_ += 2;
    std::size_t start = pos_;
    while (!at_end() && std::isalnum(static_cast<unsigned char>(line_[pos_]))) ++pos_;
    std::string label(line_.substr(start, pos_ - start));
    if (!is_valid_blank_label(label)) fail_at(start_col, "invalid blank node label");
    return Term::blank(std::move(label));
  }

  Term read_literal() {
    std::size_t start_col = column();
    ++pos_;  // opening quote
    std::string lexical;
    for (;;) {
      if (at_end()) fail_at(start_col, "unterminated literal");
      char c = line_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (at_end()) fail("dangling escape");
        char e = line_[pos_++];
        switch (e) {
          case '"': lexical += '"'; break;
          case '\\': lexical += '\\'; break;
          case 'n': lexical += '\n'; break;
          case 't': lexical += '\t'; break;
          case 'r': lexical += '\r'; break;
          default: fail_at(column() - 2, std::string("unsupported escape \\") + e);
        }
      } else {
        lexical += c;
      }
    }
    if (peek() == '@') fail("language tags are not supported");
    if (line_.substr(pos_, 2) != "^^") return Term::string(std::move(lexical));
    pos_ += 2;
    if (peek() != '<') fail("expected datatype IRI");
    std::size_t dt_col = column();
    std::string datatype = read_iri_ref();
    try {
      return Term::literal(std::move(lexical), std::move(datatype));
    } catch (const TermError& e) {
      fail_at(dt_col, e.what());
    }
  }

  Term read_term(std::string_view role) {
    switch (peek()) {
      case '<': return Term::iri(read_iri_ref());
      case '_': return read_blank();
      case '"': return read_literal();
      case '.':
        fail("unexpected statement terminator, missing " + std::string(role));
      case '\0':
        fail("unexpected end of line, missing " + std::string(role));
      default:
        fail("unexpected character '" + std::string(1, peek()) + "' in " + std::string(role));
    }
  }

  void expect_separator() {
    if (!skip_ws() && !at_end() && peek() != '.') fail("expected whitespace");
  }

  void expect_terminator() {
    skip_ws();
    if (peek() != '.') fail("expected '.'");
    ++pos_;
    skip_ws();
    if (!at_end()) fail("trailing content after '.'");
  }

 private:
  std::string_view line_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Parses a single statement line; line_no is reported in errors.
inline Quad parse_nquads_line(std::string_view line, std::size_t line_no) {
  detail::LineCursor cur(line, line_no);
  cur.skip_ws();
  std::size_t subj_col = cur.column();
  Term subject = cur.read_term("subject");
  if (subject.is_literal()) cur.fail_at(subj_col, "literal in subject position");
  cur.expect_separator();
  std::size_t pred_col = cur.column();
  Term predicate = cur.read_term("predicate");
  if (!predicate.is_iri()) cur.fail_at(pred_col, "predicate must be an IRI");
  cur.expect_separator();
  Term object = cur.read_term("object");
  cur.expect_separator();
  std::size_t graph_col = cur.column();
  Term graph = cur.read_term("graph");
  if (!graph.is_iri()) cur.fail_at(graph_col, "graph must be an IRI");
  cur.expect_terminator();
  return Quad{std::move(graph), std::move(subject), std::move(predicate), std::move(object)};
}

// Invokes sink(quad) for each statement in order. The first error aborts.
template <typename Sink>
void for_each_nquad(std::string_view text, Sink&& sink) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;
    sink(parse_nquads_line(line, line_no));
  }
}

inline std::vector<Quad> parse_nquads(std::string_view text) {
  std::vector<Quad> out;
  for_each_nquad(text, [&](Quad&& q) { out.push_back(std::move(q)); });
  return out;
}

}  // namespace optionkb::rdf
