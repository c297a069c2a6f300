#pragma once

// Flag value parsers shared by the optionkb command-line tool.

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "optionkb/query.hpp"
#include "optionkb/rdf.hpp"

namespace optionkb::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitUsage = 64;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

inline std::int64_t parse_int_flag(std::string_view text, std::string_view flag) {
  auto v = rdf::parse_int64(trim(text));
  if (!v) throw UsageError(std::string(flag) + ": '" + std::string(text) + "' is not an integer");
  return *v;
}

// "1,3,5-7" (an optional 'f' prefix per item is accepted: "f1-f5").
inline std::set<std::int64_t> parse_int_list(const std::vector<std::string>& items, std::string_view flag) {
  std::set<std::int64_t> out;
  auto number = [&](std::string_view s) {
    s = trim(s);
    if (!s.empty() && (s.front() == 'f' || s.front() == 'F')) s.remove_prefix(1);
    return parse_int_flag(s, flag);
  };
  for (const auto& raw : items) {
    std::size_t pos = 0;
    std::string_view all(raw);
    while (pos <= all.size()) {
      auto comma = all.find(',', pos);
      auto item = trim(all.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
      pos = comma == std::string_view::npos ? all.size() + 1 : comma + 1;
      if (item.empty()) continue;
      auto dash = item.find('-', 1);
      if (dash == std::string_view::npos) {
        out.insert(number(item));
        continue;
      }
      auto lo = number(item.substr(0, dash));
      auto hi = number(item.substr(dash + 1));
      if (lo > hi) throw UsageError(std::string(flag) + ": empty range '" + std::string(item) + "'");
      if (hi - lo > 1'000'000) throw UsageError(std::string(flag) + ": range '" + std::string(item) + "' too large");
      for (auto v = lo; v <= hi; ++v) out.insert(v);
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": no values given");
  return out;
}

// "b" is a point budget, "lo:hi" an inclusive range.
inline query::Budget parse_budget_flag(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) return query::PointBudget{parse_int_flag(text, "--budget")};
  query::RangeBudget r{parse_int_flag(text.substr(0, colon), "--budget"),
                       parse_int_flag(text.substr(colon + 1), "--budget")};
  if (r.lo > r.hi) throw UsageError("--budget: lo must not exceed hi");
  return r;
}

inline std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& raw : items) {
    std::size_t pos = 0;
    std::string_view all(raw);
    while (pos <= all.size()) {
      auto comma = all.find(',', pos);
      auto item = trim(all.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
      pos = comma == std::string_view::npos ? all.size() + 1 : comma + 1;
      if (!item.empty()) out.emplace_back(item);
    }
  }
  return out;
}

}  // namespace optionkb::cli
