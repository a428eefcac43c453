#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "devmine/errors.hpp"
#include "devmine/log.hpp"

namespace devmine {

/// The seven feature families.
enum class PatternKind { ia, tr, tra, mr, mra, ip, set };

inline const char* to_string(PatternKind k) {
  switch (k) {
    case PatternKind::ia: return "IA";
    case PatternKind::tr: return "TR";
    case PatternKind::tra: return "TRA";
    case PatternKind::mr: return "MR";
    case PatternKind::mra: return "MRA";
    case PatternKind::ip: return "IP";
    case PatternKind::set: return "SET";
  }
  return "?";
}

inline PatternKind pattern_kind_from_string(const std::string& s) {
  if (s == "IA") return PatternKind::ia;
  if (s == "TR") return PatternKind::tr;
  if (s == "TRA") return PatternKind::tra;
  if (s == "MR") return PatternKind::mr;
  if (s == "MRA") return PatternKind::mra;
  if (s == "IP") return PatternKind::ip;
  if (s == "SET") return PatternKind::set;
  throw ConfigError("unknown feature kind: \"" + s + "\"");
}

/// Ordered activity sequence. IA holds exactly one symbol; TR/MR match
/// contiguously, IP matches with gaps.
struct SequencePattern {
  PatternKind kind = PatternKind::ia;
  std::vector<ActivityId> symbols;

  friend bool operator==(const SequencePattern&, const SequencePattern&) = default;
};

/// Equivalence class of TR/MR sequences sharing one symbol set.
struct AlphabetPattern {
  PatternKind kind = PatternKind::tra;
  std::vector<ActivityId> alphabet;               // sorted, distinct
  std::vector<std::vector<ActivityId>> members;   // the grouped sequences

  friend bool operator==(const AlphabetPattern&, const AlphabetPattern&) = default;
};

/// Unordered activity set (market-basket view of a trace).
struct ItemsetPattern {
  std::vector<ActivityId> items;  // sorted, distinct

  friend bool operator==(const ItemsetPattern&, const ItemsetPattern&) = default;
};

struct Feature {
  int id = 0;
  PatternKind kind = PatternKind::ia;
  std::variant<SequencePattern, AlphabetPattern, ItemsetPattern> pattern;
  double trace_support = 0.0;
};

namespace detail {

/// All (possibly overlapping) start positions of needle in hay.
inline std::size_t count_contiguous(std::span<const ActivityId> hay,
                                    std::span<const ActivityId> needle) {
  if (needle.empty() || hay.size() < needle.size()) return 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i)))
      ++count;
  }
  return count;
}

inline bool contains_contiguous(std::span<const ActivityId> hay,
                                std::span<const ActivityId> needle) {
  if (needle.empty() || hay.size() < needle.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

inline bool is_subsequence(std::span<const ActivityId> pattern,
                           std::span<const ActivityId> trace) {
  std::size_t p = 0;
  for (std::size_t i = 0; i < trace.size() && p < pattern.size(); ++i)
    if (trace[i] == pattern[p]) ++p;
  return p == pattern.size();
}

/// Number of leftmost non-overlapping gap-allowed embeddings.
inline std::size_t count_embeddings(std::span<const ActivityId> trace,
                                    std::span<const ActivityId> pattern) {
  if (pattern.empty()) return 0;
  std::size_t count = 0;
  std::size_t p = 0;
  for (ActivityId symbol : trace) {
    if (symbol == pattern[p]) {
      if (++p == pattern.size()) {
        ++count;
        p = 0;
      }
    }
  }
  return count;
}

inline std::size_t count_symbol(std::span<const ActivityId> trace, ActivityId symbol) {
  return static_cast<std::size_t>(std::count(trace.begin(), trace.end(), symbol));
}

}  // namespace detail

/// Frequency count of a feature in one trace: IA counts the activity, TR/MR
/// count contiguous occurrences, TRA/MRA sum contiguous occurrences over all
/// members, IP counts leftmost non-overlapping embeddings, SET takes the
/// minimum of its items' occurrence counts.
inline std::size_t feature_count(const Feature& feature, std::span<const ActivityId> trace) {
  switch (feature.kind) {
    case PatternKind::ia: {
      const auto& p = std::get<SequencePattern>(feature.pattern);
      return detail::count_symbol(trace, p.symbols.front());
    }
    case PatternKind::tr:
    case PatternKind::mr: {
      const auto& p = std::get<SequencePattern>(feature.pattern);
      return detail::count_contiguous(trace, p.symbols);
    }
    case PatternKind::tra:
    case PatternKind::mra: {
      const auto& p = std::get<AlphabetPattern>(feature.pattern);
      std::size_t total = 0;
      for (const auto& member : p.members) total += detail::count_contiguous(trace, member);
      return total;
    }
    case PatternKind::ip: {
      const auto& p = std::get<SequencePattern>(feature.pattern);
      return detail::count_embeddings(trace, p.symbols);
    }
    case PatternKind::set: {
      const auto& p = std::get<ItemsetPattern>(feature.pattern);
      std::size_t min_count = static_cast<std::size_t>(-1);
      for (ActivityId item : p.items) min_count = std::min(min_count, detail::count_symbol(trace, item));
      return p.items.empty() ? 0 : min_count;
    }
  }
  return 0;
}

inline std::size_t feature_count(const Feature& feature, const Trace& trace) {
  std::vector<ActivityId> seq = trace.activities();
  return feature_count(feature, std::span<const ActivityId>(seq));
}

/// Per-trace activity sequences, computed once for the mining and counting
/// passes.
inline std::vector<std::vector<ActivityId>> encode(const EventLog& log) {
  std::vector<std::vector<ActivityId>> out;
  out.reserve(log.traces.size());
  for (const Trace& t : log.traces) out.push_back(t.activities());
  return out;
}

/// Human-readable rendering used by reports: sequences are space-joined
/// names, alphabet classes and itemsets are brace-wrapped.
inline std::string pattern_to_string(const Feature& feature, const ActivityDictionary& dict) {
  auto join = [&](const std::vector<ActivityId>& ids, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i) out += sep;
      out += dict.name_of(ids[i]);
    }
    return out;
  };
  switch (feature.kind) {
    case PatternKind::ia:
    case PatternKind::tr:
    case PatternKind::mr:
    case PatternKind::ip:
      return join(std::get<SequencePattern>(feature.pattern).symbols, " ");
    case PatternKind::tra:
    case PatternKind::mra:
      return "{" + join(std::get<AlphabetPattern>(feature.pattern).alphabet, " ") + "}";
    case PatternKind::set:
      return "{" + join(std::get<ItemsetPattern>(feature.pattern).items, " ") + "}";
  }
  return {};
}

}  // namespace devmine
