#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <span>
#include <vector>

#include "devmine/errors.hpp"
#include "devmine/log.hpp"
#include "devmine/pattern.hpp"

namespace devmine {

struct MiningConfig {
  double min_support = 0.25;  // fraction of traces a feature must cover
  int ip_max_len = 15;        // bound on iterative-pattern length
};

namespace detail {

/// Smallest occurrence count whose support fraction reaches minsup.
inline std::size_t min_support_count(double minsup, std::size_t n_traces) {
  double c = std::ceil(minsup * static_cast<double>(n_traces) - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(c));
}

inline std::size_t containment_count(const std::vector<std::vector<ActivityId>>& traces,
                                     std::span<const ActivityId> word) {
  std::size_t n = 0;
  for (const auto& t : traces)
    if (contains_contiguous(t, word)) ++n;
  return n;
}

inline bool lex_less(const std::vector<ActivityId>& a, const std::vector<ActivityId>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

/// w is primitive iff it is not a whole-number power of a shorter word.
inline bool is_primitive(std::span<const ActivityId> w) {
  const std::size_t n = w.size();
  for (std::size_t d = 1; d * 2 <= n; ++d) {
    if (n % d != 0) continue;
    bool power = true;
    for (std::size_t i = d; i < n && power; ++i)
      if (w[i] != w[i - d]) power = false;
    if (power) return false;
  }
  return true;
}

// ---- suffix array machinery (int alphabet, doubling construction) ----

inline std::vector<std::int32_t> suffix_array(const std::vector<std::int32_t>& text) {
  const std::int32_t n = static_cast<std::int32_t>(text.size());
  std::vector<std::int32_t> sa(n), rank(n), next_rank(n);
  std::iota(sa.begin(), sa.end(), 0);
  for (std::int32_t i = 0; i < n; ++i) rank[i] = text[i];

  for (std::int32_t k = 1;; k *= 2) {
    auto key = [&](std::int32_t i) {
      return std::pair<std::int32_t, std::int32_t>(rank[i], i + k < n ? rank[i + k] : -1);
    };
    std::sort(sa.begin(), sa.end(),
              [&](std::int32_t a, std::int32_t b) { return key(a) < key(b); });
    next_rank[sa[0]] = 0;
    for (std::int32_t i = 1; i < n; ++i)
      next_rank[sa[i]] = next_rank[sa[i - 1]] + (key(sa[i - 1]) < key(sa[i]) ? 1 : 0);
    rank = next_rank;
    if (n == 0 || rank[sa[n - 1]] == n - 1) break;
  }
  return sa;
}

/// Kasai: lcp[r] = longest common prefix of suffixes sa[r-1] and sa[r].
inline std::vector<std::int32_t> lcp_array(const std::vector<std::int32_t>& text,
                                           const std::vector<std::int32_t>& sa) {
  const std::int32_t n = static_cast<std::int32_t>(text.size());
  std::vector<std::int32_t> inv(n), lcp(n, 0);
  for (std::int32_t r = 0; r < n; ++r) inv[sa[r]] = r;
  std::int32_t h = 0;
  for (std::int32_t i = 0; i < n; ++i) {
    if (inv[i] == 0) {
      h = 0;
      continue;
    }
    std::int32_t j = sa[inv[i] - 1];
    while (i + h < n && j + h < n && text[i + h] == text[j + h]) ++h;
    lcp[inv[i]] = h;
    if (h > 0) --h;
  }
  return lcp;
}

/// Enumerates maximal repeats of `text`: right-maximality comes from
/// branching lcp-intervals, left-diversity from the preceding characters of
/// the interval's suffixes (position 0 counts as a unique context).
inline std::vector<std::vector<std::int32_t>> maximal_repeat_words(
    const std::vector<std::int32_t>& text) {
  const std::int32_t n = static_cast<std::int32_t>(text.size());
  std::vector<std::vector<std::int32_t>> words;
  if (n < 2) return words;
  std::vector<std::int32_t> sa = suffix_array(text);
  std::vector<std::int32_t> lcp = lcp_array(text, sa);

  auto left_diverse = [&](std::int32_t lb, std::int32_t rb) {
    std::int32_t first = sa[lb] > 0 ? text[sa[lb] - 1] : -1;
    if (first == -1) return true;  // position 0 precedes nothing
    for (std::int32_t k = lb + 1; k <= rb; ++k) {
      std::int32_t pre = sa[k] > 0 ? text[sa[k] - 1] : -1;
      if (pre != first) return true;
    }
    return false;
  };

  struct Entry {
    std::int32_t lcp;
    std::int32_t lb;
  };
  std::vector<Entry> stack{{0, 0}};
  for (std::int32_t i = 1; i <= n; ++i) {
    std::int32_t cur = i < n ? lcp[i] : 0;
    std::int32_t lb = i - 1;
    while (stack.back().lcp > cur) {
      Entry top = stack.back();
      stack.pop_back();
      if (top.lcp > 0 && left_diverse(top.lb, i - 1)) {
        words.emplace_back(text.begin() + sa[top.lb], text.begin() + sa[top.lb] + top.lcp);
      }
      lb = top.lb;
    }
    if (stack.back().lcp < cur) stack.push_back({cur, lb});
  }
  return words;
}

}  // namespace detail

/// One feature per activity covering at least min_support of the traces.
inline std::vector<Feature> mine_individual_activities(const EventLog& log,
                                                       const MiningConfig& config = {}) {
  const auto traces = encode(log);
  const std::size_t min_count = detail::min_support_count(config.min_support, traces.size());
  std::map<ActivityId, std::size_t> covered;
  for (const auto& t : traces) {
    std::set<ActivityId> distinct(t.begin(), t.end());
    for (ActivityId a : distinct) ++covered[a];
  }
  std::vector<Feature> out;
  for (const auto& [activity, count] : covered) {
    if (count < min_count) continue;
    Feature f;
    f.id = static_cast<int>(out.size());
    f.kind = PatternKind::ia;
    f.pattern = SequencePattern{PatternKind::ia, {activity}};
    f.trace_support = static_cast<double>(count) / static_cast<double>(traces.size());
    out.push_back(std::move(f));
  }
  return out;
}

/// Primitive tandem-repeat words: w such that w^k (k >= 2) occurs as a
/// maximal periodic run in some trace. Only the run's leftmost rotation is
/// reported, so [a,b,a,b,a,b,c] yields "ab" and not "ba". Deduplicated
/// across the log; support is plain contiguous containment.
inline std::vector<Feature> mine_tandem_repeats(const EventLog& log,
                                                const MiningConfig& config = {}) {
  const auto traces = encode(log);
  std::set<std::vector<ActivityId>> words;
  for (const auto& s : traces) {
    const std::size_t n = s.size();
    std::vector<std::size_t> match(n + 1, 0);
    for (std::size_t p = 1; p * 2 <= n; ++p) {
      // match[i] = length of the common prefix of s[i..] and s[i+p..]
      std::fill(match.begin(), match.end(), 0);
      for (std::size_t i = n - p; i-- > 0;)
        match[i] = s[i] == s[i + p] ? match[i + 1] + 1 : 0;
      for (std::size_t i = 0; i + 2 * p <= n; ++i) {
        if (match[i] < p) continue;                       // no w^2 at i
        if (i > 0 && s[i - 1] == s[i + p - 1]) continue;  // run extends left
        std::vector<ActivityId> w(s.begin() + static_cast<std::ptrdiff_t>(i),
                                  s.begin() + static_cast<std::ptrdiff_t>(i + p));
        if (detail::is_primitive(w)) words.insert(std::move(w));
      }
    }
  }

  const std::size_t min_count = detail::min_support_count(config.min_support, traces.size());
  std::vector<std::vector<ActivityId>> kept(words.begin(), words.end());
  std::sort(kept.begin(), kept.end(), detail::lex_less);
  std::vector<Feature> out;
  for (auto& w : kept) {
    std::size_t count = detail::containment_count(traces, w);
    if (count < min_count) continue;
    Feature f;
    f.id = static_cast<int>(out.size());
    f.kind = PatternKind::tr;
    f.pattern = SequencePattern{PatternKind::tr, std::move(w)};
    f.trace_support = static_cast<double>(count) / static_cast<double>(traces.size());
    out.push_back(std::move(f));
  }
  return out;
}

/// Maximal repeats of the whole log: traces are concatenated with a distinct
/// sentinel after each one, so trace boundaries count as diverse contexts
/// and repeats never span two traces.
inline std::vector<Feature> mine_maximal_repeats(const EventLog& log,
                                                 const MiningConfig& config = {}) {
  const auto traces = encode(log);
  const std::int32_t sentinel_base = static_cast<std::int32_t>(log.dictionary.size());
  std::vector<std::int32_t> text;
  std::size_t total = 0;
  for (const auto& t : traces) total += t.size() + 1;
  text.reserve(total);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    text.insert(text.end(), traces[i].begin(), traces[i].end());
    text.push_back(sentinel_base + static_cast<std::int32_t>(i));
  }

  std::vector<std::vector<std::int32_t>> repeat_words = detail::maximal_repeat_words(text);
  std::set<std::vector<ActivityId>> words(repeat_words.begin(), repeat_words.end());

  const std::size_t min_count = detail::min_support_count(config.min_support, traces.size());
  std::vector<std::vector<ActivityId>> kept(words.begin(), words.end());
  std::sort(kept.begin(), kept.end(), detail::lex_less);
  std::vector<Feature> out;
  for (auto& w : kept) {
    std::size_t count = detail::containment_count(traces, w);
    if (count < min_count) continue;
    Feature f;
    f.id = static_cast<int>(out.size());
    f.kind = PatternKind::mr;
    f.pattern = SequencePattern{PatternKind::mr, std::move(w)};
    f.trace_support = static_cast<double>(count) / static_cast<double>(traces.size());
    out.push_back(std::move(f));
  }
  return out;
}

/// Partitions TR (or MR) features into alphabet classes by symbol set.
/// A class's support counts traces containing at least one member.
inline std::vector<Feature> alphabet_classes(const std::vector<Feature>& features,
                                             PatternKind kind, const EventLog& log,
                                             const MiningConfig& config = {}) {
  if (kind != PatternKind::tra && kind != PatternKind::mra)
    throw InvalidArgumentError("alphabet classes must be TRA or MRA");
  const PatternKind member_kind = kind == PatternKind::tra ? PatternKind::tr : PatternKind::mr;
  std::map<std::vector<ActivityId>, std::vector<std::vector<ActivityId>>> groups;
  for (const Feature& f : features) {
    if (f.kind != member_kind)
      throw InvalidArgumentError("mixed feature kinds in alphabet grouping");
    const auto& seq = std::get<SequencePattern>(f.pattern).symbols;
    std::set<ActivityId> distinct(seq.begin(), seq.end());
    groups[std::vector<ActivityId>(distinct.begin(), distinct.end())].push_back(seq);
  }

  const auto traces = encode(log);
  const std::size_t min_count = detail::min_support_count(config.min_support, traces.size());
  std::vector<Feature> out;
  for (auto& [alphabet, members] : groups) {
    std::sort(members.begin(), members.end(), detail::lex_less);
    std::size_t count = 0;
    for (const auto& t : traces) {
      for (const auto& m : members) {
        if (detail::contains_contiguous(t, m)) {
          ++count;
          break;
        }
      }
    }
    if (count < min_count) continue;
    Feature f;
    f.id = static_cast<int>(out.size());
    f.kind = kind;
    f.pattern = AlphabetPattern{kind, alphabet, members};
    f.trace_support = static_cast<double>(count) / static_cast<double>(traces.size());
    out.push_back(std::move(f));
  }
  return out;
}

/// All gap-allowed subsequences up to ip_max_len with trace support at least
/// min_support, found by prefix extension over pseudo-projections (support
/// is anti-monotone, so unsupported prefixes prune their extensions).
inline std::vector<Feature> mine_iterative_patterns(const EventLog& log,
                                                    const MiningConfig& config = {}) {
  if (config.ip_max_len < 1) throw InvalidArgumentError("ip_max_len must be >= 1");
  const auto traces = encode(log);
  const std::size_t min_count = detail::min_support_count(config.min_support, traces.size());
  const std::size_t n_activities = log.dictionary.size();

  // projection: for each supporting trace, the scan position after the
  // leftmost embedding of the current prefix
  struct Pointer {
    std::size_t trace;
    std::size_t pos;
  };
  std::vector<std::vector<ActivityId>> mined;
  std::vector<ActivityId> prefix;

  auto dfs = [&](auto&& self, const std::vector<Pointer>& projection) -> void {
    if (prefix.size() >= static_cast<std::size_t>(config.ip_max_len)) return;
    for (std::size_t a = 0; a < n_activities; ++a) {
      const ActivityId symbol = static_cast<ActivityId>(a);
      std::vector<Pointer> next;
      for (const Pointer& p : projection) {
        const auto& t = traces[p.trace];
        for (std::size_t i = p.pos; i < t.size(); ++i) {
          if (t[i] == symbol) {
            next.push_back({p.trace, i + 1});
            break;
          }
        }
      }
      if (next.size() < min_count) continue;
      prefix.push_back(symbol);
      mined.push_back(prefix);
      self(self, next);
      prefix.pop_back();
    }
  };

  std::vector<Pointer> root;
  for (std::size_t t = 0; t < traces.size(); ++t) root.push_back({t, 0});
  dfs(dfs, root);

  std::sort(mined.begin(), mined.end(), detail::lex_less);
  std::vector<Feature> out;
  for (auto& w : mined) {
    std::size_t count = 0;
    for (const auto& t : traces)
      if (detail::is_subsequence(w, t)) ++count;
    Feature f;
    f.id = static_cast<int>(out.size());
    f.kind = PatternKind::ip;
    f.pattern = SequencePattern{PatternKind::ip, std::move(w)};
    f.trace_support = static_cast<double>(count) / static_cast<double>(traces.size());
    out.push_back(std::move(f));
  }
  return out;
}

namespace detail {

struct FpNode {
  ActivityId item = -1;
  std::size_t count = 0;
  FpNode* parent = nullptr;
  std::map<ActivityId, std::unique_ptr<FpNode>> children;
};

struct FpTree {
  FpNode root;
  std::map<ActivityId, std::vector<FpNode*>> item_nodes;

  void insert(const std::vector<ActivityId>& items, std::size_t count) {
    FpNode* node = &root;
    for (ActivityId item : items) {
      auto it = node->children.find(item);
      if (it == node->children.end()) {
        auto child = std::make_unique<FpNode>();
        child->item = item;
        child->parent = node;
        it = node->children.emplace(item, std::move(child)).first;
        item_nodes[item].push_back(it->second.get());
      }
      it->second->count += count;
      node = it->second.get();
    }
  }
};

/// Recursive FP-Growth over conditional pattern bases.
inline void fp_growth(const std::vector<std::pair<std::vector<ActivityId>, std::size_t>>& base,
                      std::size_t min_count, const std::vector<ActivityId>& suffix,
                      std::vector<std::pair<std::vector<ActivityId>, std::size_t>>& out) {
  std::map<ActivityId, std::size_t> item_counts;
  for (const auto& [items, count] : base)
    for (ActivityId item : items) item_counts[item] += count;

  std::vector<ActivityId> frequent;
  for (const auto& [item, count] : item_counts)
    if (count >= min_count) frequent.push_back(item);
  if (frequent.empty()) return;

  // order by (count desc, id asc) for compact, deterministic trees
  std::sort(frequent.begin(), frequent.end(), [&](ActivityId a, ActivityId b) {
    if (item_counts[a] != item_counts[b]) return item_counts[a] > item_counts[b];
    return a < b;
  });
  std::map<ActivityId, std::size_t> order;
  for (std::size_t i = 0; i < frequent.size(); ++i) order[frequent[i]] = i;

  FpTree tree;
  for (const auto& [items, count] : base) {
    std::vector<ActivityId> filtered;
    for (ActivityId item : items)
      if (order.count(item)) filtered.push_back(item);
    std::sort(filtered.begin(), filtered.end(),
              [&](ActivityId a, ActivityId b) { return order[a] < order[b]; });
    if (!filtered.empty()) tree.insert(filtered, count);
  }

  for (auto it = frequent.rbegin(); it != frequent.rend(); ++it) {
    const ActivityId item = *it;
    std::vector<ActivityId> itemset = suffix;
    itemset.push_back(item);

    std::vector<std::pair<std::vector<ActivityId>, std::size_t>> conditional;
    std::size_t support = 0;
    for (FpNode* node : tree.item_nodes[item]) {
      support += node->count;
      std::vector<ActivityId> path;
      for (FpNode* p = node->parent; p && p->item != -1; p = p->parent) path.push_back(p->item);
      std::reverse(path.begin(), path.end());
      if (!path.empty()) conditional.emplace_back(std::move(path), node->count);
    }
    out.emplace_back(itemset, support);
    fp_growth(conditional, min_count, itemset, out);
  }
}

}  // namespace detail

/// FP-Growth over traces reduced to their distinct activity sets.
inline std::vector<Feature> mine_itemsets(const EventLog& log, const MiningConfig& config = {}) {
  if (!(config.min_support > 0.0) || config.min_support > 1.0)
    throw InvalidArgumentError("min_support must be in (0, 1]");
  const auto traces = encode(log);
  const std::size_t min_count = detail::min_support_count(config.min_support, traces.size());

  std::vector<std::pair<std::vector<ActivityId>, std::size_t>> transactions;
  for (const auto& t : traces) {
    std::set<ActivityId> distinct(t.begin(), t.end());
    transactions.emplace_back(std::vector<ActivityId>(distinct.begin(), distinct.end()), 1);
  }

  std::vector<std::pair<std::vector<ActivityId>, std::size_t>> mined;
  detail::fp_growth(transactions, min_count, {}, mined);

  for (auto& [items, count] : mined) std::sort(items.begin(), items.end());
  std::sort(mined.begin(), mined.end(), [](const auto& a, const auto& b) {
    return detail::lex_less(a.first, b.first);
  });

  std::vector<Feature> out;
  for (auto& [items, count] : mined) {
    Feature f;
    f.id = static_cast<int>(out.size());
    f.kind = PatternKind::set;
    f.pattern = ItemsetPattern{std::move(items)};
    f.trace_support = static_cast<double>(count) / static_cast<double>(traces.size());
    out.push_back(std::move(f));
  }
  return out;
}

/// Single entry point used by the pipeline; alphabet kinds mine their base
/// repeats first.
inline std::vector<Feature> mine_features(const EventLog& log, PatternKind kind,
                                          const MiningConfig& config = {}) {
  switch (kind) {
    case PatternKind::ia: return mine_individual_activities(log, config);
    case PatternKind::tr: return mine_tandem_repeats(log, config);
    case PatternKind::mr: return mine_maximal_repeats(log, config);
    case PatternKind::tra:
      return alphabet_classes(mine_tandem_repeats(log, config), PatternKind::tra, log, config);
    case PatternKind::mra:
      return alphabet_classes(mine_maximal_repeats(log, config), PatternKind::mra, log, config);
    case PatternKind::ip: return mine_iterative_patterns(log, config);
    case PatternKind::set: return mine_itemsets(log, config);
  }
  throw InvalidArgumentError("unknown feature kind");
}

}  // namespace devmine
