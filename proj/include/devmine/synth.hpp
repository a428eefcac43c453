#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "devmine/errors.hpp"
#include "devmine/log.hpp"
#include "devmine/pattern.hpp"
#include "devmine/random.hpp"

namespace devmine {

/// Synthetic labeled log with a pattern planted into every deviant trace.
struct SynthSpec {
  std::size_t n_traces = 100;
  int alphabet_size = 12;
  double mean_trace_length = 15.0;
  std::uint64_t seed = 1;
  std::vector<int> planted_pattern;   // symbol indices into the alphabet
  bool contiguous = true;             // plant as a block vs gap-scattered
  double deviant_fraction = 0.5;
  /// When set, each deviant trace is paired with a normal trace carrying the
  /// identical activity multiset, arranged so the pattern never occurs; this
  /// makes every individual-activity feature class-blind.
  bool activity_count_matched = false;
};

namespace detail {

/// Scatter `symbols` into `body` at random strictly-increasing slots.
inline std::vector<ActivityId> scatter(const std::vector<ActivityId>& body,
                                       const std::vector<ActivityId>& symbols, Rng& rng) {
  const std::size_t total = body.size() + symbols.size();
  std::set<std::size_t> slots;
  while (slots.size() < symbols.size()) slots.insert(rng.below(total));
  std::vector<ActivityId> out;
  out.reserve(total);
  std::size_t b = 0, s = 0;
  for (std::size_t i = 0; i < total; ++i) {
    if (slots.count(i)) out.push_back(symbols[s++]);
    else out.push_back(body[b++]);
  }
  return out;
}

inline std::vector<ActivityId> insert_block(const std::vector<ActivityId>& body,
                                            const std::vector<ActivityId>& block, Rng& rng) {
  std::vector<ActivityId> out;
  out.reserve(body.size() + block.size());
  const std::size_t at = rng.below(body.size() + 1);
  out.insert(out.end(), body.begin(), body.begin() + static_cast<std::ptrdiff_t>(at));
  out.insert(out.end(), block.begin(), block.end());
  out.insert(out.end(), body.begin() + static_cast<std::ptrdiff_t>(at), body.end());
  return out;
}

}  // namespace detail

/// Deterministic by seed (each trace pair draws from its own derived
/// stream). Deviant traces contain the planted pattern; normal traces never
/// contain it, not even as a gap-allowed subsequence, which a retry loop
/// enforces under activity-count matching.
inline EventLog generate(const SynthSpec& spec) {
  if (spec.n_traces < 2) throw InvalidArgumentError("n_traces must be >= 2");
  if (spec.alphabet_size < 1) throw InvalidArgumentError("alphabet_size must be >= 1");
  if (spec.planted_pattern.empty())
    throw InvalidArgumentError("planted_pattern must be non-empty");

  std::vector<ActivityId> pattern;
  for (int s : spec.planted_pattern) {
    if (s < 0 || s >= spec.alphabet_size)
      throw InvalidArgumentError("planted pattern symbol outside the alphabet");
    pattern.push_back(static_cast<ActivityId>(s));
  }
  const double body_mean = spec.mean_trace_length - static_cast<double>(pattern.size());
  if (body_mean < 1.0)
    throw InvalidArgumentError("planted pattern is longer than the mean trace length allows");

  std::set<ActivityId> pattern_symbols(pattern.begin(), pattern.end());
  std::vector<ActivityId> filler;
  for (int a = 0; a < spec.alphabet_size; ++a)
    if (!pattern_symbols.count(static_cast<ActivityId>(a)))
      filler.push_back(static_cast<ActivityId>(a));
  if (filler.empty())
    throw InvalidArgumentError(
        "impossible matching constraint: alphabet has no symbol outside the pattern");

  const std::size_t n_deviant =
      static_cast<std::size_t>(std::llround(spec.deviant_fraction * static_cast<double>(spec.n_traces)));
  const std::size_t n_normal = spec.n_traces - n_deviant;
  if (spec.activity_count_matched && n_deviant != n_normal)
    throw InvalidArgumentError(
        "impossible matching constraint: activity_count_matched needs balanced classes");

  EventLog log;
  for (int a = 0; a < spec.alphabet_size; ++a) log.dictionary.intern(std::to_string(a));
  log.outcome_attribute = "outcome";

  const std::size_t pairs = std::max(n_deviant, n_normal);
  std::vector<Trace> traces;
  for (std::size_t i = 0; i < pairs; ++i) {
    Rng rng(derive_seed(spec.seed, i));
    // Matched mode fixes one body multiset for the whole log (round-robin
    // composition, shuffled order): every trace then shares a single
    // activity-count vector and count-based features carry no signal at
    // all, not even the memorizable per-trace noise that paired multisets
    // would hand a deep tree. Unmatched mode draws Poisson lengths.
    const std::size_t body_len =
        spec.activity_count_matched
            ? static_cast<std::size_t>(std::max<long long>(1, std::llround(body_mean)))
            : static_cast<std::size_t>(std::max(1, rng.poisson(body_mean)));
    std::vector<ActivityId> body;
    body.reserve(body_len);
    for (std::size_t j = 0; j < body_len; ++j) body.push_back(filler[j % filler.size()]);
    shuffle(body, rng);

    if (i < n_deviant) {
      Trace t;
      t.label = ClassLabel::deviant;
      t.outcome = "deviant";
      std::vector<ActivityId> seq = spec.contiguous ? detail::insert_block(body, pattern, rng)
                                                    : detail::scatter(body, pattern, rng);
      for (ActivityId a : seq) t.events.push_back(Event{a, std::nullopt});
      traces.push_back(std::move(t));
    }
    if (i < n_normal) {
      std::vector<ActivityId> arrangement;
      if (spec.activity_count_matched) {
        // same body multiset, pattern symbols rearranged so the pattern
        // never embeds; all-equal patterns cannot be rearranged
        bool ok = false;
        for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
          std::vector<ActivityId> order = pattern;
          shuffle(order, rng);
          arrangement = detail::scatter(body, order, rng);
          ok = !detail::is_subsequence(pattern, arrangement);
        }
        if (!ok)
          throw InvalidArgumentError(
              "impossible matching constraint: no pattern-free arrangement exists");
      } else {
        arrangement = body;  // filler only, trivially pattern-free
      }
      Trace t;
      t.label = ClassLabel::normal;
      t.outcome = "normal";
      for (ActivityId a : arrangement) t.events.push_back(Event{a, std::nullopt});
      traces.push_back(std::move(t));
    }
  }

  // interleaved case ids, synthetic increasing timestamps
  const std::int64_t base = 1577836800;  // 2020-01-01T00:00:00Z
  for (std::size_t i = 0; i < traces.size(); ++i) {
    Trace& t = traces[i];
    char buf[24];
    std::snprintf(buf, sizeof(buf), "t%05zu", i);
    t.case_id = buf;
    for (std::size_t j = 0; j < t.events.size(); ++j)
      t.events[j].timestamp = base + static_cast<std::int64_t>(i) * 100000 +
                              static_cast<std::int64_t>(j);
  }
  log.traces = std::move(traces);
  return log;
}

}  // namespace devmine
