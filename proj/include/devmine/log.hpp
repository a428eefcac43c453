#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "devmine/errors.hpp"

namespace devmine {

using ActivityId = std::int32_t;

enum class ClassLabel { normal, deviant };

inline const char* to_string(ClassLabel l) {
  return l == ClassLabel::deviant ? "deviant" : "normal";
}

/// One executed activity. Timestamps are epoch seconds (UTC); they are
/// optional because outcome-labeled logs do not need them.
struct Event {
  ActivityId activity = 0;
  std::optional<std::int64_t> timestamp;

  friend bool operator==(const Event&, const Event&) = default;
};

struct Trace {
  std::string case_id;
  std::vector<Event> events;
  std::optional<ClassLabel> label;
  std::optional<std::string> outcome;

  /// Activity ids in execution order.
  std::vector<ActivityId> activities() const {
    std::vector<ActivityId> out;
    out.reserve(events.size());
    for (const Event& e : events) out.push_back(e.activity);
    return out;
  }
};

/// Bijective map between activity names and dense ids, assigned in
/// first-appearance order so encodings are reproducible.
class ActivityDictionary {
 public:
  ActivityId intern(const std::string& name) {
    auto it = ids_.find(name);
    if (it != ids_.end()) return it->second;
    ActivityId id = static_cast<ActivityId>(names_.size());
    names_.push_back(name);
    ids_.emplace(name, id);
    return id;
  }

  std::optional<ActivityId> id_of(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& name_of(ActivityId id) const { return names_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, ActivityId> ids_;
};

struct EventLog {
  ActivityDictionary dictionary;
  std::vector<Trace> traces;
  /// Name of the case attribute the per-trace outcome values came from.
  std::optional<std::string> outcome_attribute;

  bool labeled() const {
    return std::all_of(traces.begin(), traces.end(),
                       [](const Trace& t) { return t.label.has_value(); });
  }
};

/// Semantic equality: same traces with the same activity *names*, labels and
/// outcomes. Dictionary id assignment is an encoding detail and is ignored,
/// which keeps CSV round-trips exact even when re-grouping rows by case
/// changes the order in which activities first appear.
inline bool operator==(const EventLog& a, const EventLog& b) {
  if (a.traces.size() != b.traces.size()) return false;
  if (a.outcome_attribute != b.outcome_attribute) return false;
  for (std::size_t i = 0; i < a.traces.size(); ++i) {
    const Trace& x = a.traces[i];
    const Trace& y = b.traces[i];
    if (x.case_id != y.case_id || x.label != y.label || x.outcome != y.outcome) return false;
    if (x.events.size() != y.events.size()) return false;
    for (std::size_t j = 0; j < x.events.size(); ++j) {
      if (x.events[j].timestamp != y.events[j].timestamp) return false;
      if (a.dictionary.name_of(x.events[j].activity) != b.dictionary.name_of(y.events[j].activity))
        return false;
    }
  }
  return true;
}

/// How traces get their class label.
struct LabelingSpec {
  enum class Mode { temporal, outcome };
  enum class DeviantWhen { above, below };

  Mode mode = Mode::outcome;
  // temporal mode
  std::int64_t duration_threshold_seconds = 0;
  DeviantWhen deviant_when = DeviantWhen::above;
  // outcome mode
  std::string outcome_attribute;
  std::string deviant_value;
};

struct LogStats {
  std::size_t normal_cases = 0;
  std::size_t deviant_cases = 0;
  std::size_t total_cases = 0;
  std::size_t total_event_classes = 0;
  double mean_event_classes_per_case = 0.0;
  double mean_events_per_case = 0.0;
};

/// Column mapping for CSV ingestion. Timestamp and outcome columns are
/// optional; when a timestamp column is configured every row must carry a
/// parseable value.
struct CsvFormat {
  std::string case_column = "case_id";
  std::string activity_column = "activity";
  std::optional<std::string> timestamp_column = "timestamp";
  std::optional<std::string> outcome_column;
};

namespace detail {

// Hinnant's civil-date algorithms, so timestamp handling does not depend on
// the host locale or timezone database.
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yy + (m <= 2));
}

/// Accepts "YYYY-MM-DD HH:MM:SS" or "YYYY-MM-DDTHH:MM:SS" with an optional
/// trailing "Z" or fractional seconds (truncated), or plain epoch seconds.
inline std::optional<std::int64_t> parse_timestamp(const std::string& raw) {
  std::string s = raw;
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.pop_back();
  std::size_t start = s.find_first_not_of(' ');
  if (start == std::string::npos) return std::nullopt;
  s = s.substr(start);
  if (s.empty()) return std::nullopt;

  bool digits_only = s.find_first_not_of("0123456789-") == std::string::npos &&
                     s.find('-', 1) == std::string::npos;
  if (digits_only) {
    try {
      return std::stoll(s);
    } catch (...) {
      return std::nullopt;
    }
  }

  int y = 0, hh = 0, mm = 0, ss = 0;
  unsigned mo = 0, dd = 0;
  char sep = 0;
  int n = 0;
  if (std::sscanf(s.c_str(), "%d-%u-%u%c%d:%d:%d%n", &y, &mo, &dd, &sep, &hh, &mm, &ss, &n) < 7)
    return std::nullopt;
  if (sep != 'T' && sep != ' ') return std::nullopt;
  std::string rest = s.substr(static_cast<std::size_t>(n));
  if (!rest.empty() && rest[0] == '.') {
    std::size_t i = 1;
    while (i < rest.size() && rest[i] >= '0' && rest[i] <= '9') ++i;
    rest = rest.substr(i);
  }
  if (!rest.empty() && rest != "Z") return std::nullopt;
  if (mo < 1 || mo > 12 || dd < 1 || dd > 31 || hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  return days_from_civil(y, mo, dd) * 86400 + static_cast<std::int64_t>(hh) * 3600 +
         static_cast<std::int64_t>(mm) * 60 + ss;
}

inline std::string format_timestamp(std::int64_t epoch_seconds) {
  std::int64_t days = epoch_seconds / 86400;
  std::int64_t rem = epoch_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  int y;
  unsigned mo, dd;
  civil_from_days(days, y, mo, dd);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, mo, dd,
                static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

/// Minimal RFC-4180 field splitting: quoted fields, doubled quotes.
inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace detail

/// Parses a CSV event log: one trace per distinct case id (first-appearance
/// order), events stable-sorted by timestamp within a trace so equal stamps
/// keep file order.
inline EventLog parse_event_log(const std::string& path, const CsvFormat& format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw EmptyLogError();
  std::vector<std::string> columns = detail::split_csv_row(header);

  auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    return std::nullopt;
  };
  auto require_column = [&](const std::string& name) {
    auto idx = find_column(name);
    if (!idx) throw MissingColumnError(name);
    return *idx;
  };

  const std::size_t case_idx = require_column(format.case_column);
  const std::size_t act_idx = require_column(format.activity_column);
  std::optional<std::size_t> ts_idx, out_idx;
  if (format.timestamp_column) ts_idx = require_column(*format.timestamp_column);
  if (format.outcome_column) out_idx = require_column(*format.outcome_column);

  EventLog log;
  if (format.outcome_column) log.outcome_attribute = format.outcome_column;
  std::unordered_map<std::string, std::size_t> trace_index;

  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields = detail::split_csv_row(line);
    std::size_t needed = std::max({case_idx, act_idx, ts_idx.value_or(0), out_idx.value_or(0)});
    if (fields.size() <= needed)
      throw DataError("row " + std::to_string(rows + 2) + " has too few fields");
    ++rows;

    const std::string& case_id = fields[case_idx];
    auto it = trace_index.find(case_id);
    if (it == trace_index.end()) {
      it = trace_index.emplace(case_id, log.traces.size()).first;
      log.traces.push_back(Trace{case_id, {}, std::nullopt, std::nullopt});
    }
    Trace& trace = log.traces[it->second];

    Event ev;
    ev.activity = log.dictionary.intern(fields[act_idx]);
    if (ts_idx) {
      auto ts = detail::parse_timestamp(fields[*ts_idx]);
      if (!ts) throw TimestampParseError(fields[*ts_idx]);
      ev.timestamp = *ts;
    }
    trace.events.push_back(ev);

    if (out_idx && !trace.outcome) {
      const std::string& v = fields[*out_idx];
      if (!v.empty()) trace.outcome = v;
    }
  }
  if (rows == 0) throw EmptyLogError();

  for (Trace& t : log.traces) {
    std::stable_sort(t.events.begin(), t.events.end(),
                     [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
  }
  return log;
}

/// Writes the log back in the same CSV shape parse_event_log reads.
inline void write_event_log(const EventLog& log, const std::string& path, const CsvFormat& format) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file: " + path);

  out << detail::csv_escape(format.case_column) << ','
      << detail::csv_escape(format.activity_column);
  if (format.timestamp_column) out << ',' << detail::csv_escape(*format.timestamp_column);
  if (format.outcome_column) out << ',' << detail::csv_escape(*format.outcome_column);
  out << '\n';

  for (const Trace& t : log.traces) {
    for (const Event& e : t.events) {
      out << detail::csv_escape(t.case_id) << ','
          << detail::csv_escape(log.dictionary.name_of(e.activity));
      if (format.timestamp_column) {
        out << ',';
        if (e.timestamp) out << detail::format_timestamp(*e.timestamp);
      }
      if (format.outcome_column) out << ',' << detail::csv_escape(t.outcome.value_or(""));
      out << '\n';
    }
  }
}

/// Labels every trace. Temporal mode: case duration is last minus first
/// event timestamp; duration equal to the threshold counts as normal
/// ("complete within" is inclusive). Pure in (trace, spec), so relabeling
/// with the same spec is idempotent.
inline EventLog label_traces(const EventLog& input, const LabelingSpec& spec) {
  EventLog log = input;
  if (spec.mode == LabelingSpec::Mode::temporal) {
    for (Trace& t : log.traces) {
      if (t.events.empty() || !t.events.front().timestamp || !t.events.back().timestamp)
        throw LabelingError("temporal labeling requires timestamps on trace " + t.case_id);
      std::int64_t duration = *t.events.back().timestamp - *t.events.front().timestamp;
      bool deviant = spec.deviant_when == LabelingSpec::DeviantWhen::above
                         ? duration > spec.duration_threshold_seconds
                         : duration < spec.duration_threshold_seconds;
      t.label = deviant ? ClassLabel::deviant : ClassLabel::normal;
    }
  } else {
    if (log.outcome_attribute && *log.outcome_attribute != spec.outcome_attribute)
      throw LabelingError("log has outcome attribute \"" + *log.outcome_attribute +
                          "\", labeling spec expects \"" + spec.outcome_attribute + "\"");
    for (Trace& t : log.traces) {
      if (!t.outcome)
        throw LabelingError("trace " + t.case_id + " has no value for outcome attribute \"" +
                            spec.outcome_attribute + "\"");
      t.label = (*t.outcome == spec.deviant_value) ? ClassLabel::deviant : ClassLabel::normal;
    }
  }
  return log;
}

inline LogStats compute_log_stats(const EventLog& log) {
  LogStats stats;
  std::set<ActivityId> all_activities;
  std::size_t total_events = 0;
  std::size_t total_distinct = 0;
  for (const Trace& t : log.traces) {
    if (!t.label) throw UnlabeledTraceError(t.case_id);
    if (*t.label == ClassLabel::deviant) ++stats.deviant_cases;
    else ++stats.normal_cases;
    std::set<ActivityId> distinct;
    for (const Event& e : t.events) {
      distinct.insert(e.activity);
      all_activities.insert(e.activity);
    }
    total_events += t.events.size();
    total_distinct += distinct.size();
  }
  stats.total_cases = log.traces.size();
  stats.total_event_classes = all_activities.size();
  if (!log.traces.empty()) {
    stats.mean_events_per_case = static_cast<double>(total_events) / log.traces.size();
    stats.mean_event_classes_per_case = static_cast<double>(total_distinct) / log.traces.size();
  }
  return stats;
}

}  // namespace devmine
