#pragma once

#include "behavtrace/time.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace behavtrace {

/// Ordering matters: equal-timestamp events sort Behavior < ScreenOn < ScreenOff.
enum class EventKind : std::uint8_t { Behavior, ScreenOn, ScreenOff };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

/// Reserved category assigned to behaviors a taxonomy does not cover.
inline constexpr std::string_view kOtherCategory = "__other__";

/// One timestamped record of a user's trace.
struct Event {
    std::string user_id;
    Timestamp ts;
    std::string behavior_id;                 // empty for screen events
    std::optional<std::string> category_id;
    std::optional<Millis> duration_ms;       // absent for screen events
    EventKind kind = EventKind::Behavior;

    bool is_behavior() const { return kind == EventKind::Behavior; }

    friend bool operator==(const Event&, const Event&) = default;
};

/// Canonical order: (ts, kind, behavior_id), then the remaining fields so the
/// order is total and duplicates end up adjacent.
bool canonical_less(const Event& a, const Event& b);

/// Function from behavior_id to category_id plus the ordered category list.
class Taxonomy {
public:
    Taxonomy() = default;

    /// Builds a taxonomy from (behavior, category) pairs. Categories are listed
    /// in first-appearance order unless `categories` is given, in which case
    /// every mapped category must appear in it. Throws DataError if a behavior
    /// maps to two categories or a mapped category is missing from the list.
    static Taxonomy from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs,
                               std::vector<std::string> categories = {});

    /// Reads "behavior_id,category_id" rows. A header row whose first cell is
    /// "behavior_id" is skipped.
    static Taxonomy from_csv(std::istream& in);

    const std::string* lookup(std::string_view behavior_id) const;
    const std::vector<std::string>& categories() const { return categories_; }
    std::size_t size() const { return mapping_.size(); }

private:
    std::unordered_map<std::string, std::string> mapping_;
    std::vector<std::string> categories_;
};

/// One user's normalized event stream.
struct UserTrace {
    std::string user_id;
    TzOffset tz;
    std::vector<Event> events;

    /// Sorts canonically and removes exact duplicates.
    void normalize();

    /// Pointers to the Behavior events, in trace order. Session event ranges
    /// index into this view.
    std::vector<const Event*> behaviors() const;
};

struct Provenance {
    std::string source;
    std::string ingested_at;
};

/// All traces of an ingest, keyed (and therefore iterated) by user_id.
struct TraceCorpus {
    std::map<std::string, UserTrace> traces;
    Provenance provenance;

    std::size_t event_count() const;
};

enum class InputFormat { JsonLines, Csv };

struct ParseOptions {
    bool strict = false;
    TzOffset default_tz;
    std::string source;
};

struct ParseReport {
    static constexpr std::size_t kMaxReasons = 100;

    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t duplicates = 0;
    std::vector<std::string> reasons;
};

struct ParseResult {
    TraceCorpus corpus;
    ParseReport report;
};

/// Parses a JSON-lines or CSV event stream into a normalized corpus.
/// Malformed records are skipped and counted; in strict mode the first one
/// throws DataError carrying the line number and reason.
ParseResult parse_events(std::istream& in, InputFormat format, const ParseOptions& options = {});

/// Writes the canonical JSONL form (users in id order, events in canonical
/// order, integer timestamps, kind always present).
void write_events_jsonl(std::ostream& out, const TraceCorpus& corpus);
void write_event_jsonl(std::ostream& out, const Event& event);

enum class UnmappedPolicy { Reject, OtherBucket };

/// Sets category_id on every Behavior event from the taxonomy. Unmapped
/// behaviors either raise DataError naming the behavior or get "__other__".
TraceCorpus attach_categories(const TraceCorpus& corpus, const Taxonomy& taxonomy,
                              UnmappedPolicy policy);
UserTrace attach_categories(const UserTrace& trace, const Taxonomy& taxonomy, UnmappedPolicy policy);

/// Gaps between consecutive Behavior events; empty for fewer than two.
std::vector<Millis> inter_event_intervals(const UserTrace& trace);

inline constexpr Millis kDefaultDurationCapMs = 30 * kMsPerMinute;

/// Fills missing Behavior durations with min(gap to next Behavior, cap);
/// the last Behavior event gets the cap. Explicit durations are kept.
UserTrace impute_durations(const UserTrace& trace, Millis cap_ms = kDefaultDurationCapMs);

}  // namespace behavtrace
