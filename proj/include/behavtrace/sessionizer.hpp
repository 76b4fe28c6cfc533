#pragma once

#include "behavtrace/trace_model.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace behavtrace {

/// A maximal run of a user's Behavior events with no interruption.
/// `first_event` and `n_events` index into UserTrace::behaviors().
struct Session {
    std::string user_id;
    std::size_t index = 0;
    Timestamp start_ts;
    Timestamp end_ts;
    std::size_t first_event = 0;
    std::size_t n_events = 0;

    std::size_t end_event() const { return first_event + n_events; }

    friend bool operator==(const Session&, const Session&) = default;
};

struct FixedThreshold {
    Millis t_ms = 0;
};

/// Per-user threshold equal to the median inter-event gap.
struct IndividualMedian {
    std::size_t min_gaps = 5;
    Millis fallback_ms = 60'000;
    Millis clamp_min_ms = 1'000;
};

enum class OrphanPolicy { Drop, OwnSession };

/// Sessions bounded by screen activation and deactivation.
struct ScreenBounded {
    OrphanPolicy orphan_policy = OrphanPolicy::Drop;
};

using ThresholdPolicy = std::variant<FixedThreshold, IndividualMedian, ScreenBounded>;

/// Throws ConfigError when a parameter is out of range.
void validate(const ThresholdPolicy& policy);

std::string describe(const ThresholdPolicy& policy);

struct SessionSet {
    std::string user_id;
    ThresholdPolicy policy;
    std::optional<Millis> threshold_ms;
    std::vector<Session> sessions;
};

/// Starts a new session whenever the gap to the previous Behavior event is
/// strictly greater than `t_ms`.
SessionSet sessionize_fixed(const UserTrace& trace, Millis t_ms);

/// max(clamp_min_ms, median gap), the median of an even count being the
/// mean of the middle pair rounded half-up. Falls back to `fallback_ms` when
/// the trace has fewer than `min_gaps` gaps.
Millis individual_threshold(const UserTrace& trace, const IndividualMedian& policy);

/// Fixed-threshold sessionization at the user's median gap. The reported
/// threshold is the rounded value from individual_threshold; gaps are
/// compared against the unrounded median so that rescaling time preserves
/// session membership exactly.
SessionSet sessionize_individual(const UserTrace& trace, const IndividualMedian& policy);

/// One session per maximal [ScreenOn, next ScreenOff) interval holding at
/// least one Behavior event. Throws DataError "screen data unavailable" when
/// the trace has no ScreenOn event.
SessionSet sessionize_screen(const UserTrace& trace, const ScreenBounded& policy);

SessionSet sessionize(const UserTrace& trace, const ThresholdPolicy& policy);

/// One line per session: {"user","index","start_ts","end_ts","n_events","threshold_ms"?}.
void write_sessions_jsonl(std::ostream& out, const SessionSet& set);

/// What the JSONL form of a session carries.
struct SessionRecord {
    std::string user_id;
    std::size_t index = 0;
    Timestamp start_ts;
    Timestamp end_ts;
    std::size_t n_events = 0;
    std::optional<Millis> threshold_ms;

    friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

/// Parses write_sessions_jsonl output; DataError on a malformed line.
std::vector<SessionRecord> read_sessions_jsonl(std::istream& in);

struct PowerLawFit {
    double alpha = 0.0;
    std::size_t n_tail = 0;
};

/// Continuous maximum-likelihood exponent over the gaps >= xmin:
/// alpha = 1 + n / sum(ln(x / xmin)). Needs at least 10 tail gaps.
PowerLawFit fit_powerlaw_exponent(std::span<const Millis> gaps, Millis xmin);
PowerLawFit fit_powerlaw_exponent(std::span<const double> gaps, double xmin);

}  // namespace behavtrace
