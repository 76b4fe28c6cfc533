#pragma once

#include "behavtrace/trace_model.hpp"

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace behavtrace {

/// Half-open interval [begin, end).
struct TimeWindow {
    Timestamp begin;
    Timestamp end;

    bool contains(Timestamp ts) const { return begin <= ts && ts < end; }
};

enum class PrevalenceKey { Behavior, Category };

struct PrevalenceEntry {
    Millis total_duration_ms = 0;
    std::size_t frequency = 0;

    friend bool operator==(const PrevalenceEntry&, const PrevalenceEntry&) = default;
};

/// Time budget of one trace: how much time and how many occurrences each
/// behavior (or category) receives, and how unequally time is spread.
struct PrevalenceReport {
    std::map<std::string, PrevalenceEntry> per_key;
    std::size_t unique_behaviors = 0;
    Millis total_duration_ms = 0;
    std::size_t total_frequency = 0;
    /// Gini coefficient of per-key durations; 0 when no time was recorded.
    double gini = 0.0;
};

/// Aggregates Behavior events whose start lies in `window` (all events when
/// absent). Missing durations count as zero. Category keys require
/// categorized events (DataError otherwise).
PrevalenceReport prevalence_metrics(const UserTrace& trace, PrevalenceKey by,
                                    std::optional<TimeWindow> window = std::nullopt);

/// G = sum_ij |x_i - x_j| / (2 n sum x). DataError "no allocation" when no
/// value is positive; ConfigError on negative input.
double gini_allocation(std::span<const double> values);

enum class TimeUnit { Hour, Day, Week, Month };

std::string_view to_string(TimeUnit unit);
std::optional<TimeUnit> parse_time_unit(std::string_view text);

struct CountBucket {
    Timestamp start;   // UTC instant of the local bucket boundary
    std::size_t count = 0;

    friend bool operator==(const CountBucket&, const CountBucket&) = default;
};

struct CountSeries {
    TimeUnit unit = TimeUnit::Day;
    TzOffset tz;
    std::vector<CountBucket> buckets;
};

/// Behavior-event counts per local hour/day/week (Monday start)/calendar
/// month, with zero-count buckets between the first and last active one.
CountSeries regroup_counts(const UserTrace& trace, TimeUnit unit);

enum class SplitMetric { Count, Duration };

struct InterventionSplit {
    double pre = 0.0;
    double post = 0.0;
    double delta = 0.0;
};

/// Per-day rate of the metric before and from `t0` on. Each side is
/// normalized by its observed span in fractional days: from the first event
/// to t0, and from t0 to the end of the last event (ts + duration). With a
/// balance window both spans are truncated to that width around t0.
/// Durations straddling a boundary are split at it.
InterventionSplit intervention_split(const UserTrace& trace, Timestamp t0, SplitMetric metric,
                                     std::optional<Millis> balance_window_ms = std::nullopt);

/// Hour-of-day distribution of Behavior events in `window`, local time.
using TemporalProfile = std::array<double, 24>;

TemporalProfile temporal_profile(const UserTrace& trace, TimeWindow window);

}  // namespace behavtrace
