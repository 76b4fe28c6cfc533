#include "behavtrace/time_budget.hpp"

#include "behavtrace/error.hpp"

#include <algorithm>
#include <numeric>

namespace behavtrace {

PrevalenceReport prevalence_metrics(const UserTrace& trace, PrevalenceKey by, std::optional<TimeWindow> window) {
    PrevalenceReport report;
    for (const auto& e : trace.events) {
        if (!e.is_behavior()) continue;
        if (window && !window->contains(e.ts)) continue;
        const std::string* key = &e.behavior_id;
        if (by == PrevalenceKey::Category) {
            if (!e.category_id) throw DataError("uncategorized behavior '" + e.behavior_id + "'");
            key = &*e.category_id;
        }
        auto& entry = report.per_key[*key];
        const Millis d = e.duration_ms.value_or(0);
        entry.total_duration_ms += d;
        ++entry.frequency;
        report.total_duration_ms += d;
        ++report.total_frequency;
    }
    report.unique_behaviors = report.per_key.size();
    if (report.total_duration_ms > 0) {
        std::vector<double> durations;
        durations.reserve(report.per_key.size());
        for (const auto& [_, entry] : report.per_key) durations.push_back(static_cast<double>(entry.total_duration_ms));
        report.gini = gini_allocation(durations);
    }
    return report;
}

double gini_allocation(std::span<const double> values) {
    std::vector<double> x(values.begin(), values.end());
    if (std::any_of(x.begin(), x.end(), [](double v) { return v < 0.0; }))
        throw ConfigError("gini: negative allocation");
    const double total = std::accumulate(x.begin(), x.end(), 0.0);
    if (!(total > 0.0)) throw DataError("no allocation");
    std::sort(x.begin(), x.end());
    // sum_ij |x_i - x_j| = 2 * sum_i (2i - n + 1) x_(i) over ascending order.
    const auto n = static_cast<double>(x.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += (2.0 * static_cast<double>(i) - n + 1.0) * x[i];
    return std::clamp(acc / (n * total), 0.0, 1.0);
}

std::string_view to_string(TimeUnit unit) {
    switch (unit) {
        case TimeUnit::Hour: return "hour";
        case TimeUnit::Day: return "day";
        case TimeUnit::Week: return "week";
        case TimeUnit::Month: return "month";
    }
    return "day";
}

std::optional<TimeUnit> parse_time_unit(std::string_view text) {
    if (text == "hour") return TimeUnit::Hour;
    if (text == "day") return TimeUnit::Day;
    if (text == "week") return TimeUnit::Week;
    if (text == "month") return TimeUnit::Month;
    return std::nullopt;
}

namespace {

// Local-time bucket start, in local epoch milliseconds.
std::int64_t bucket_start_local(std::int64_t local, TimeUnit unit) {
    const std::int64_t day = floor_div(local, kMsPerDay);
    switch (unit) {
        case TimeUnit::Hour: return floor_div(local, kMsPerHour) * kMsPerHour;
        case TimeUnit::Day: return day * kMsPerDay;
        case TimeUnit::Week: return (day - (iso_weekday(day) - 1)) * kMsPerDay;
        case TimeUnit::Month: return month_start_day(day) * kMsPerDay;
    }
    return day * kMsPerDay;
}

std::int64_t next_bucket_local(std::int64_t start, TimeUnit unit) {
    switch (unit) {
        case TimeUnit::Hour: return start + kMsPerHour;
        case TimeUnit::Day: return start + kMsPerDay;
        case TimeUnit::Week: return start + 7 * kMsPerDay;
        case TimeUnit::Month: return next_month_start_day(floor_div(start, kMsPerDay)) * kMsPerDay;
    }
    return start + kMsPerDay;
}

}  // namespace

CountSeries regroup_counts(const UserTrace& trace, TimeUnit unit) {
    CountSeries series{unit, trace.tz, {}};
    const std::int64_t shift = static_cast<std::int64_t>(trace.tz.minutes) * kMsPerMinute;
    std::map<std::int64_t, std::size_t> counts;
    for (const auto& e : trace.events)
        if (e.is_behavior()) ++counts[bucket_start_local(local_ms(e.ts, trace.tz), unit)];
    if (counts.empty()) return series;

    const std::int64_t last = counts.rbegin()->first;
    for (std::int64_t b = counts.begin()->first; b <= last; b = next_bucket_local(b, unit)) {
        const auto it = counts.find(b);
        series.buckets.push_back({Timestamp{b - shift}, it == counts.end() ? 0 : it->second});
    }
    return series;
}

InterventionSplit intervention_split(const UserTrace& trace, Timestamp t0, SplitMetric metric,
                                     std::optional<Millis> balance_window_ms) {
    if (balance_window_ms && *balance_window_ms <= 0) throw ConfigError("balance window must be > 0");
    const auto b = trace.behaviors();
    const bool any_pre = std::any_of(b.begin(), b.end(), [&](const Event* e) { return e->ts < t0; });
    const bool any_post = std::any_of(b.begin(), b.end(), [&](const Event* e) { return e->ts >= t0; });
    if (!any_pre || !any_post) throw DataError("intervention outside observation");

    Timestamp pre_begin = b.front()->ts;
    Timestamp post_end = t0;
    for (const Event* e : b) post_end = std::max(post_end, e->ts + e->duration_ms.value_or(0));
    // A window cut short by the balance limit is half-open at its far end.
    bool post_truncated = false;
    if (balance_window_ms) {
        pre_begin = std::max(pre_begin, t0 + (-*balance_window_ms));
        post_truncated = t0 + *balance_window_ms < post_end;
        post_end = std::min(post_end, t0 + *balance_window_ms);
    }
    const Millis pre_span = t0 - pre_begin;
    const Millis post_span = post_end - t0;
    if (post_span <= 0) throw DataError("zero-length observation after intervention");

    double pre = 0.0;
    double post = 0.0;
    for (const Event* e : b) {
        if (metric == SplitMetric::Count) {
            if (e->ts >= pre_begin && e->ts < t0) pre += 1.0;
            else if (e->ts >= t0 && (e->ts < post_end || (!post_truncated && e->ts == post_end))) post += 1.0;
        } else {
            const Timestamp s = e->ts;
            const Timestamp f = e->ts + e->duration_ms.value_or(0);
            pre += static_cast<double>(std::max<Millis>(0, std::min(f, t0) - std::max(s, pre_begin)));
            post += static_cast<double>(std::max<Millis>(0, std::min(f, post_end) - std::max(s, t0)));
        }
    }
    InterventionSplit out;
    out.pre = pre / (static_cast<double>(pre_span) / kMsPerDay);
    out.post = post / (static_cast<double>(post_span) / kMsPerDay);
    out.delta = out.post - out.pre;
    return out;
}

TemporalProfile temporal_profile(const UserTrace& trace, TimeWindow window) {
    TemporalProfile profile{};
    std::size_t total = 0;
    for (const auto& e : trace.events) {
        if (!e.is_behavior() || !window.contains(e.ts)) continue;
        profile[static_cast<std::size_t>(local_hour(e.ts, trace.tz))] += 1.0;
        ++total;
    }
    if (total == 0) throw DataError("empty profile");
    for (auto& p : profile) p /= static_cast<double>(total);
    return profile;
}

}  // namespace behavtrace
