#include "behavtrace/sessionizer.hpp"

#include "behavtrace/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

namespace behavtrace {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Session make_session(const std::string& user, std::size_t index, const std::vector<const Event*>& b,
                     std::size_t first, std::size_t count) {
    const Event& last = *b[first + count - 1];
    return Session{user, index, b[first]->ts, last.ts + last.duration_ms.value_or(0), first, count};
}

// Splits the Behavior events wherever `splits(gap)` holds.
template <class SplitPredicate>
std::vector<Session> split_on_gaps(const UserTrace& trace, SplitPredicate splits) {
    const auto b = trace.behaviors();
    std::vector<Session> out;
    std::size_t first = 0;
    for (std::size_t i = 1; i <= b.size(); ++i) {
        if (i == b.size() || splits(b[i]->ts - b[i - 1]->ts)) {
            out.push_back(make_session(trace.user_id, out.size(), b, first, i - first));
            first = i;
        }
    }
    return out;
}

// Twice the median (sum of the middle pair for even counts; 2x the middle
// element otherwise), keeping the exact value in integers.
Millis twice_median(std::vector<Millis> gaps) {
    const std::size_t n = gaps.size();
    const auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(gaps.begin(), mid, gaps.end());
    const Millis upper = *mid;
    if (n % 2 == 1) return 2 * upper;
    const Millis lower = *std::max_element(gaps.begin(), mid);
    return lower + upper;
}

}  // namespace

void validate(const ThresholdPolicy& policy) {
    std::visit(overloaded{
                   [](const FixedThreshold& p) {
                       if (p.t_ms <= 0) throw ConfigError("fixed threshold must be > 0 ms");
                   },
                   [](const IndividualMedian& p) {
                       if (p.min_gaps < 1) throw ConfigError("min_gaps must be >= 1");
                       if (p.fallback_ms <= 0) throw ConfigError("fallback_ms must be > 0");
                       if (p.clamp_min_ms <= 0) throw ConfigError("clamp_min_ms must be > 0");
                   },
                   [](const ScreenBounded&) {},
               },
               policy);
}

std::string describe(const ThresholdPolicy& policy) {
    return std::visit(overloaded{
                          [](const FixedThreshold&) { return std::string("fixed"); },
                          [](const IndividualMedian&) { return std::string("individual_median"); },
                          [](const ScreenBounded&) { return std::string("screen"); },
                      },
                      policy);
}

SessionSet sessionize_fixed(const UserTrace& trace, Millis t_ms) {
    validate(FixedThreshold{t_ms});
    SessionSet set{trace.user_id, FixedThreshold{t_ms}, t_ms, {}};
    set.sessions = split_on_gaps(trace, [t_ms](Millis gap) { return gap > t_ms; });
    return set;
}

Millis individual_threshold(const UserTrace& trace, const IndividualMedian& policy) {
    validate(policy);
    auto gaps = inter_event_intervals(trace);
    if (gaps.size() < policy.min_gaps) return policy.fallback_ms;
    const Millis twice = twice_median(std::move(gaps));
    return std::max(policy.clamp_min_ms, (twice + 1) / 2);
}

SessionSet sessionize_individual(const UserTrace& trace, const IndividualMedian& policy) {
    validate(policy);
    SessionSet set{trace.user_id, policy, individual_threshold(trace, policy), {}};
    auto gaps = inter_event_intervals(trace);
    if (gaps.size() < policy.min_gaps) {
        const Millis t = policy.fallback_ms;
        set.sessions = split_on_gaps(trace, [t](Millis gap) { return gap > t; });
        return set;
    }
    // Compare 2*gap against 2*max(clamp, median) to stay exact for half-integer medians.
    const Millis twice = std::max(2 * policy.clamp_min_ms, twice_median(std::move(gaps)));
    set.sessions = split_on_gaps(trace, [twice](Millis gap) { return 2 * gap > twice; });
    return set;
}

SessionSet sessionize_screen(const UserTrace& trace, const ScreenBounded& policy) {
    struct Interval {
        Timestamp begin;
        Timestamp end;
    };
    constexpr Timestamp kOpenEnd{std::numeric_limits<std::int64_t>::max()};

    std::vector<Interval> intervals;
    std::optional<Timestamp> on_since;
    bool saw_screen_on = false;
    for (const auto& e : trace.events) {
        if (e.kind == EventKind::ScreenOn) {
            saw_screen_on = true;
            if (!on_since) on_since = e.ts;
        } else if (e.kind == EventKind::ScreenOff && on_since) {
            intervals.push_back({*on_since, e.ts});
            on_since.reset();
        }
    }
    if (!saw_screen_on) throw DataError("screen data unavailable for user '" + trace.user_id + "'");
    if (on_since) intervals.push_back({*on_since, kOpenEnd});

    SessionSet set{trace.user_id, policy, std::nullopt, {}};
    const auto b = trace.behaviors();
    std::size_t k = 0;
    std::size_t i = 0;
    while (i < b.size()) {
        while (k < intervals.size() && intervals[k].end <= b[i]->ts) ++k;
        const bool inside = k < intervals.size() && intervals[k].begin <= b[i]->ts;
        if (!inside) {
            if (policy.orphan_policy == OrphanPolicy::OwnSession)
                set.sessions.push_back(make_session(trace.user_id, set.sessions.size(), b, i, 1));
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < b.size() && b[j]->ts < intervals[k].end) ++j;
        set.sessions.push_back(make_session(trace.user_id, set.sessions.size(), b, i, j - i));
        i = j;
    }
    return set;
}

SessionSet sessionize(const UserTrace& trace, const ThresholdPolicy& policy) {
    return std::visit(overloaded{
                          [&](const FixedThreshold& p) { return sessionize_fixed(trace, p.t_ms); },
                          [&](const IndividualMedian& p) { return sessionize_individual(trace, p); },
                          [&](const ScreenBounded& p) { return sessionize_screen(trace, p); },
                      },
                      policy);
}

void write_sessions_jsonl(std::ostream& out, const SessionSet& set) {
    for (const auto& s : set.sessions) {
        nlohmann::ordered_json j;
        j["user"] = s.user_id;
        j["index"] = s.index;
        j["start_ts"] = s.start_ts.epoch_ms;
        j["end_ts"] = s.end_ts.epoch_ms;
        j["n_events"] = s.n_events;
        if (set.threshold_ms) j["threshold_ms"] = *set.threshold_ms;
        out << j.dump() << '\n';
    }
}

std::vector<SessionRecord> read_sessions_jsonl(std::istream& in) {
    std::vector<SessionRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            SessionRecord r;
            r.user_id = j.at("user").get<std::string>();
            r.index = j.at("index").get<std::size_t>();
            r.start_ts = Timestamp{j.at("start_ts").get<std::int64_t>()};
            r.end_ts = Timestamp{j.at("end_ts").get<std::int64_t>()};
            r.n_events = j.at("n_events").get<std::size_t>();
            if (j.contains("threshold_ms")) r.threshold_ms = j.at("threshold_ms").get<Millis>();
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& ex) {
            throw DataError("sessions line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return out;
}

PowerLawFit fit_powerlaw_exponent(std::span<const double> gaps, double xmin) {
    if (!(xmin > 0.0)) throw ConfigError("xmin must be > 0");
    std::size_t n = 0;
    double sum_log = 0.0;
    for (const double g : gaps) {
        if (g < xmin) continue;
        ++n;
        sum_log += std::log(g / xmin);
    }
    if (n < 10) throw DataError("insufficient tail sample");
    if (!(sum_log > 0.0)) throw DataError("degenerate tail");
    return {1.0 + static_cast<double>(n) / sum_log, n};
}

PowerLawFit fit_powerlaw_exponent(std::span<const Millis> gaps, Millis xmin) {
    std::vector<double> values(gaps.begin(), gaps.end());
    return fit_powerlaw_exponent(std::span<const double>(values), static_cast<double>(xmin));
}

}  // namespace behavtrace
