#include "behavtrace/regularity.hpp"

#include "behavtrace/csv.hpp"
#include "behavtrace/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

namespace behavtrace {
namespace {

std::string dominant_category(const Session& s, const std::vector<const Event*>& b) {
    // Insertion order doubles as first-occurrence order for ties.
    std::vector<std::pair<std::string, Millis>> totals;
    for (std::size_t i = s.first_event; i < s.end_event(); ++i) {
        const Event& e = *b[i];
        if (!e.category_id) throw DataError("uncategorized event: behavior '" + e.behavior_id + "'");
        auto it = std::find_if(totals.begin(), totals.end(), [&](const auto& t) { return t.first == *e.category_id; });
        if (it == totals.end()) totals.emplace_back(*e.category_id, e.duration_ms.value_or(0));
        else it->second += e.duration_ms.value_or(0);
    }
    auto best = totals.begin();
    for (auto it = totals.begin(); it != totals.end(); ++it)
        if (it->second > best->second) best = it;
    return best->first;
}

struct Moments {
    std::size_t n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double x) {
        ++n;
        sum += x;
        sum_sq += x * x;
    }

    RhythmCell cell(std::size_t min_n) const {
        RhythmCell c;
        c.n = n;
        if (n == 0 || n < min_n) return c;
        const double mean = sum / static_cast<double>(n);
        c.mean = mean;
        c.std = std::sqrt(std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean));
        return c;
    }
};

void write_cell(std::ostream& out, const RhythmCell& c) {
    out << (c.mean ? csv::format_double(*c.mean) : "") << ',' << (c.std ? csv::format_double(*c.std) : "") << ','
        << c.n << '\n';
}

}  // namespace

std::vector<std::string> label_sessions(const SessionSet& sessions, const UserTrace& trace, const Labeling& labeling) {
    const auto b = trace.behaviors();
    const PatternSet* patterns = nullptr;
    if (const auto* m = std::get_if<MedoidLabels>(&labeling)) patterns = m->patterns;
    std::vector<std::string> labels;
    labels.reserve(sessions.sessions.size());
    for (std::size_t i = 0; i < sessions.sessions.size(); ++i) {
        if (patterns) {
            if (const auto it = patterns->assignment.find(i); it != patterns->assignment.end()) {
                labels.push_back("P" + std::to_string(it->second));
                continue;
            }
        }
        labels.push_back(dominant_category(sessions.sessions[i], b));
    }
    return labels;
}

std::vector<Trajectory> build_trajectories(const SessionSet& sessions, const UserTrace& trace,
                                           const Labeling& labeling, Scope scope) {
    const auto labels = label_sessions(sessions, trace, labeling);
    std::map<std::pair<std::int64_t, int>, Trajectory> groups;
    for (std::size_t i = 0; i < sessions.sessions.size(); ++i) {
        const Timestamp start = sessions.sessions[i].start_ts;
        const std::int64_t day = local_day(start, trace.tz);
        const int hour = scope == Scope::UserDayHour ? local_hour(start, trace.tz) : -1;
        auto& t = groups[{day, hour}];
        if (t.labels.empty()) {
            t.user_id = sessions.user_id;
            t.scope = scope;
            t.day = day;
            if (scope == Scope::UserDayHour) t.hour = hour;
        }
        t.labels.push_back(labels[i]);
    }
    std::vector<Trajectory> out;
    out.reserve(groups.size());
    for (auto& [_, t] : groups) out.push_back(std::move(t));
    return out;
}

std::string_view to_string(ComplexityMeasure measure) {
    return measure == ComplexityMeasure::Turbulence ? "turbulence" : "composite";
}

std::optional<ComplexityMeasure> parse_complexity_measure(std::string_view text) {
    if (text == "composite") return ComplexityMeasure::CompositeIndex;
    if (text == "turbulence") return ComplexityMeasure::Turbulence;
    return std::nullopt;
}

double trajectory_complexity(const Trajectory& t, ComplexityMeasure measure, std::optional<std::size_t> alphabet_size) {
    if (t.labels.empty()) throw DataError("empty trajectory");
    if (measure == ComplexityMeasure::Turbulence) return turbulence(collapse_runs(t.labels, 1), 1);
    const std::size_t k =
        alphabet_size ? *alphabet_size : std::set<std::string_view>(t.labels.begin(), t.labels.end()).size();
    return complexity_index(std::span<const std::string>(t.labels), k);
}

UserRrs rrs(const SessionSet& sessions, int slot_width_min, TzOffset tz, RepeatRule rule) {
    if (slot_width_min <= 0 || 1440 % slot_width_min != 0) throw ConfigError("slot width must divide 1440 minutes");
    UserRrs report;
    report.user_id = sessions.user_id;
    report.slot_width_min = slot_width_min;
    report.n_sessions = sessions.sessions.size();
    if (sessions.sessions.empty()) return report;

    std::vector<std::pair<std::int64_t, int>> keys;  // (day, slot) per session
    std::unordered_map<int, std::set<std::int64_t>> days_by_slot;
    std::set<std::int64_t> days;
    for (const auto& s : sessions.sessions) {
        const std::int64_t day = local_day(s.start_ts, tz);
        const int slot = local_minute_of_day(s.start_ts, tz) / slot_width_min;
        keys.emplace_back(day, slot);
        days_by_slot[slot].insert(day);
        days.insert(day);
    }
    for (const auto& [day, slot] : keys) {
        const auto& occupied = days_by_slot.at(slot);
        const bool repeated = rule == RepeatRule::AnyOtherDay ? occupied.size() > 1
                                                              : occupied.count(day - 1) || occupied.count(day + 1);
        if (repeated) ++report.n_repeated;
    }
    report.n_observed_days = days.size();
    report.rrs = static_cast<double>(report.n_repeated) / static_cast<double>(report.n_sessions);
    return report;
}

std::string_view to_string(DayType type) { return type == DayType::Weekend ? "weekend" : "weekday"; }

DayType day_type(std::int64_t day, const WeekendDays& weekend) {
    return weekend.test(iso_weekday(day) - 1) ? DayType::Weekend : DayType::Weekday;
}

RhythmReport circadian_rhythm(std::span<const Trajectory> trajectories, std::span<const double> complexities,
                              const WeekendDays& weekend, std::size_t min_n) {
    if (trajectories.size() != complexities.size()) throw ConfigError("one complexity per trajectory required");
    std::array<std::array<Moments, 2>, 24> acc{};
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const auto& t = trajectories[i];
        if (t.scope != Scope::UserDayHour || !t.hour) throw DataError("rhythm requires hour-scoped trajectories");
        acc[static_cast<std::size_t>(*t.hour)][static_cast<std::size_t>(day_type(t.day, weekend))].add(complexities[i]);
    }
    RhythmReport report;
    report.min_n = min_n;
    for (std::size_t h = 0; h < 24; ++h)
        for (std::size_t k = 0; k < 2; ++k) report.cells[h][k] = acc[h][k].cell(min_n);
    return report;
}

std::array<RhythmCell, 2> daytype_summary(std::span<const Trajectory> trajectories, std::span<const double> complexities,
                                          const WeekendDays& weekend, std::size_t min_n) {
    if (trajectories.size() != complexities.size()) throw ConfigError("one complexity per trajectory required");
    std::array<Moments, 2> acc{};
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        if (trajectories[i].scope != Scope::UserDay) throw DataError("day-type summary requires day-scoped trajectories");
        acc[static_cast<std::size_t>(day_type(trajectories[i].day, weekend))].add(complexities[i]);
    }
    return {acc[0].cell(min_n), acc[1].cell(min_n)};
}

void write_rrs_csv(std::ostream& out, std::span<const UserRrs> reports) {
    out << "user,rrs,n_sessions,n_repeated,days\n";
    for (const auto& r : reports) {
        if (!r.rrs) continue;
        out << csv::escape(r.user_id) << ',' << csv::format_double(*r.rrs) << ',' << r.n_sessions << ','
            << r.n_repeated << ',' << r.n_observed_days << '\n';
    }
}

void write_rhythm_csv(std::ostream& out, const RhythmReport& report) {
    out << "hour,daytype,mean,std,n\n";
    for (int h = 0; h < 24; ++h) {
        for (const DayType type : {DayType::Weekday, DayType::Weekend}) {
            out << h << ',' << to_string(type) << ',';
            write_cell(out, report.at(h, type));
        }
    }
}

void write_daytype_csv(std::ostream& out, const std::array<RhythmCell, 2>& cells) {
    out << "daytype,mean,std,n\n";
    for (const DayType type : {DayType::Weekday, DayType::Weekend}) {
        out << to_string(type) << ',';
        write_cell(out, cells[static_cast<std::size_t>(type)]);
    }
}

}  // namespace behavtrace
