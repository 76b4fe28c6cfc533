#pragma once

#include "behavtrace/patterns.hpp"

#include <array>
#include <bitset>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace behavtrace {

enum class Scope { UserDay, UserDayHour };

/// Session labels of one user over one local day (or one hour of it).
struct Trajectory {
    std::string user_id;
    Scope scope = Scope::UserDay;
    std::int64_t day = 0;        // local days since 1970-01-01
    std::optional<int> hour;     // set for UserDayHour
    std::vector<std::string> labels;
};

/// Label = category with the largest summed duration (ties: earliest).
struct DominantCategory {};

/// Label = "P<k>" for the medoid a session was assigned to; sessions without
/// an assignment fall back to their dominant category.
struct MedoidLabels {
    const PatternSet* patterns = nullptr;
};

using Labeling = std::variant<DominantCategory, MedoidLabels>;

std::vector<std::string> label_sessions(const SessionSet& sessions, const UserTrace& trace, const Labeling& labeling);

/// Groups sessions by the local day (and hour) of their start.
std::vector<Trajectory> build_trajectories(const SessionSet& sessions, const UserTrace& trace,
                                           const Labeling& labeling, Scope scope);

enum class ComplexityMeasure { CompositeIndex, Turbulence };

std::string_view to_string(ComplexityMeasure measure);
std::optional<ComplexityMeasure> parse_complexity_measure(std::string_view text);

/// Composite index over the label sequence, or turbulence of the
/// run-collapsed labels with one time unit per label. The composite index
/// uses `alphabet_size` when given, else the number of distinct labels in t.
double trajectory_complexity(const Trajectory& t, ComplexityMeasure measure,
                             std::optional<std::size_t> alphabet_size = std::nullopt);

enum class RepeatRule {
    AnyOtherDay,     // same slot occupied on any other observed day
    AdjacentDay,     // same slot occupied on the previous or next calendar day
};

struct UserRrs {
    std::string user_id;
    std::optional<double> rrs;   // absent when the user has no sessions
    std::size_t n_sessions = 0;
    std::size_t n_repeated = 0;
    int slot_width_min = 60;
    std::size_t n_observed_days = 0;
};

/// Rate of Repeated Sessions: share of sessions whose local start slot is
/// also occupied on another observed day.
UserRrs rrs(const SessionSet& sessions, int slot_width_min, TzOffset tz, RepeatRule rule = RepeatRule::AnyOtherDay);

/// Weekend membership by ISO weekday (bit 0 = Monday ... bit 6 = Sunday).
using WeekendDays = std::bitset<7>;
inline const WeekendDays kSaturdaySunday{0b1100000};

enum class DayType : std::uint8_t { Weekday = 0, Weekend = 1 };
std::string_view to_string(DayType type);
DayType day_type(std::int64_t day, const WeekendDays& weekend);

struct RhythmCell {
    std::size_t n = 0;
    std::optional<double> mean;  // present when n >= the report's min_n
    std::optional<double> std;   // population standard deviation
};

/// Complexity by local hour x day type.
struct RhythmReport {
    std::size_t min_n = 5;
    std::array<std::array<RhythmCell, 2>, 24> cells{};

    const RhythmCell& at(int hour, DayType type) const {
        return cells[static_cast<std::size_t>(hour)][static_cast<std::size_t>(type)];
    }
};

/// Requires UserDayHour trajectories (DataError otherwise) and one
/// complexity per trajectory.
RhythmReport circadian_rhythm(std::span<const Trajectory> trajectories, std::span<const double> complexities,
                              const WeekendDays& weekend = kSaturdaySunday, std::size_t min_n = 5);

/// Day-scope companion: complexity by day type over UserDay trajectories.
std::array<RhythmCell, 2> daytype_summary(std::span<const Trajectory> trajectories, std::span<const double> complexities,
                                          const WeekendDays& weekend = kSaturdaySunday, std::size_t min_n = 5);

/// CSV: user,rrs,n_sessions,n_repeated,days (users without sessions omitted).
void write_rrs_csv(std::ostream& out, std::span<const UserRrs> reports);
/// CSV: hour,daytype,mean,std,n (mean/std empty for thin cells).
void write_rhythm_csv(std::ostream& out, const RhythmReport& report);
/// CSV: daytype,mean,std,n.
void write_daytype_csv(std::ostream& out, const std::array<RhythmCell, 2>& cells);

}  // namespace behavtrace
