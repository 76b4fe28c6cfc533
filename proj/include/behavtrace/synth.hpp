#pragma once

#include "behavtrace/trace_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace behavtrace::synth {

/// 2024-01-01T00:00:00Z, a Monday.
inline constexpr Timestamp kDefaultStart{1'704'067'200'000};

struct BehaviorChoice {
    std::string behavior;
    std::string category;
    double weight = 0.0;
};

/// I.i.d. Pareto(alpha, xmin) gaps with behaviors drawn from a mix; with
/// probability `stickiness` the previous behavior repeats instead.
struct ParetoGaps {
    double alpha = 2.5;
    Millis xmin_ms = 1000;
    std::size_t n_events = 1000;
    std::vector<BehaviorChoice> behavior_mix{{"app_A", "A", 0.5}, {"app_B", "B", 0.5}};
    double stickiness = 0.0;
    std::string user_id = "u0";
    Timestamp start = kDefaultStart;
};

/// Priority-list model of task execution: L tasks with Uniform(0,1)
/// priorities; each step runs the top task with probability p, otherwise a
/// uniformly random one, and replaces it with a fresh task.
struct PriorityQueue {
    std::size_t list_length = 2;
    double p = 0.5;
    std::size_t steps = 1000;
    Millis step_ms = 1000;
    bool emit_trace = true;
    std::string user_id = "u0";
    Timestamp start = kDefaultStart;
};

/// One session per daily slot, started at the slot's minute of day plus
/// uniform jitter. Script characters name the categories of the session's
/// events, cycling when the session is longer than its script.
struct Scheduled {
    std::vector<int> daily_slots;                 // minutes of day, local time
    int jitter_min = 0;
    std::size_t n_days = 14;
    std::size_t events_per_session = 3;
    std::vector<std::string> category_script{"A"};  // one per slot, or one for all
    Millis intra_gap_ms = 100;
    /// Probability that an event's category is redrawn uniformly from the
    /// script alphabet.
    double category_noise = 0.0;
    TzOffset tz;
    std::string user_id = "u0";
    Timestamp start = kDefaultStart;              // local midnight of day 0, as local epoch ms
};

using GeneratorSpec = std::variant<ParetoGaps, PriorityQueue, Scheduled>;

/// Throws ConfigError naming the offending field.
void validate(const GeneratorSpec& spec);

/// Parses a JSON spec: {"generator": "pareto" | "priority_queue" | "scheduled", ...fields}.
/// Throws ConfigError naming any missing or invalid field.
GeneratorSpec parse_spec(std::istream& in);

/// Slot width the expected RRS refers to.
inline constexpr int kTruthSlotWidthMin = 60;

struct GroundTruth {
    std::string generator;
    std::uint64_t seed = 0;
    std::optional<double> alpha;
    std::optional<Millis> xmin_ms;
    std::optional<double> stickiness;
    /// Expected same-category share of consecutive events:
    /// stickiness + (1 - stickiness) * sum_c q_c^2.
    std::optional<double> expected_assortative_share;
    std::vector<int> slots;
    std::optional<double> expected_rrs;
    bool rrs_guaranteed = false;
    std::optional<std::size_t> expected_sessions;
    std::optional<double> expected_mean_wait_random;  // L, the p -> 0 limit
};

void write_ground_truth_json(std::ostream& out, const GroundTruth& truth);

struct GeneratedTrace {
    UserTrace trace;
    GroundTruth truth;
};

struct PriorityQueueOutput {
    std::vector<std::uint64_t> waiting_times;
    UserTrace trace;
    GroundTruth truth;
};

GeneratedTrace gen_pareto_trace(const ParetoGaps& spec, std::uint64_t seed);
PriorityQueueOutput gen_priority_queue(const PriorityQueue& spec, std::uint64_t seed);
GeneratedTrace gen_scheduled_trace(const Scheduled& spec, std::uint64_t seed);

}  // namespace behavtrace::synth
