#pragma once

#include "behavtrace/patterns.hpp"
#include "behavtrace/regularity.hpp"
#include "behavtrace/sessionizer.hpp"
#include "behavtrace/time_budget.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace behavtrace {

enum class TransitionMode { Pooled, UserMean };
enum class LabelMode { Dominant, Medoid };

/// Every knob of a batch run. Populated from defaults, then a TOML-style
/// config file, then command-line flags.
struct RunConfig {
    std::vector<std::string> inputs;
    std::string input_format = "auto";  // auto | jsonl | csv
    std::optional<std::string> taxonomy_path;
    UnmappedPolicy unmapped = UnmappedPolicy::OtherBucket;
    std::string out_dir = "out";
    TzOffset tz;
    bool strict = false;
    std::uint64_t seed = 0;
    unsigned threads = 0;

    ThresholdPolicy policy = IndividualMedian{};
    Millis duration_cap_ms = kDefaultDurationCapMs;

    TimeUnit count_unit = TimeUnit::Day;
    TransitionMode transition_mode = TransitionMode::Pooled;

    PatternParams patterns;

    int slot_width_min = 60;
    RepeatRule repeat_rule = RepeatRule::AnyOtherDay;
    WeekendDays weekend = kSaturdaySunday;
    ComplexityMeasure measure = ComplexityMeasure::CompositeIndex;
    LabelMode labeling = LabelMode::Dominant;
    std::size_t min_cell_n = 5;
};

/// Applies one "section.key" setting given as text. Throws ConfigError on an
/// unknown key or an out-of-range value.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Reads a TOML subset: [section] headers, key = value lines, # comments,
/// quoted strings, numbers, booleans, and flat arrays.
std::map<std::string, std::string> read_toml_settings(std::istream& in);

void load_config_file(RunConfig& config, const std::string& path);

/// Cross-field checks (policy ranges, slot width, costs, ...).
void validate(const RunConfig& config);

}  // namespace behavtrace
