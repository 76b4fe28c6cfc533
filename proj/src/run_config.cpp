#include "behavtrace/run_config.hpp"

#include "behavtrace/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace behavtrace {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty()) out.push_back(t);
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    T v{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError("setting '" + key + "': expected a number, got '" + value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError("setting '" + key + "': expected true or false");
}

[[noreturn]] void bad_choice(const std::string& key, const std::string& value) {
    throw ConfigError("setting '" + key + "': unsupported value '" + value + "'");
}

// Strips a TOML value down to its text: quotes removed from strings, arrays
// flattened to comma-separated items.
std::string toml_value(const std::string& raw, std::size_t line_no) {
    auto unquote = [&](std::string v) {
        v = trim(v);
        if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'')) {
            if (v.back() != v.front()) throw ConfigError("config line " + std::to_string(line_no) + ": unterminated string");
            return v.substr(1, v.size() - 2);
        }
        return v;
    };
    const std::string v = trim(raw);
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": unterminated array");
        std::string joined;
        for (const auto& item : split_list(v.substr(1, v.size() - 2))) {
            if (!joined.empty()) joined += ',';
            joined += unquote(item);
        }
        return joined;
    }
    return unquote(v);
}

// Drops a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

IndividualMedian& median_policy(RunConfig& c) {
    if (!std::holds_alternative<IndividualMedian>(c.policy)) c.policy = IndividualMedian{};
    return std::get<IndividualMedian>(c.policy);
}

}  // namespace

std::map<std::string, std::string> read_toml_settings(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(strip_comment(line));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": bad section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        out[section.empty() ? key : section + "." + key] = toml_value(t.substr(eq + 1), line_no);
    }
    return out;
}

void load_config_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    for (const auto& [key, value] : read_toml_settings(in)) apply_setting(config, key, value);
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "threads") c.threads = parse_number<unsigned>(key, value);
    else if (key == "out") c.out_dir = value;
    else if (key == "input.paths") c.inputs = split_list(value);
    else if (key == "input.format") {
        if (value != "auto" && value != "jsonl" && value != "csv") bad_choice(key, value);
        c.input_format = value;
    } else if (key == "input.taxonomy") c.taxonomy_path = value;
    else if (key == "input.unmapped") {
        if (value == "other") c.unmapped = UnmappedPolicy::OtherBucket;
        else if (value == "reject") c.unmapped = UnmappedPolicy::Reject;
        else bad_choice(key, value);
    } else if (key == "input.tz_offset_min") c.tz = TzOffset{parse_number<int>(key, value)};
    else if (key == "input.strict") c.strict = parse_bool(key, value);
    else if (key == "sessionize.policy") {
        if (value == "individual" || value == "individual_median") c.policy = IndividualMedian{};
        else if (value == "fixed") c.policy = FixedThreshold{30 * kMsPerMinute};
        else if (value == "screen") c.policy = ScreenBounded{};
        else bad_choice(key, value);
    } else if (key == "sessionize.threshold_ms") {
        c.policy = FixedThreshold{parse_number<Millis>(key, value)};
    } else if (key == "sessionize.min_gaps") median_policy(c).min_gaps = parse_number<std::size_t>(key, value);
    else if (key == "sessionize.fallback_ms") median_policy(c).fallback_ms = parse_number<Millis>(key, value);
    else if (key == "sessionize.clamp_min_ms") median_policy(c).clamp_min_ms = parse_number<Millis>(key, value);
    else if (key == "sessionize.orphans") {
        ScreenBounded s;
        if (value == "drop") s.orphan_policy = OrphanPolicy::Drop;
        else if (value == "own") s.orphan_policy = OrphanPolicy::OwnSession;
        else bad_choice(key, value);
        c.policy = s;
    } else if (key == "sessionize.duration_cap_ms") c.duration_cap_ms = parse_number<Millis>(key, value);
    else if (key == "budget.unit") {
        const auto u = parse_time_unit(value);
        if (!u) bad_choice(key, value);
        c.count_unit = *u;
    } else if (key == "transitions.mode") {
        if (value == "pooled") c.transition_mode = TransitionMode::Pooled;
        else if (value == "user_mean") c.transition_mode = TransitionMode::UserMean;
        else bad_choice(key, value);
    } else if (key == "sequences.sub") c.patterns.costs.sub = parse_number<double>(key, value);
    else if (key == "sequences.indel") c.patterns.costs.indel = parse_number<double>(key, value);
    else if (key == "sequences.cut_theta") c.patterns.cut_theta = parse_number<double>(key, value);
    else if (key == "sequences.max_cluster_sessions")
        c.patterns.max_cluster_sessions = parse_number<std::size_t>(key, value);
    else if (key == "regularity.slot_width_min") c.slot_width_min = parse_number<int>(key, value);
    else if (key == "regularity.repeat") {
        if (value == "any_day") c.repeat_rule = RepeatRule::AnyOtherDay;
        else if (value == "adjacent_day") c.repeat_rule = RepeatRule::AdjacentDay;
        else bad_choice(key, value);
    } else if (key == "regularity.weekend") {
        static const std::vector<std::string> names{"mon", "tue", "wed", "thu", "fri", "sat", "sun"};
        WeekendDays days;
        for (const auto& item : split_list(value)) {
            std::string lower = item.substr(0, 3);
            std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
            const auto it = std::find(names.begin(), names.end(), lower);
            if (it == names.end()) bad_choice(key, item);
            days.set(static_cast<std::size_t>(it - names.begin()));
        }
        c.weekend = days;
    } else if (key == "regularity.measure") {
        const auto m = parse_complexity_measure(value);
        if (!m) bad_choice(key, value);
        c.measure = *m;
    } else if (key == "regularity.labeling") {
        if (value == "dominant") c.labeling = LabelMode::Dominant;
        else if (value == "medoid") c.labeling = LabelMode::Medoid;
        else bad_choice(key, value);
    } else if (key == "regularity.min_cell_n") c.min_cell_n = parse_number<std::size_t>(key, value);
    else throw ConfigError("unknown setting '" + key + "'");
}

void validate(const RunConfig& c) {
    validate(c.policy);
    if (c.duration_cap_ms <= 0) throw ConfigError("sessionize.duration_cap_ms must be > 0");
    validate(c.patterns);
    if (c.slot_width_min <= 0 || 1440 % c.slot_width_min != 0)
        throw ConfigError("regularity.slot_width_min must divide 1440");
    if (c.tz.minutes < -24 * 60 || c.tz.minutes > 24 * 60) throw ConfigError("input.tz_offset_min out of range");
}

}  // namespace behavtrace
