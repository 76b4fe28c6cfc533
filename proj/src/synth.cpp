#include "behavtrace/synth.hpp"

#include "behavtrace/error.hpp"
#include "behavtrace/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace behavtrace::synth {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Upper bound on a single generated gap (about 31,700 years); keeps heavy
// tails with alpha near 1 from overflowing the timestamp.
constexpr double kMaxGapMs = 1e15;

void check(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError("invalid generator spec: '" + field + "' " + what);
}

std::vector<std::string> script_alphabet(const Scheduled& spec) {
    std::set<std::string> symbols;
    for (const auto& script : spec.category_script)
        for (char c : script) symbols.insert(std::string(1, c));
    return {symbols.begin(), symbols.end()};
}

}  // namespace

void validate(const GeneratorSpec& spec) {
    std::visit(overloaded{
                   [](const ParetoGaps& s) {
                       check(s.alpha > 1.0 && std::isfinite(s.alpha), "alpha", "must be > 1");
                       check(s.xmin_ms > 0, "xmin_ms", "must be > 0");
                       check(s.n_events >= 1, "n_events", "must be >= 1");
                       check(!s.behavior_mix.empty(), "behavior_mix", "must not be empty");
                       double total = 0.0;
                       for (const auto& b : s.behavior_mix) {
                           check(!b.behavior.empty() && !b.category.empty(), "behavior_mix", "needs behavior and category ids");
                           check(b.weight >= 0.0, "behavior_mix", "weights must be non-negative");
                           total += b.weight;
                       }
                       check(std::abs(total - 1.0) <= 1e-9, "behavior_mix", "weights must sum to 1");
                       check(s.stickiness >= 0.0 && s.stickiness < 1.0, "stickiness", "must be in [0, 1)");
                       check(!s.user_id.empty(), "user_id", "must not be empty");
                   },
                   [](const PriorityQueue& s) {
                       check(s.list_length >= 2, "list_length", "must be >= 2");
                       check(s.p > 0.0 && s.p < 1.0, "p", "must be in (0, 1)");
                       check(s.steps >= 1, "steps", "must be >= 1");
                       check(s.step_ms > 0, "step_ms", "must be > 0");
                       check(!s.user_id.empty(), "user_id", "must not be empty");
                   },
                   [](const Scheduled& s) {
                       check(!s.daily_slots.empty(), "daily_slots", "must not be empty");
                       for (int m : s.daily_slots) check(m >= 0 && m < 1440, "daily_slots", "entries must be in [0, 1440)");
                       check(s.jitter_min >= 0, "jitter_min", "must be >= 0");
                       check(s.n_days >= 1, "n_days", "must be >= 1");
                       check(s.events_per_session >= 1, "events_per_session", "must be >= 1");
                       check(s.category_script.size() == 1 || s.category_script.size() == s.daily_slots.size(),
                             "category_script", "needs one script, or one per slot");
                       for (const auto& script : s.category_script)
                           check(!script.empty(), "category_script", "entries must not be empty");
                       check(s.intra_gap_ms >= 0, "intra_gap_ms", "must be >= 0");
                       check(s.category_noise >= 0.0 && s.category_noise < 1.0, "category_noise", "must be in [0, 1)");
                       check(!s.user_id.empty(), "user_id", "must not be empty");
                   },
               },
               spec);
}

GeneratedTrace gen_pareto_trace(const ParetoGaps& spec, std::uint64_t seed) {
    validate(spec);
    Rng rng(seed);
    std::vector<double> weights;
    std::map<std::string, double> category_mass;
    for (const auto& b : spec.behavior_mix) {
        weights.push_back(b.weight);
        category_mass[b.category] += b.weight;
    }

    GeneratedTrace out;
    out.trace.user_id = spec.user_id;
    out.trace.events.reserve(spec.n_events);
    Timestamp ts = spec.start;
    std::size_t previous = 0;
    for (std::size_t i = 0; i < spec.n_events; ++i) {
        if (i > 0) {
            const double u = rng.uniform_open_closed();
            const double gap = std::min(kMaxGapMs, static_cast<double>(spec.xmin_ms) * std::pow(u, -1.0 / (spec.alpha - 1.0)));
            ts = ts + static_cast<Millis>(std::llround(gap));
        }
        const bool stick = i > 0 && rng.bernoulli(spec.stickiness);
        const std::size_t choice = stick ? previous : rng.categorical(weights);
        previous = choice;
        const auto& b = spec.behavior_mix[choice];
        Event e;
        e.user_id = spec.user_id;
        e.ts = ts;
        e.behavior_id = b.behavior;
        e.category_id = b.category;
        out.trace.events.push_back(std::move(e));
    }
    out.trace.normalize();

    double same = 0.0;
    for (const auto& [_, q] : category_mass) same += q * q;
    auto& truth = out.truth;
    truth.generator = "pareto";
    truth.seed = seed;
    truth.alpha = spec.alpha;
    truth.xmin_ms = spec.xmin_ms;
    truth.stickiness = spec.stickiness;
    truth.expected_assortative_share = spec.stickiness + (1.0 - spec.stickiness) * same;
    return out;
}

PriorityQueueOutput gen_priority_queue(const PriorityQueue& spec, std::uint64_t seed) {
    validate(spec);
    Rng rng(seed);
    struct Task {
        double priority;
        std::uint64_t inserted;
    };
    std::vector<Task> tasks(spec.list_length);
    for (auto& t : tasks) t = {rng.uniform01(), 0};

    PriorityQueueOutput out;
    out.waiting_times.reserve(spec.steps);
    out.trace.user_id = spec.user_id;
    if (spec.emit_trace) out.trace.events.reserve(spec.steps);
    for (std::uint64_t step = 1; step <= spec.steps; ++step) {
        std::size_t pick = 0;
        if (rng.bernoulli(spec.p)) {
            for (std::size_t i = 1; i < tasks.size(); ++i)
                if (tasks[i].priority > tasks[pick].priority) pick = i;
        } else {
            pick = static_cast<std::size_t>(rng.below(tasks.size()));
        }
        out.waiting_times.push_back(step - tasks[pick].inserted);
        tasks[pick] = {rng.uniform01(), step};
        if (spec.emit_trace) {
            Event e;
            e.user_id = spec.user_id;
            e.ts = spec.start + static_cast<Millis>(step) * spec.step_ms;
            e.behavior_id = "task";
            e.category_id = "task";
            out.trace.events.push_back(std::move(e));
        }
    }
    out.truth.generator = "priority_queue";
    out.truth.seed = seed;
    out.truth.expected_mean_wait_random = static_cast<double>(spec.list_length);
    return out;
}

GeneratedTrace gen_scheduled_trace(const Scheduled& spec, std::uint64_t seed) {
    validate(spec);
    Rng rng(seed);
    const auto alphabet = script_alphabet(spec);
    const std::int64_t tz_shift = static_cast<std::int64_t>(spec.tz.minutes) * kMsPerMinute;

    GeneratedTrace out;
    out.trace.user_id = spec.user_id;
    out.trace.tz = spec.tz;
    for (std::size_t day = 0; day < spec.n_days; ++day) {
        for (std::size_t s = 0; s < spec.daily_slots.size(); ++s) {
            const Millis jitter_ms = static_cast<Millis>(spec.jitter_min) * kMsPerMinute;
            const Millis offset = jitter_ms > 0 ? rng.between(-jitter_ms, jitter_ms) : 0;
            const std::int64_t local_start = spec.start.epoch_ms + static_cast<std::int64_t>(day) * kMsPerDay +
                                             spec.daily_slots[s] * kMsPerMinute + offset;
            const auto& script = spec.category_script.size() == 1 ? spec.category_script[0] : spec.category_script[s];
            for (std::size_t k = 0; k < spec.events_per_session; ++k) {
                std::string category(1, script[k % script.size()]);
                if (spec.category_noise > 0.0 && rng.bernoulli(spec.category_noise))
                    category = alphabet[rng.below(alphabet.size())];
                Event e;
                e.user_id = spec.user_id;
                e.ts = Timestamp{local_start - tz_shift + static_cast<Millis>(k) * spec.intra_gap_ms};
                e.behavior_id = "app_" + category;
                e.category_id = std::move(category);
                out.trace.events.push_back(std::move(e));
            }
        }
    }
    out.trace.normalize();

    auto& truth = out.truth;
    truth.generator = "scheduled";
    truth.seed = seed;
    truth.slots = spec.daily_slots;
    truth.expected_sessions = spec.n_days * spec.daily_slots.size();
    bool within_slot = true;
    for (int m : spec.daily_slots) {
        const int lo = m - spec.jitter_min;
        const int hi = m + spec.jitter_min;
        within_slot = within_slot && lo >= 0 && hi < 1440 && lo / kTruthSlotWidthMin == hi / kTruthSlotWidthMin;
    }
    if (spec.n_days == 1) {
        truth.rrs_guaranteed = true;
        truth.expected_rrs = 0.0;
    } else if (within_slot) {
        truth.rrs_guaranteed = true;
        truth.expected_rrs = 1.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON spec and ground-truth sidecar

namespace {

using nlohmann::json;

const json& require(const json& j, const char* field) {
    const auto it = j.find(field);
    if (it == j.end() || it->is_null()) throw ConfigError(std::string("invalid generator spec: missing '") + field + "'");
    return *it;
}

template <class T>
T get_as(const json& j, const char* field) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("invalid generator spec: '") + field + "' has the wrong type");
    }
}

template <class T>
T field_or(const json& j, const char* field, T fallback) {
    const auto it = j.find(field);
    if (it == j.end() || it->is_null()) return fallback;
    return get_as<T>(*it, field);
}

template <class T>
T required(const json& j, const char* field) {
    return get_as<T>(require(j, field), field);
}

template <class Spec>
void read_common(const json& j, Spec& s) {
    s.user_id = field_or<std::string>(j, "user_id", s.user_id);
    s.start = Timestamp{field_or<std::int64_t>(j, "start_ms", s.start.epoch_ms)};
}

}  // namespace

GeneratorSpec parse_spec(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("invalid generator spec: ") + ex.what());
    }
    if (!j.is_object()) throw ConfigError("invalid generator spec: expected a JSON object");
    const auto kind = required<std::string>(j, "generator");

    GeneratorSpec spec;
    if (kind == "pareto") {
        ParetoGaps s;
        s.alpha = required<double>(j, "alpha");
        s.n_events = required<std::size_t>(j, "n_events");
        s.xmin_ms = field_or<Millis>(j, "xmin_ms", s.xmin_ms);
        s.stickiness = field_or<double>(j, "stickiness", s.stickiness);
        if (const auto it = j.find("behavior_mix"); it != j.end()) {
            if (!it->is_array()) throw ConfigError("invalid generator spec: 'behavior_mix' must be an array");
            s.behavior_mix.clear();
            for (const auto& b : *it) {
                if (!b.is_object()) throw ConfigError("invalid generator spec: 'behavior_mix' entries must be objects");
                s.behavior_mix.push_back({required<std::string>(b, "behavior"), required<std::string>(b, "category"),
                                          required<double>(b, "weight")});
            }
        }
        read_common(j, s);
        spec = s;
    } else if (kind == "priority_queue") {
        PriorityQueue s;
        s.list_length = required<std::size_t>(j, "list_length");
        s.p = required<double>(j, "p");
        s.steps = required<std::size_t>(j, "steps");
        s.step_ms = field_or<Millis>(j, "step_ms", s.step_ms);
        read_common(j, s);
        spec = s;
    } else if (kind == "scheduled") {
        Scheduled s;
        s.daily_slots = required<std::vector<int>>(j, "daily_slots");
        s.n_days = required<std::size_t>(j, "n_days");
        s.jitter_min = field_or<int>(j, "jitter_min", s.jitter_min);
        s.events_per_session = field_or<std::size_t>(j, "events_per_session", s.events_per_session);
        s.category_script = field_or<std::vector<std::string>>(j, "category_script", s.category_script);
        s.intra_gap_ms = field_or<Millis>(j, "intra_gap_ms", s.intra_gap_ms);
        s.category_noise = field_or<double>(j, "category_noise", s.category_noise);
        s.tz = TzOffset{field_or<int>(j, "tz_offset_min", 0)};
        read_common(j, s);
        spec = s;
    } else {
        throw ConfigError("invalid generator spec: unknown 'generator' \"" + kind + "\"");
    }
    validate(spec);
    return spec;
}

void write_ground_truth_json(std::ostream& out, const GroundTruth& t) {
    nlohmann::ordered_json j;
    j["generator"] = t.generator;
    j["seed"] = t.seed;
    auto opt = [&](const char* key, const auto& v) {
        if (v) j[key] = *v;
    };
    opt("alpha", t.alpha);
    opt("xmin_ms", t.xmin_ms);
    opt("stickiness", t.stickiness);
    opt("expected_assortative_share", t.expected_assortative_share);
    if (t.generator == "scheduled") {
        j["slots"] = t.slots;
        j["rrs_slot_width_min"] = kTruthSlotWidthMin;
        j["rrs_guaranteed"] = t.rrs_guaranteed;
        if (t.expected_rrs) j["expected_rrs"] = *t.expected_rrs;
        else j["expected_rrs"] = "not guaranteed";
    }
    opt("expected_sessions", t.expected_sessions);
    opt("expected_mean_wait_random", t.expected_mean_wait_random);
    out << j.dump(2) << '\n';
}

}  // namespace behavtrace::synth
