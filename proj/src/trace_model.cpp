#include "behavtrace/trace_model.hpp"

#include "behavtrace/csv.hpp"
#include "behavtrace/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>
#include <variant>

namespace behavtrace {

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::Behavior: return "behavior";
        case EventKind::ScreenOn: return "screen_on";
        case EventKind::ScreenOff: return "screen_off";
    }
    return "behavior";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
    if (text == "behavior") return EventKind::Behavior;
    if (text == "screen_on") return EventKind::ScreenOn;
    if (text == "screen_off") return EventKind::ScreenOff;
    return std::nullopt;
}

bool canonical_less(const Event& a, const Event& b) {
    return std::tie(a.ts, a.kind, a.behavior_id, a.user_id, a.category_id, a.duration_ms) <
           std::tie(b.ts, b.kind, b.behavior_id, b.user_id, b.category_id, b.duration_ms);
}

// ---------------------------------------------------------------------------
// Taxonomy

Taxonomy Taxonomy::from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs,
                              std::vector<std::string> categories) {
    Taxonomy t;
    const bool explicit_list = !categories.empty();
    std::set<std::string> listed(categories.begin(), categories.end());
    if (listed.size() != categories.size()) throw DataError("taxonomy: duplicate category in list");
    t.categories_ = std::move(categories);

    for (const auto& [behavior, category] : pairs) {
        if (behavior.empty() || category.empty())
            throw DataError("taxonomy: empty behavior or category id");
        auto [it, inserted] = t.mapping_.emplace(behavior, category);
        if (!inserted && it->second != category)
            throw DataError("taxonomy: behavior '" + behavior + "' maps to both '" + it->second +
                            "' and '" + category + "'");
        if (!listed.count(category)) {
            if (explicit_list)
                throw DataError("taxonomy: category '" + category + "' is not in the category list");
            listed.insert(category);
            t.categories_.push_back(category);
        }
    }
    return t;
}

Taxonomy Taxonomy::from_csv(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    std::vector<std::string> fields;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        if (!csv::split_line(line, fields) || fields.size() != 2)
            throw DataError("taxonomy line " + std::to_string(line_no) + ": expected behavior_id,category_id");
        if (line_no == 1 && fields[0] == "behavior_id") continue;
        pairs.emplace_back(fields[0], fields[1]);
    }
    return from_pairs(pairs);
}

const std::string* Taxonomy::lookup(std::string_view behavior_id) const {
    const auto it = mapping_.find(std::string(behavior_id));
    return it == mapping_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Trace containers

void UserTrace::normalize() {
    std::sort(events.begin(), events.end(), canonical_less);
    events.erase(std::unique(events.begin(), events.end()), events.end());
}

std::vector<const Event*> UserTrace::behaviors() const {
    std::vector<const Event*> out;
    out.reserve(events.size());
    for (const auto& e : events)
        if (e.is_behavior()) out.push_back(&e);
    return out;
}

std::size_t TraceCorpus::event_count() const {
    std::size_t n = 0;
    for (const auto& [_, trace] : traces) n += trace.events.size();
    return n;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct RawRecord {
    std::optional<std::string> user;
    std::optional<Timestamp> ts;
    std::string ts_error;
    std::optional<std::string> behavior;
    std::optional<std::string> category;
    std::optional<Millis> duration_ms;
    std::string duration_error;
    std::optional<std::string> kind;
};

std::optional<std::int64_t> parse_int(std::string_view s) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<Timestamp> parse_ts_text(std::string_view s) {
    if (auto v = parse_int(s)) {
        if (*v < 0) return std::nullopt;
        return Timestamp{*v};
    }
    return parse_rfc3339(s);
}

// Builds an Event or returns the rejection reason.
std::variant<Event, std::string> build_event(RawRecord r) {
    if (!r.user || r.user->empty()) return std::string("missing user");
    if (!r.ts) return r.ts_error.empty() ? std::string("missing ts") : r.ts_error;
    EventKind kind = EventKind::Behavior;
    if (r.kind) {
        const auto k = parse_event_kind(*r.kind);
        if (!k) return "unknown kind '" + *r.kind + "'";
        kind = *k;
    }
    if (!r.duration_error.empty()) return r.duration_error;
    Event e;
    e.user_id = std::move(*r.user);
    e.ts = *r.ts;
    e.kind = kind;
    e.behavior_id = r.behavior.value_or("");
    if (r.category && !r.category->empty()) e.category_id = std::move(*r.category);
    if (kind == EventKind::Behavior) {
        if (e.behavior_id.empty()) return std::string("missing behavior");
        e.duration_ms = r.duration_ms;
    } else if (r.duration_ms) {
        return std::string("duration_ms not allowed on screen events");
    }
    return e;
}

RawRecord raw_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
    RawRecord r;
    auto string_field = [&](const char* key) -> std::optional<std::string> {
        const auto it = j.find(key);
        if (it == j.end() || it->is_null()) return std::nullopt;
        if (!it->is_string()) throw std::invalid_argument(std::string("field '") + key + "' is not a string");
        return it->get<std::string>();
    };
    r.user = string_field("user");
    r.behavior = string_field("behavior");
    r.category = string_field("category");
    r.kind = string_field("kind");

    if (const auto it = j.find("ts"); it != j.end() && !it->is_null()) {
        if (it->is_number_unsigned()) {
            r.ts = Timestamp{static_cast<std::int64_t>(it->get<std::uint64_t>())};
        } else if (it->is_number_integer()) {
            const auto v = it->get<std::int64_t>();
            if (v < 0) r.ts_error = "negative ts";
            else r.ts = Timestamp{v};
        } else if (it->is_string()) {
            r.ts = parse_rfc3339(it->get<std::string>());
            if (!r.ts) r.ts_error = "unparseable ts '" + it->get<std::string>() + "'";
        } else {
            r.ts_error = "ts must be an integer or RFC 3339 string";
        }
    }
    if (const auto it = j.find("duration_ms"); it != j.end() && !it->is_null()) {
        if (it->is_number_unsigned()) r.duration_ms = static_cast<Millis>(it->get<std::uint64_t>());
        else if (it->is_number_integer() && it->get<std::int64_t>() >= 0) r.duration_ms = it->get<std::int64_t>();
        else r.duration_error = "duration_ms must be a non-negative integer";
    }
    return r;
}

RawRecord raw_from_csv(const std::vector<std::string>& f) {
    if (f.size() != 6) throw std::invalid_argument("expected 6 columns, got " + std::to_string(f.size()));
    RawRecord r;
    auto opt = [](const std::string& s) -> std::optional<std::string> {
        if (s.empty()) return std::nullopt;
        return s;
    };
    r.user = opt(f[0]);
    if (!f[1].empty()) {
        r.ts = parse_ts_text(f[1]);
        if (!r.ts) r.ts_error = "unparseable ts '" + f[1] + "'";
    }
    r.behavior = opt(f[2]);
    r.category = opt(f[3]);
    if (!f[4].empty()) {
        const auto d = parse_int(f[4]);
        if (!d || *d < 0) r.duration_error = "duration_ms must be a non-negative integer";
        else r.duration_ms = *d;
    }
    r.kind = opt(f[5]);
    return r;
}

std::string utc_now() {
    const auto now = std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
    return format_rfc3339(Timestamp{now.time_since_epoch().count()}, TzOffset{});
}

}  // namespace

ParseResult parse_events(std::istream& in, InputFormat format, const ParseOptions& options) {
    ParseResult result;
    result.corpus.provenance = {options.source, utc_now()};
    auto& report = result.report;

    auto reject = [&](std::size_t line_no, const std::string& reason) {
        const std::string msg = "line " + std::to_string(line_no) + ": " + reason;
        if (options.strict) throw DataError(msg);
        ++report.rejected;
        if (report.reasons.size() < ParseReport::kMaxReasons) report.reasons.push_back(msg);
    };

    std::map<std::string, UserTrace>& traces = result.corpus.traces;
    std::string line;
    std::vector<std::string> fields;
    std::size_t line_no = 0;
    bool header_seen = format != InputFormat::Csv;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (!csv::valid_utf8(line)) {
            reject(line_no, "invalid UTF-8");
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            if (csv::split_line(line, fields) && !fields.empty() && fields[0] == "user") continue;
            throw DataError("CSV input must start with the header user,ts,behavior,category,duration_ms,kind");
        }

        RawRecord raw;
        try {
            if (format == InputFormat::JsonLines) {
                raw = raw_from_json(nlohmann::json::parse(line));
            } else {
                if (!csv::split_line(line, fields)) throw std::invalid_argument("unterminated quote");
                raw = raw_from_csv(fields);
            }
        } catch (const std::exception& ex) {
            reject(line_no, std::string("malformed record: ") + ex.what());
            continue;
        }

        auto built = build_event(std::move(raw));
        if (auto* reason = std::get_if<std::string>(&built)) {
            reject(line_no, *reason);
            continue;
        }
        auto& event = std::get<Event>(built);
        auto& trace = traces[event.user_id];
        if (trace.user_id.empty()) {
            trace.user_id = event.user_id;
            trace.tz = options.default_tz;
        }
        trace.events.push_back(std::move(event));
        ++report.accepted;
    }

    for (auto& [_, trace] : traces) {
        const auto before = trace.events.size();
        trace.normalize();
        report.duplicates += before - trace.events.size();
    }
    return result;
}

void write_event_jsonl(std::ostream& out, const Event& e) {
    nlohmann::ordered_json j;
    j["user"] = e.user_id;
    j["ts"] = e.ts.epoch_ms;
    j["behavior"] = e.behavior_id;
    if (e.category_id) j["category"] = *e.category_id;
    if (e.duration_ms) j["duration_ms"] = *e.duration_ms;
    j["kind"] = to_string(e.kind);
    out << j.dump() << '\n';
}

void write_events_jsonl(std::ostream& out, const TraceCorpus& corpus) {
    for (const auto& [_, trace] : corpus.traces)
        for (const auto& e : trace.events) write_event_jsonl(out, e);
}

// ---------------------------------------------------------------------------
// Categories, intervals, durations

UserTrace attach_categories(const UserTrace& trace, const Taxonomy& taxonomy, UnmappedPolicy policy) {
    UserTrace out = trace;
    for (auto& e : out.events) {
        if (!e.is_behavior()) continue;
        if (const auto* cat = taxonomy.lookup(e.behavior_id)) {
            e.category_id = *cat;
        } else if (policy == UnmappedPolicy::OtherBucket) {
            e.category_id = std::string(kOtherCategory);
        } else {
            throw DataError("unmapped behavior_id '" + e.behavior_id + "'");
        }
    }
    // Category participates in the canonical order.
    out.normalize();
    return out;
}

TraceCorpus attach_categories(const TraceCorpus& corpus, const Taxonomy& taxonomy, UnmappedPolicy policy) {
    TraceCorpus out;
    out.provenance = corpus.provenance;
    for (const auto& [id, trace] : corpus.traces) out.traces.emplace(id, attach_categories(trace, taxonomy, policy));
    return out;
}

std::vector<Millis> inter_event_intervals(const UserTrace& trace) {
    std::vector<Millis> gaps;
    const Event* prev = nullptr;
    for (const auto& e : trace.events) {
        if (!e.is_behavior()) continue;
        if (prev) gaps.push_back(e.ts - prev->ts);
        prev = &e;
    }
    return gaps;
}

UserTrace impute_durations(const UserTrace& trace, Millis cap_ms) {
    if (cap_ms <= 0) throw ConfigError("duration cap must be positive");
    UserTrace out = trace;
    Event* pending = nullptr;
    for (auto& e : out.events) {
        if (!e.is_behavior()) continue;
        if (pending) pending->duration_ms = std::min(e.ts - pending->ts, cap_ms);
        pending = e.duration_ms ? nullptr : &e;
    }
    if (pending) pending->duration_ms = cap_ms;
    return out;
}

}  // namespace behavtrace
