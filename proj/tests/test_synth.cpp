#include "helpers.hpp"

#include "behavtrace/error.hpp"
#include "behavtrace/regularity.hpp"
#include "behavtrace/synth.hpp"
#include "behavtrace/transitions.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sstream>

using namespace behavtrace;

namespace {

std::string as_jsonl(const UserTrace& t) {
    std::ostringstream out;
    for (const auto& e : t.events) write_event_jsonl(out, e);
    return out.str();
}

synth::GeneratorSpec parse(const std::string& text) {
    std::istringstream in(text);
    return synth::parse_spec(in);
}

std::string config_error(const std::string& text) {
    try {
        auto spec = parse(text);
        synth::validate(spec);
    } catch (const ConfigError& ex) {
        return ex.what();
    }
    return "";
}

}  // namespace

TEST_CASE("pareto generator") {
    synth::ParetoGaps spec;
    spec.n_events = 20'000;
    spec.alpha = 2.5;
    const auto a = synth::gen_pareto_trace(spec, 42);
    const auto b = synth::gen_pareto_trace(spec, 42);
    CHECK(as_jsonl(a.trace) == as_jsonl(b.trace));
    CHECK(as_jsonl(a.trace) != as_jsonl(synth::gen_pareto_trace(spec, 43).trace));
    CHECK(a.trace.events.size() == spec.n_events);

    const auto gaps = inter_event_intervals(a.trace);
    CHECK(*std::min_element(gaps.begin(), gaps.end()) >= spec.xmin_ms);
    // Density ~ x^-alpha above xmin has mean xmin * (alpha - 1) / (alpha - 2).
    double mean = 0.0;
    for (auto g : gaps) mean += static_cast<double>(g);
    mean /= static_cast<double>(gaps.size());
    CHECK(mean == doctest::Approx(1000.0 * 1.5 / 0.5).epsilon(0.1));

    CHECK(a.truth.alpha == std::optional<double>(2.5));
    CHECK(a.truth.expected_assortative_share == std::optional<double>(0.5));
}

TEST_CASE("pareto stickiness baseline") {
    synth::ParetoGaps spec;
    spec.n_events = 100'001;
    spec.xmin_ms = 60'000;
    const auto g = synth::gen_pareto_trace(spec, 7);
    // One long session holds every transition.
    const auto sessions = sessionize_fixed(g.trace, std::numeric_limits<Millis>::max() / 4);
    const auto m = count_transitions(sessions, g.trace, std::vector<std::string>{"A", "B"});
    CHECK(m.n_transitions == 100'000);
    const auto share = assortativity_split(transition_rates(m)).overall_assortative_share;
    CHECK(share == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("priority queue generator") {
    synth::PriorityQueue spec;
    spec.list_length = 10;
    spec.p = 1e-9;
    spec.steps = 1'000'000;
    spec.emit_trace = false;
    const auto out = synth::gen_priority_queue(spec, 5);
    REQUIRE(!out.waiting_times.empty());
    double mean = 0.0;
    for (auto w : out.waiting_times) mean += static_cast<double>(w);
    mean /= static_cast<double>(out.waiting_times.size());
    CHECK(std::abs(mean - 10.0) <= 0.5);
    CHECK(out.trace.events.empty());

    synth::PriorityQueue small;
    small.steps = 1000;
    const auto x = synth::gen_priority_queue(small, 9);
    const auto y = synth::gen_priority_queue(small, 9);
    CHECK(x.waiting_times == y.waiting_times);
    CHECK(x.trace.events.size() == 1000);
    CHECK(x.waiting_times.size() == 1000);
}

TEST_CASE("scheduled generator") {
    synth::Scheduled spec;
    spec.daily_slots = {9 * 60, 21 * 60};
    spec.n_days = 14;
    const auto g = synth::gen_scheduled_trace(spec, 1);
    CHECK(g.trace.events.size() == 14 * 2 * spec.events_per_session);
    CHECK(g.truth.expected_rrs == std::optional<double>(1.0));
    CHECK(g.truth.expected_sessions == std::optional<std::size_t>(28));

    const auto sessions = sessionize_individual(g.trace, IndividualMedian{});
    CHECK(sessions.sessions.size() == 28);
    CHECK(rrs(sessions, 60, g.trace.tz).rrs == std::optional<double>(1.0));

    synth::Scheduled wide = spec;
    wide.jitter_min = 90;
    const auto w = synth::gen_scheduled_trace(wide, 1);
    CHECK_FALSE(w.truth.expected_rrs);
    CHECK_FALSE(w.truth.rrs_guaranteed);
    std::ostringstream sidecar;
    synth::write_ground_truth_json(sidecar, w.truth);
    CHECK(nlohmann::json::parse(sidecar.str())["expected_rrs"] == "not guaranteed");

    synth::Scheduled local = spec;
    local.tz = TzOffset{480};
    const auto l = synth::gen_scheduled_trace(local, 1);
    CHECK(local_minute_of_day(l.trace.events[0].ts, local.tz) == 9 * 60);
}

TEST_CASE("scheduled alternation raises hourly complexity") {
    synth::Scheduled spec;
    spec.daily_slots = {12 * 60, 12 * 60 + 15, 12 * 60 + 30, 12 * 60 + 45, 20 * 60, 20 * 60 + 15, 20 * 60 + 30, 20 * 60 + 45};
    spec.category_script = {"AAAA", "AAAA", "AAAA", "AAAA", "ABAB", "BABA", "ABAB", "BABA"};
    spec.events_per_session = 4;
    spec.n_days = 7;
    const auto g = synth::gen_scheduled_trace(spec, 3);
    const auto trace = impute_durations(g.trace);
    const auto sessions = sessionize_individual(trace, IndividualMedian{});
    const auto hourly = build_trajectories(sessions, trace, DominantCategory{}, Scope::UserDayHour);
    double noon = 0.0;
    double evening = 0.0;
    for (const auto& t : hourly) {
        const double c = trajectory_complexity(t, ComplexityMeasure::CompositeIndex, 2);
        (*t.hour == 12 ? noon : evening) += c;
    }
    CHECK(evening > noon);
}

TEST_CASE("spec parsing") {
    auto p = parse(R"({"generator":"pareto","alpha":2.0,"n_events":10,"stickiness":0.3,
        "behavior_mix":[{"behavior":"x","category":"X","weight":1.0}]})");
    REQUIRE(std::holds_alternative<synth::ParetoGaps>(p));
    CHECK(std::get<synth::ParetoGaps>(p).stickiness == 0.3);

    CHECK(config_error(R"({"generator":"pareto","n_events":10})").find("alpha") != std::string::npos);
    CHECK(config_error(R"({"generator":"pareto","alpha":0.5,"n_events":10})").find("alpha") != std::string::npos);
    CHECK(config_error(R"({"generator":"priority_queue","list_length":1,"p":0.5,"steps":3})").find("list_length") !=
          std::string::npos);
    CHECK(config_error(R"({"generator":"scheduled","daily_slots":[1500],"n_days":2})").find("daily_slots") !=
          std::string::npos);
    CHECK(config_error(R"({"generator":"nope"})").find("generator") != std::string::npos);
    CHECK(config_error("[1,2]") != "");
    CHECK(config_error("{oops") != "");
}

TEST_CASE("generated traces survive a parse round trip") {
    synth::Scheduled spec;
    spec.daily_slots = {600};
    spec.n_days = 3;
    const auto g = synth::gen_scheduled_trace(spec, 2);
    std::istringstream in(as_jsonl(g.trace));
    const auto parsed = parse_events(in, InputFormat::JsonLines, ParseOptions{.strict = true});
    CHECK(parsed.report.rejected == 0);
    CHECK(parsed.corpus.traces.at("u0").events == g.trace.events);
}
