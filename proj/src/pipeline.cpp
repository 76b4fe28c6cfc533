#include "behavtrace/pipeline.hpp"

#include "behavtrace/csv.hpp"
#include "behavtrace/parallel.hpp"
#include "behavtrace/rng.hpp"
#include "behavtrace/transitions.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

namespace behavtrace {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

struct UserState {
    UserTrace trace;
    SessionSet sessions;
    std::vector<CategorySequence> encoded;
    PatternSet patterns;
};

class OutputDir {
public:
    explicit OutputDir(const std::string& path) : root_(path) {
        std::error_code ec;
        fs::create_directories(root_, ec);
        if (ec) throw IoError("cannot create output directory '" + path + "': " + ec.message());
    }

    std::ofstream open(const std::string& name) {
        std::ofstream out(root_ / name, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + (root_ / name).string() + "'");
        written_.push_back(name);
        return out;
    }

    const std::vector<std::string>& written() const { return written_; }

private:
    fs::path root_;
    std::vector<std::string> written_;
};

template <class Fn>
void run_stage(Stage stage, Fn&& fn) {
    try {
        fn();
    } catch (const DataError& ex) {
        throw StageError(stage, std::string(to_string(stage)) + ": " + ex.what(), true);
    } catch (const StageError&) {
        throw;
    } catch (const Error& ex) {
        throw StageError(stage, std::string(to_string(stage)) + ": " + ex.what(), false);
    }
}

UserTrace prepare_trace(const UserTrace& raw, const std::optional<Taxonomy>& taxonomy, const RunConfig& config) {
    UserTrace trace = taxonomy ? attach_categories(raw, *taxonomy, config.unmapped) : raw;
    if (!taxonomy) {
        // Without a taxonomy, each behavior is its own category unless the
        // record named one.
        for (auto& e : trace.events)
            if (e.is_behavior() && !e.category_id) e.category_id = e.behavior_id;
        trace.normalize();
    }
    return impute_durations(trace, config.duration_cap_ms);
}

ordered_json prevalence_json(const std::string& user, const PrevalenceReport& r) {
    ordered_json j;
    j["user"] = user;
    j["unique_behaviors"] = r.unique_behaviors;
    j["total_duration_ms"] = r.total_duration_ms;
    j["total_frequency"] = r.total_frequency;
    j["gini"] = r.gini;
    ordered_json keys = ordered_json::object();
    for (const auto& [k, e] : r.per_key) keys[k] = {{"duration_ms", e.total_duration_ms}, {"frequency", e.frequency}};
    j["per_category"] = std::move(keys);
    return j;
}

std::string policy_json_name(const ThresholdPolicy& p) { return describe(p); }

ordered_json config_json(const RunConfig& c) {
    ordered_json j;
    j["seed"] = c.seed;
    j["input"] = {{"paths", c.inputs},
                  {"format", c.input_format},
                  {"taxonomy", c.taxonomy_path ? ordered_json(*c.taxonomy_path) : ordered_json(nullptr)},
                  {"unmapped", c.unmapped == UnmappedPolicy::Reject ? "reject" : "other"},
                  {"tz_offset_min", c.tz.minutes},
                  {"strict", c.strict}};
    ordered_json s;
    s["policy"] = policy_json_name(c.policy);
    if (const auto* f = std::get_if<FixedThreshold>(&c.policy)) s["threshold_ms"] = f->t_ms;
    if (const auto* m = std::get_if<IndividualMedian>(&c.policy)) {
        s["min_gaps"] = m->min_gaps;
        s["fallback_ms"] = m->fallback_ms;
        s["clamp_min_ms"] = m->clamp_min_ms;
    }
    if (const auto* sb = std::get_if<ScreenBounded>(&c.policy))
        s["orphans"] = sb->orphan_policy == OrphanPolicy::Drop ? "drop" : "own";
    s["duration_cap_ms"] = c.duration_cap_ms;
    j["sessionize"] = std::move(s);
    j["budget"] = {{"unit", to_string(c.count_unit)}};
    j["transitions"] = {{"mode", c.transition_mode == TransitionMode::Pooled ? "pooled" : "user_mean"}};
    j["sequences"] = {{"sub", c.patterns.costs.sub},
                      {"indel", c.patterns.costs.indel},
                      {"cut_theta", c.patterns.cut_theta},
                      {"min_distinct_categories", c.patterns.min_distinct_categories},
                      {"max_cluster_sessions", c.patterns.max_cluster_sessions}};
    std::vector<std::string> weekend;
    static const char* names[] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};
    for (std::size_t d = 0; d < 7; ++d)
        if (c.weekend.test(d)) weekend.emplace_back(names[d]);
    j["regularity"] = {{"slot_width_min", c.slot_width_min},
                       {"repeat", c.repeat_rule == RepeatRule::AnyOtherDay ? "any_day" : "adjacent_day"},
                       {"weekend", weekend},
                       {"measure", to_string(c.measure)},
                       {"labeling", c.labeling == LabelMode::Dominant ? "dominant" : "medoid"},
                       {"min_cell_n", c.min_cell_n}};
    return j;
}

std::string fnv1a_hex(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

}  // namespace

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::Sessionize: return "sessionize";
        case Stage::Budget: return "budget";
        case Stage::Transitions: return "transitions";
        case Stage::Patterns: return "patterns";
        case Stage::Rrs: return "rrs";
        case Stage::Rhythm: return "rhythm";
    }
    return "sessionize";
}

const std::vector<Stage>& all_stages() {
    static const std::vector<Stage> stages{Stage::Sessionize, Stage::Budget, Stage::Transitions,
                                           Stage::Patterns,   Stage::Rrs,    Stage::Rhythm};
    return stages;
}

LoadedCorpus load_inputs(const RunConfig& config) {
    LoadedCorpus loaded;
    std::vector<std::string> sources;
    for (const auto& path : config.inputs) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot read input '" + path + "'");
        InputFormat format = InputFormat::JsonLines;
        if (config.input_format == "csv" || (config.input_format == "auto" && fs::path(path).extension() == ".csv"))
            format = InputFormat::Csv;
        ParseOptions options{config.strict, config.tz, path};
        auto result = parse_events(in, format, options);
        loaded.report.accepted += result.report.accepted;
        loaded.report.rejected += result.report.rejected;
        loaded.report.duplicates += result.report.duplicates;
        for (auto& reason : result.report.reasons) {
            if (loaded.report.reasons.size() >= ParseReport::kMaxReasons) break;
            loaded.report.reasons.push_back(path + ": " + reason);
        }
        loaded.corpus.provenance.ingested_at = result.corpus.provenance.ingested_at;
        for (auto& [id, trace] : result.corpus.traces) {
            auto& target = loaded.corpus.traces[id];
            if (target.user_id.empty()) {
                target = std::move(trace);
            } else {
                target.events.insert(target.events.end(), std::make_move_iterator(trace.events.begin()),
                                     std::make_move_iterator(trace.events.end()));
            }
        }
        sources.push_back(path);
    }
    if (config.inputs.size() > 1) {
        for (auto& [_, trace] : loaded.corpus.traces) {
            const auto before = trace.events.size();
            trace.normalize();
            loaded.report.duplicates += before - trace.events.size();
        }
    }
    for (const auto& s : sources) {
        if (!loaded.corpus.provenance.source.empty()) loaded.corpus.provenance.source += ",";
        loaded.corpus.provenance.source += s;
    }
    return loaded;
}

RunSummary run_stages(const TraceCorpus& corpus, const RunConfig& config, const std::vector<Stage>& requested) {
    validate(config);
    auto wants = [&](Stage s) { return std::find(requested.begin(), requested.end(), s) != requested.end(); };
    OutputDir out(config.out_dir);

    std::optional<Taxonomy> taxonomy;
    if (config.taxonomy_path) {
        std::ifstream in(*config.taxonomy_path);
        if (!in) throw IoError("cannot read taxonomy '" + *config.taxonomy_path + "'");
        taxonomy = Taxonomy::from_csv(in);
    }
    const std::vector<std::string> base_categories = taxonomy ? taxonomy->categories() : std::vector<std::string>{};

    std::vector<const UserTrace*> raw;
    for (const auto& [_, trace] : corpus.traces) raw.push_back(&trace);
    const std::size_t n_users = raw.size();
    std::vector<UserState> users(n_users);

    RunSummary summary;
    summary.users = n_users;

    run_stage(Stage::Sessionize, [&] {
        parallel_for(n_users, config.threads, [&](std::size_t i) {
            users[i].trace = prepare_trace(*raw[i], taxonomy, config);
            users[i].sessions = sessionize(users[i].trace, config.policy);
        });
        auto f = out.open("sessions.jsonl");
        for (const auto& u : users) {
            write_sessions_jsonl(f, u.sessions);
            summary.sessions += u.sessions.sessions.size();
        }
    });

    if (wants(Stage::Budget)) {
        run_stage(Stage::Budget, [&] {
            std::vector<PrevalenceReport> reports(n_users);
            std::vector<CountSeries> counts(n_users);
            parallel_for(n_users, config.threads, [&](std::size_t i) {
                reports[i] = prevalence_metrics(users[i].trace, PrevalenceKey::Category);
                counts[i] = regroup_counts(users[i].trace, config.count_unit);
            });
            ordered_json j;
            j["by"] = "category";
            j["users"] = ordered_json::array();
            for (std::size_t i = 0; i < n_users; ++i) j["users"].push_back(prevalence_json(users[i].trace.user_id, reports[i]));
            out.open("prevalence.json") << j.dump(2) << '\n';

            auto f = out.open("counts.csv");
            f << "user,bucket_start_iso,count\n";
            for (std::size_t i = 0; i < n_users; ++i)
                for (const auto& b : counts[i].buckets)
                    f << csv::escape(users[i].trace.user_id) << ',' << format_rfc3339(b.start, counts[i].tz) << ','
                      << b.count << '\n';
        });
    }

    if (wants(Stage::Transitions)) {
        run_stage(Stage::Transitions, [&] {
            std::vector<TransitionMatrix> matrices(n_users);
            parallel_for(n_users, config.threads, [&](std::size_t i) {
                matrices[i] = count_transitions(users[i].sessions, users[i].trace, base_categories);
            });
            auto csv_out = out.open("transitions.csv");
            auto edges_out = out.open("transitions_edges.json");
            ordered_json a;
            a["mode"] = config.transition_mode == TransitionMode::Pooled ? "pooled" : "user_mean";
            if (matrices.empty() && base_categories.empty()) {
                csv_out << "from\n";
                edges_out << "[]\n";
                a["n_transitions"] = 0;
                a["overall_assortative_share"] = nullptr;
                a["categories"] = ordered_json::array();
            } else {
                TransitionMatrix pooled =
                    matrices.empty() ? make_transition_matrix(base_categories) : pool_transitions(matrices);
                write_matrix_csv(csv_out, pooled);
                write_edge_list_json(edges_out, pooled);
                const TransitionRates rates = config.transition_mode == TransitionMode::Pooled
                                                  ? transition_rates(pooled)
                                                  : mean_user_rates(matrices);
                const AssortativitySplit split = assortativity_split(rates);
                a["n_transitions"] = pooled.n_transitions;
                a["overall_assortative_share"] = pooled.n_transitions ? ordered_json(split.overall_assortative_share)
                                                                      : ordered_json(nullptr);
                a["categories"] = ordered_json::array();
                for (std::size_t c = 0; c < rates.size(); ++c)
                    a["categories"].push_back({{"category", rates.categories[c]},
                                               {"support", rates.row_support[c]},
                                               {"assortative", split.assortative[c]},
                                               {"disassortative", split.disassortative_mass[c]}});
            }
            out.open("assortativity.json") << a.dump(2) << '\n';
        });
    }

    const bool need_patterns = wants(Stage::Patterns) || (wants(Stage::Rhythm) && config.labeling == LabelMode::Medoid);
    if (need_patterns) {
        run_stage(Stage::Patterns, [&] {
            parallel_for(n_users, config.threads, [&](std::size_t i) {
                auto& u = users[i];
                u.encoded.clear();
                for (const auto& s : u.sessions.sessions) u.encoded.push_back(encode_full(s, u.trace, base_categories));
                PatternParams params = config.patterns;
                params.seed = derive_seed(config.seed, i);
                params.threads = 1;
                u.patterns = representative_patterns(u.trace.user_id, u.encoded, params);
            });
            if (!wants(Stage::Patterns)) return;
            std::vector<PatternSet> sets;
            auto f = out.open("patterns.jsonl");
            for (const auto& u : users) {
                write_patterns_jsonl(f, u.patterns);
                sets.push_back(u.patterns);
            }
            const auto global = global_patterns(sets);
            auto g = out.open("patterns_global.csv");
            write_global_patterns_csv(g, global);
        });
    }

    if (wants(Stage::Rrs)) {
        run_stage(Stage::Rrs, [&] {
            std::vector<UserRrs> reports(n_users);
            parallel_for(n_users, config.threads, [&](std::size_t i) {
                reports[i] = rrs(users[i].sessions, config.slot_width_min, users[i].trace.tz, config.repeat_rule);
            });
            auto f = out.open("rrs.csv");
            write_rrs_csv(f, reports);
        });
    }

    if (wants(Stage::Rhythm)) {
        run_stage(Stage::Rhythm, [&] {
            struct Scored {
                std::vector<Trajectory> hourly, daily;
                std::vector<double> hourly_c, daily_c;
            };
            std::vector<Scored> scored(n_users);
            parallel_for(n_users, config.threads, [&](std::size_t i) {
                auto& u = users[i];
                Labeling labeling = DominantCategory{};
                if (config.labeling == LabelMode::Medoid) labeling = MedoidLabels{&u.patterns};
                auto& s = scored[i];
                s.hourly = build_trajectories(u.sessions, u.trace, labeling, Scope::UserDayHour);
                s.daily = build_trajectories(u.sessions, u.trace, labeling, Scope::UserDay);
                // The user's label vocabulary is the alphabet for the composite index.
                std::set<std::string> vocabulary;
                for (const auto& t : s.daily) vocabulary.insert(t.labels.begin(), t.labels.end());
                const std::size_t k = vocabulary.size();
                for (const auto& t : s.hourly) s.hourly_c.push_back(trajectory_complexity(t, config.measure, k));
                for (const auto& t : s.daily) s.daily_c.push_back(trajectory_complexity(t, config.measure, k));
            });
            std::vector<Trajectory> hourly, daily;
            std::vector<double> hourly_c, daily_c;
            for (auto& s : scored) {
                std::move(s.hourly.begin(), s.hourly.end(), std::back_inserter(hourly));
                std::move(s.daily.begin(), s.daily.end(), std::back_inserter(daily));
                hourly_c.insert(hourly_c.end(), s.hourly_c.begin(), s.hourly_c.end());
                daily_c.insert(daily_c.end(), s.daily_c.begin(), s.daily_c.end());
            }
            auto rhythm_out = out.open("rhythm.csv");
            write_rhythm_csv(rhythm_out, circadian_rhythm(hourly, hourly_c, config.weekend, config.min_cell_n));
            auto daytype_out = out.open("rhythm_daytype.csv");
            write_daytype_csv(daytype_out, daytype_summary(daily, daily_c, config.weekend, config.min_cell_n));
        });
    }

    summary.written = out.written();
    return summary;
}

RunSummary run_pipeline(const LoadedCorpus& loaded, const RunConfig& config) {
    ordered_json manifest;
    manifest["tool"] = "behavtrace";
    manifest["config"] = config_json(config);
    ordered_json inputs = ordered_json::array();
    for (const auto& path : config.inputs) {
        std::error_code ec;
        const auto size = fs::file_size(path, ec);
        inputs.push_back({{"path", path}, {"bytes", ec ? 0 : size}, {"fnv1a64", ec ? "" : fnv1a_hex(path)}});
    }
    manifest["inputs"] = std::move(inputs);
    manifest["parse"] = {{"accepted", loaded.report.accepted},
                         {"rejected", loaded.report.rejected},
                         {"duplicates", loaded.report.duplicates}};
    manifest["users"] = loaded.corpus.traces.size();
    manifest["events"] = loaded.corpus.event_count();

    auto write_manifest = [&] {
        std::ofstream f(fs::path(config.out_dir) / "manifest.json", std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write manifest.json");
        f << manifest.dump(2) << '\n';
    };

    try {
        RunSummary summary = run_stages(loaded.corpus, config, all_stages());
        manifest["sessions"] = summary.sessions;
        manifest["outputs"] = summary.written;
        manifest["status"] = "ok";
        write_manifest();
        summary.written.push_back("manifest.json");
        return summary;
    } catch (const StageError& ex) {
        manifest["status"] = "failed";
        manifest["failed_stage"] = to_string(ex.stage());
        manifest["error"] = ex.what();
        write_manifest();
        throw;
    }
}

}  // namespace behavtrace
