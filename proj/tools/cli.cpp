#include "cli.hpp"

#include "behavtrace/csv.hpp"
#include "behavtrace/pipeline.hpp"
#include "behavtrace/rng.hpp"
#include "behavtrace/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace behavtrace::cli {
namespace {

namespace fs = std::filesystem;

struct Flags {
    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool strict = false;
    std::vector<std::string> inputs;
    std::optional<std::string> taxonomy;
    std::optional<int> tz_offset_min;
    std::vector<std::string> settings;

    std::string spec_path;
    std::size_t users = 1;
};

RunConfig build_config(const Flags& f) {
    RunConfig c;
    if (!f.config_path.empty()) load_config_file(c, f.config_path);
    for (const auto& kv : f.settings) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (f.out) c.out_dir = *f.out;
    if (f.seed) c.seed = *f.seed;
    if (f.threads) c.threads = *f.threads;
    if (f.strict) c.strict = true;
    if (!f.inputs.empty()) c.inputs = f.inputs;
    if (f.taxonomy) c.taxonomy_path = *f.taxonomy;
    if (f.tz_offset_min) c.tz = TzOffset{*f.tz_offset_min};
    validate(c);
    return c;
}

void require_paths(const RunConfig& c) {
    if (c.inputs.empty()) throw ConfigError("no input files given (use --input or input.paths)");
    for (const auto& p : c.inputs)
        if (!fs::is_regular_file(p)) throw IoError("input '" + p + "' does not exist");
    if (c.taxonomy_path && !fs::is_regular_file(*c.taxonomy_path))
        throw IoError("taxonomy '" + *c.taxonomy_path + "' does not exist");
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + (dir / name).string() + "'");
    return out;
}

int cmd_ingest(const Flags& flags, std::ostream& out) {
    RunConfig c = build_config(flags);
    require_paths(c);
    const LoadedCorpus loaded = load_inputs(c);
    auto events = open_output(c.out_dir, "events.jsonl");
    write_events_jsonl(events, loaded.corpus);
    nlohmann::ordered_json report;
    report["accepted"] = loaded.report.accepted;
    report["rejected"] = loaded.report.rejected;
    report["duplicates"] = loaded.report.duplicates;
    report["users"] = loaded.corpus.traces.size();
    report["events"] = loaded.corpus.event_count();
    report["reasons"] = loaded.report.reasons;
    open_output(c.out_dir, "report.json") << report.dump(2) << '\n';
    out << "ingested " << loaded.report.accepted << " records (" << loaded.report.rejected << " rejected) for "
        << loaded.corpus.traces.size() << " users\n";
    return kOk;
}

int cmd_stages(const Flags& flags, const std::vector<Stage>& stages, std::ostream& out) {
    RunConfig c = build_config(flags);
    require_paths(c);
    const LoadedCorpus loaded = load_inputs(c);
    const RunSummary summary = run_stages(loaded.corpus, c, stages);
    out << summary.users << " users, " << summary.sessions << " sessions; wrote";
    for (const auto& f : summary.written) out << ' ' << f;
    out << '\n';
    return kOk;
}

int cmd_pipeline(const Flags& flags, std::ostream& out) {
    RunConfig c = build_config(flags);
    require_paths(c);
    const LoadedCorpus loaded = load_inputs(c);
    const RunSummary summary = run_pipeline(loaded, c);
    out << summary.users << " users, " << summary.sessions << " sessions; wrote " << summary.written.size()
        << " files to " << c.out_dir << '\n';
    return kOk;
}

// Suffixes the user id when several users are generated from one spec.
template <class Spec>
Spec for_user(Spec spec, std::size_t i, std::size_t n) {
    if (n > 1) spec.user_id += "_" + std::to_string(i);
    return spec;
}

int cmd_synth(const Flags& flags, std::ostream& out) {
    if (flags.users == 0) throw ConfigError("--users must be >= 1");
    std::ifstream in(flags.spec_path);
    if (!in) throw IoError("cannot read spec '" + flags.spec_path + "'");
    const synth::GeneratorSpec spec = synth::parse_spec(in);
    synth::validate(spec);

    const fs::path dir = flags.out.value_or("out");
    const std::uint64_t seed = flags.seed.value_or(0);
    auto trace_out = open_output(dir, "trace.jsonl");
    std::vector<synth::GroundTruth> truths;
    std::optional<std::ofstream> waits_out;

    for (std::size_t i = 0; i < flags.users; ++i) {
        const std::uint64_t user_seed = flags.users > 1 ? derive_seed(seed, i) : seed;
        UserTrace trace;
        if (const auto* p = std::get_if<synth::ParetoGaps>(&spec)) {
            auto g = synth::gen_pareto_trace(for_user(*p, i, flags.users), user_seed);
            trace = std::move(g.trace);
            truths.push_back(std::move(g.truth));
        } else if (const auto* q = std::get_if<synth::PriorityQueue>(&spec)) {
            const auto user_spec = for_user(*q, i, flags.users);
            auto g = synth::gen_priority_queue(user_spec, user_seed);
            if (!waits_out) {
                waits_out.emplace(open_output(dir, "waiting_times.csv"));
                *waits_out << "user,waiting_steps\n";
            }
            for (auto w : g.waiting_times) *waits_out << csv::escape(user_spec.user_id) << ',' << w << '\n';
            trace = std::move(g.trace);
            truths.push_back(std::move(g.truth));
        } else {
            auto g = synth::gen_scheduled_trace(for_user(std::get<synth::Scheduled>(spec), i, flags.users), user_seed);
            trace = std::move(g.trace);
            truths.push_back(std::move(g.truth));
        }
        for (const auto& e : trace.events) write_event_jsonl(trace_out, e);
    }

    if (truths.size() == 1) {
        auto sidecar = open_output(dir, "ground_truth.json");
        synth::write_ground_truth_json(sidecar, truths.front());
        std::ostringstream summary;
        synth::write_ground_truth_json(summary, truths.front());
        out << summary.str();
    } else {
        auto sidecar = open_output(dir, "ground_truth.jsonl");
        for (const auto& t : truths) {
            std::ostringstream one;
            synth::write_ground_truth_json(one, t);
            sidecar << nlohmann::ordered_json::parse(one.str()).dump() << '\n';
        }
        out << "generated " << truths.size() << " users; ground truth in ground_truth.jsonl\n";
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Behavioral trace analysis: sessions, time budgets, transitions, patterns, regularity"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags flags;

    app.add_option("--config", flags.config_path, "TOML-style config file")->check(CLI::ExistingFile);
    app.add_option("--out", flags.out, "output directory");
    app.add_option("--seed", flags.seed, "random seed");
    app.add_option("--threads", flags.threads, "worker threads (0 = machine parallelism)");
    app.add_flag("--strict", flags.strict, "reject the input on the first malformed record");
    app.add_option("-i,--input", flags.inputs, "event file(s), JSON lines or CSV");
    app.add_option("--taxonomy", flags.taxonomy, "behavior_id,category_id CSV");
    app.add_option("--tz", flags.tz_offset_min, "default UTC offset in minutes");
    app.add_option("--set", flags.settings, "override a config key: section.key=value");

    auto* ingest = app.add_subcommand("ingest", "parse, validate, and normalize inputs");
    auto* pipeline = app.add_subcommand("pipeline", "run every stage and write a manifest");
    std::map<CLI::App*, Stage> stage_commands{
        {app.add_subcommand("sessionize", "split traces into sessions"), Stage::Sessionize},
        {app.add_subcommand("budget", "prevalence metrics and count series"), Stage::Budget},
        {app.add_subcommand("transitions", "category transition matrix and assortativity"), Stage::Transitions},
        {app.add_subcommand("patterns", "representative session patterns"), Stage::Patterns},
        {app.add_subcommand("rrs", "routine repetition scores"), Stage::Rrs},
        {app.add_subcommand("rhythm", "circadian complexity rhythm"), Stage::Rhythm},
    };
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic trace from a JSON spec");
    synth_cmd->add_option("spec", flags.spec_path, "generator spec (JSON)")->required();
    synth_cmd->add_option("--users", flags.users, "number of users, each with a derived seed");

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& ex) {
        err << "error: " << ex.what() << '\n';
        return kIoOrConfig;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(flags, out);
        if (pipeline->parsed()) return cmd_pipeline(flags, out);
        if (synth_cmd->parsed()) return cmd_synth(flags, out);
        for (const auto& [cmd, stage] : stage_commands)
            if (cmd->parsed()) return cmd_stages(flags, {stage}, out);
        err << "error: no subcommand\n";
        return kIoOrConfig;
    } catch (const StageError& ex) {
        err << "error: " << ex.what() << '\n';
        return ex.data_error() ? kDataError : kIoOrConfig;
    } catch (const DataError& ex) {
        err << "error: " << ex.what() << '\n';
        return kDataError;
    } catch (const Error& ex) {
        err << "error: " << ex.what() << '\n';
        return kIoOrConfig;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kIoOrConfig;
    }
}

}  // namespace behavtrace::cli
