// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include "helpers.hpp"

#include "behavtrace/patterns.hpp"
#include "behavtrace/pipeline.hpp"
#include "behavtrace/regularity.hpp"
#include "behavtrace/rng.hpp"
#include "behavtrace/sequences.hpp"
#include "behavtrace/sessionizer.hpp"
#include "behavtrace/synth.hpp"
#include "behavtrace/transitions.hpp"
#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace behavtrace;
using testing::Gen;
using testing::letters;
using testing::slurp;

namespace {

// Pinned tolerances and budgets.
constexpr double kSessionizerBudgetS = 1.0;
constexpr double kAlphaTolerance = 0.15;
constexpr double kPowerLawBudgetS = 2.0;
constexpr double kMinSurvivalDecades = 2.0;
constexpr double kTailSlopeLo = -1.5;
constexpr double kTailSlopeHi = -0.7;
constexpr double kBaselineMeanRelTol = 0.05;
constexpr double kAabComplexity = 0.6776;
constexpr double kAabTolerance = 1e-3;
constexpr double kRowSumTolerance = 1e-9;
constexpr double kStickinessTolerance = 0.03;
constexpr int kRhythmRuns = 50;
constexpr int kRhythmRequired = 48;
constexpr double kPipelineBudgetS = 30.0;

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Check {
    Outcome& o;
    void operator()(bool ok, const std::string& what) {
        if (!ok && o.pass) o.detail = what;
        o.pass = o.pass && ok;
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
    std::istringstream in(slurp(path));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::string cell;
        std::istringstream cells(line);
        while (std::getline(cells, cell, ',')) row.push_back(cell);
        if (!line.empty() && line.back() == ',') row.emplace_back();
        rows.push_back(row);
    }
    return rows;
}

// Index ranges of each session.
std::vector<std::pair<std::size_t, std::size_t>> membership(const SessionSet& set) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& s : set.sessions) out.emplace_back(s.first_event, s.n_events);
    return out;
}

// ---------------------------------------------------------------------------

Outcome sessionizer_oracle() {
    Outcome o;
    Check check{o};
    Gen gen(101);
    const auto t0 = Clock::now();
    for (int round = 0; round < 1000; ++round) {
        const Millis threshold = gen.between(1, 50);
        const auto n = static_cast<std::size_t>(gen.between(1, 12));
        std::vector<Millis> ts{gen.between(0, 1000)};
        while (ts.size() < n) ts.push_back(ts.back() + gen.between(1, 5 * threshold));
        const auto trace = testing::trace_at(ts, "AB");
        const auto got = membership(sessionize_fixed(trace, threshold));

        // Brute force: the unique cut set where every kept gap is <= threshold
        // and every cut gap is > threshold.
        std::vector<std::vector<std::pair<std::size_t, std::size_t>>> valid;
        for (std::uint32_t cuts = 0; cuts < (1u << (n - 1)); ++cuts) {
            bool ok = true;
            std::vector<std::pair<std::size_t, std::size_t>> parts{{0, 1}};
            for (std::size_t i = 1; i < n; ++i) {
                const bool cut = cuts >> (i - 1) & 1u;
                const Millis gap = ts[i] - ts[i - 1];
                ok = ok && (cut ? gap > threshold : gap <= threshold);
                if (cut)
                    parts.emplace_back(i, 1);
                else
                    ++parts.back().second;
            }
            if (ok) valid.push_back(parts);
        }
        check(valid.size() == 1 && valid[0] == got, "mismatch on round " + std::to_string(round));
    }
    const double elapsed = seconds_since(t0);
    check(elapsed < kSessionizerBudgetS, fmt("took %.3f s", elapsed));
    if (o.pass) o.detail = fmt("1000 traces, %.3f s", elapsed);
    return o;
}

Outcome median_scale_equivariance() {
    Outcome o;
    Check check{o};
    Gen gen(202);
    const IndividualMedian policy{};
    int compared = 0;
    for (int round = 0; round < 200; ++round) {
        // Gaps at or above the clamp keep the threshold a pure median.
        const auto n = gen.between(static_cast<std::int64_t>(policy.min_gaps) + 1, 40);
        std::vector<Millis> ts{0};
        for (int i = 1; i < n; ++i)
            ts.push_back(ts.back() + (gen.unit() < 0.7 ? gen.between(1000, 5000) : gen.between(5000, 600'000)));
        const auto base = membership(sessionize_individual(testing::trace_at(ts, "ABC"), policy));
        for (Millis k : {2, 3, 10}) {
            std::vector<Millis> scaled;
            for (Millis t : ts) scaled.push_back(t * k);
            const auto got = membership(sessionize_individual(testing::trace_at(scaled, "ABC"), policy));
            check(got == base, "round " + std::to_string(round) + " k=" + std::to_string(k));
            ++compared;
        }
    }
    if (o.pass) o.detail = std::to_string(compared) + " scaled traces identical";
    return o;
}

Outcome powerlaw_recovery() {
    Outcome o;
    Check check{o};
    const auto t0 = Clock::now();
    std::string fits;
    for (double alpha : {1.5, 2.0, 2.5}) {
        synth::ParetoGaps spec;
        spec.alpha = alpha;
        spec.n_events = 50'001;
        const auto g = synth::gen_pareto_trace(spec, 303);
        const auto gaps = inter_event_intervals(g.trace);
        const auto fit = fit_powerlaw_exponent(std::span<const Millis>(gaps), spec.xmin_ms);
        check(std::abs(fit.alpha - alpha) <= kAlphaTolerance, fmt("alpha %.2f fitted as %.4f", alpha, fit.alpha));
        fits += fmt("%.2f->%.3f ", alpha, fit.alpha);
    }
    const double elapsed = seconds_since(t0);
    check(elapsed < kPowerLawBudgetS, fmt("took %.3f s", elapsed));
    if (o.pass) o.detail = fits + fmt("in %.3f s", elapsed);
    return o;
}

Outcome priority_queue_tail() {
    Outcome o;
    Check check{o};
    synth::PriorityQueue spec;
    spec.list_length = 2;
    spec.p = 0.99999;
    spec.steps = 1'000'000;
    spec.emit_trace = false;
    const auto out = synth::gen_priority_queue(spec, 404);
    const auto& w = out.waiting_times;
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    const double decades = std::log10(static_cast<double>(*hi) / static_cast<double>(*lo));
    check(decades >= kMinSurvivalDecades, fmt("survival spans %.2f decades", decades));

    // Log-binned density over tau >= 2 (tau = 1 is the immediate-execution
    // spike), half-decade bins, OLS on the non-empty bins.
    constexpr double kBinDecades = 0.5;
    constexpr double kTailStart = 2.0;
    std::map<int, double> bins;
    for (auto t : w)
        if (t >= kTailStart) bins[static_cast<int>(std::floor(std::log10(static_cast<double>(t) / kTailStart) / kBinDecades))] += 1.0;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [b, count] : bins) {
        const double left = kTailStart * std::pow(10.0, b * kBinDecades);
        const double right = kTailStart * std::pow(10.0, (b + 1) * kBinDecades);
        const double x = std::log10(std::sqrt(left * right));
        const double y = std::log10(count / (right - left) / static_cast<double>(w.size()));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(bins.size());
    const double slope = bins.size() >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
    check(bins.size() >= 2, "tail too short to fit");
    check(slope >= kTailSlopeLo && slope <= kTailSlopeHi, fmt("tail slope %.3f", slope));

    synth::PriorityQueue random = spec;
    random.p = 1e-9;  // p -> 0: uniformly random execution
    const auto base = synth::gen_priority_queue(random, 405);
    double mean = 0.0;
    for (auto t : base.waiting_times) mean += static_cast<double>(t);
    mean /= static_cast<double>(base.waiting_times.size());
    const double target = static_cast<double>(spec.list_length);
    check(std::abs(mean - target) <= kBaselineMeanRelTol * target, fmt("baseline mean %.4f", mean));
    if (o.pass) o.detail = fmt("%.2f decades, slope %.3f, baseline mean %.4f", decades, slope, mean);
    return o;
}

Outcome phi_correctness() {
    Outcome o;
    Check check{o};
    std::size_t cases = 0;
    for (std::size_t n = 0; n <= 8; ++n) {
        std::size_t total = 1;
        for (std::size_t i = 0; i < n; ++i) total *= 3;
        for (std::size_t code = 0; code < total; ++code) {
            std::string s(n, 'A');
            for (std::size_t i = 0, c = code; i < n; ++i, c /= 3) s[i] = static_cast<char>('A' + c % 3);
            std::set<std::string> subs;
            for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
                std::string sub;
                for (std::size_t i = 0; i < n; ++i)
                    if (mask >> i & 1u) sub += s[i];
                subs.insert(sub);
            }
            const auto phi = distinct_subsequences(std::span<const std::string>(letters(s)));
            check(phi == subs.size(), "phi mismatch for '" + s + "'");
            ++cases;
        }
        check(distinct_subsequences(std::span<const std::string>(letters(std::string(n, 'A')))) == n + 1,
              "constant sequence of length " + std::to_string(n));
        check(distinct_subsequences(std::span<const std::string>(letters(std::string("ABCDEFGH").substr(0, n)))) ==
                  BigCount(1) << n,
              "distinct sequence of length " + std::to_string(n));
    }
    if (o.pass) o.detail = std::to_string(cases) + " sequences enumerated";
    return o;
}

Outcome edit_distance_metric() {
    Outcome o;
    Check check{o};
    std::vector<std::vector<int>> all{{}};
    for (std::size_t begin = 0; all.back().size() < 4;) {
        const std::size_t end = all.size();
        for (std::size_t i = begin; i < end; ++i)
            for (int c = 0; c < 3; ++c) {
                auto next = all[i];
                next.push_back(c);
                all.push_back(next);
            }
        begin = end;
    }
    const EditCosts costs{2.0, 1.0};
    const std::size_t n = all.size();
    std::vector<double> d(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i * n + j] = edit_distance(all[i], all[j], costs).distance;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double dij = d[i * n + j];
            check(i == j ? dij == 0.0 : dij > 0.0, "identity of indiscernibles");
            check(dij == d[j * n + i], "symmetry");
            for (std::size_t k = 0; k < n; ++k) check(dij <= d[i * n + k] + d[k * n + j], "triangle inequality");
        }
    if (o.pass) o.detail = std::to_string(n) + " sequences, " + std::to_string(n * n * n) + " triangles";
    return o;
}

Outcome complexity_bounds() {
    Outcome o;
    Check check{o};
    Gen gen(707);
    const std::string alphabet = "ABCDEF";
    for (int i = 0; i < 10'000; ++i) {
        const auto k = static_cast<std::size_t>(gen.between(1, 6));
        const auto s = gen.word(30, alphabet.substr(0, k));
        const auto syms = letters(s);
        const double observed = complexity_index(make_sequence(syms));
        const double declared = complexity_index(syms, k + static_cast<std::size_t>(gen.between(0, 2)));
        check(observed >= 0.0 && observed <= 1.0, "out of range for '" + s + "'");
        check(declared >= 0.0 && declared <= 1.0, "out of range for '" + s + "' with a wider alphabet");
    }
    for (std::size_t n = 1; n <= 12; ++n)
        check(complexity_index(make_sequence(letters(std::string(n, 'C')))) == 0.0, "constant sequence not 0");
    for (std::size_t k = 2; k <= 5; ++k)
        for (int reps = 1; reps <= 4; ++reps) {
            std::string s;
            for (int r = 0; r < reps; ++r) s += alphabet.substr(0, k);
            const double c = complexity_index(letters(s), k);
            check(std::abs(c - 1.0) <= 1e-12, "alternation '" + s + "' gave " + std::to_string(c));
        }
    const double aab = complexity_index(letters("AAB"), 2);
    check(std::abs(aab - kAabComplexity) <= kAabTolerance, fmt("AAB gave %.6f", aab));
    if (o.pass) o.detail = fmt("AAB = %.6f", aab);
    return o;
}

Outcome transition_conservation() {
    Outcome o;
    Check check{o};
    Gen gen(808);
    const std::vector<std::string> cats{"A", "B", "C", "D"};
    for (int corpus = 0; corpus < 50; ++corpus) {
        std::vector<TransitionMatrix> per_user;
        std::uint64_t expected = 0;
        for (int u = 0; u < 5; ++u) {
            std::vector<Millis> ts{0};
            const auto n = gen.between(1, 60);
            for (int i = 1; i < n; ++i) ts.push_back(ts.back() + gen.between(1, 400));
            const auto trace = testing::trace_at(ts, gen.word(7, "ABCD"), "u" + std::to_string(u));
            const auto sessions = sessionize_fixed(trace, gen.between(1, 300));
            for (const auto& s : sessions.sessions) expected += s.n_events - 1;
            per_user.push_back(count_transitions(sessions, trace, cats));
        }
        const auto pooled = pool_transitions(per_user);
        std::uint64_t sum = 0;
        for (auto c : pooled.counts) sum += c;
        check(sum == expected && pooled.n_transitions == expected, "count conservation on corpus " + std::to_string(corpus));
        for (const auto& rates : {transition_rates(pooled), mean_user_rates(per_user)})
            for (std::size_t r = 0; r < rates.size(); ++r) {
                if (rates.row_support[r] == 0) continue;
                double row = 0.0;
                for (std::size_t c = 0; c < rates.size(); ++c) row += rates.at(r, c);
                check(std::abs(row - 1.0) <= kRowSumTolerance, fmt("row sums to %.12f", row));
            }
    }

    // 21 equally likely categories: chance repeats add only 0.2 / 21.
    synth::ParetoGaps spec;
    spec.n_events = 100'001;
    spec.stickiness = 0.8;
    spec.behavior_mix.clear();
    std::vector<std::string> mix_cats;
    for (int i = 0; i < 21; ++i) {
        const std::string c = "c" + std::to_string(i);
        spec.behavior_mix.push_back({"app_" + c, c, 1.0 / 21.0});
        mix_cats.push_back(c);
    }
    const auto g = synth::gen_pareto_trace(spec, 809);
    const auto sessions = sessionize_fixed(g.trace, std::numeric_limits<Millis>::max() / 4);
    const auto m = count_transitions(sessions, g.trace, mix_cats);
    const double share = assortativity_split(transition_rates(m)).overall_assortative_share;
    const double truth = *g.truth.expected_assortative_share;
    check(m.n_transitions == 100'000, "expected 1e5 transitions");
    check(std::abs(share - spec.stickiness) <= kStickinessTolerance, fmt("share %.4f vs planted 0.8", share));
    check(std::abs(share - truth) <= kStickinessTolerance, fmt("share %.4f vs ground truth %.4f", share, truth));
    if (o.pass) o.detail = fmt("assortative share %.4f (ground truth %.4f)", share, truth);
    return o;
}

std::vector<std::string> medoid_strings(const PatternSet& p) {
    std::vector<std::string> out;
    for (const auto& m : p.medoids) {
        std::string s;
        for (const auto& sym : m.symbols) s += sym;
        out.push_back(s);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Outcome pattern_compression() {
    Outcome o;
    Check check{o};
    const PatternParams defaults;
    std::vector<CategorySequence> fixture;
    for (const char* s : {"AB", "AB", "AB", "CD"}) fixture.push_back(make_sequence(letters(s)));
    const auto p = representative_patterns("u", fixture, defaults);
    check(medoid_strings(p) == std::vector<std::string>{"AB", "CD"}, "fixture medoids");

    const std::vector<CategorySequence> same(6, make_sequence(letters("ABCA")));
    check(representative_patterns("u", same, defaults).medoids.size() == 1, "identical input");

    Gen gen(909);
    std::vector<CategorySequence> input;
    for (int i = 0; i < 500; ++i) input.push_back(make_sequence(letters(gen.word(9, "ABCDE", 2))));
    const auto reference = representative_patterns("u", input, defaults);
    for (unsigned threads : {1u, 1u, 2u, 4u, 8u}) {
        PatternParams params = defaults;
        params.threads = threads;
        const auto again = representative_patterns("u", input, params);
        std::ostringstream a;
        std::ostringstream b;
        write_patterns_jsonl(a, reference);
        write_patterns_jsonl(b, again);
        check(a.str() == b.str() && again.assignment == reference.assignment,
              "differs with " + std::to_string(threads) + " threads");
    }
    if (o.pass) o.detail = std::to_string(reference.medoids.size()) + " medoids stable over reruns and 1-8 threads";
    return o;
}

TraceCorpus corpus_of(const std::vector<UserTrace>& traces) {
    TraceCorpus c;
    for (const auto& t : traces) c.traces[t.user_id] = t;
    return c;
}

RunConfig config_in(const fs::path& dir) {
    RunConfig config;
    config.out_dir = dir.string();
    return config;
}

Outcome rrs_ground_truth() {
    Outcome o;
    Check check{o};
    Gen gen(1010);
    const auto dir = testing::scratch_dir("acceptance_rrs");
    std::size_t users = 0;
    for (int trial = 0; trial < 10; ++trial) {
        synth::Scheduled spec;
        spec.jitter_min = 0;
        spec.n_days = 14;
        spec.events_per_session = 4;
        spec.category_script = {"ABAB", "AAC", "CBA"};
        // Three slots at least two hours apart.
        for (int base : {0, 480, 960}) spec.daily_slots.push_back(base + static_cast<int>(gen.between(0, 360)));
        std::vector<UserTrace> traces;
        std::vector<UserTrace> single_day;
        for (std::uint64_t u = 0; u < 5; ++u) {
            spec.user_id = "t" + std::to_string(trial) + "_u" + std::to_string(u);
            spec.n_days = 14;
            traces.push_back(synth::gen_scheduled_trace(spec, derive_seed(static_cast<std::uint64_t>(trial), u)).trace);
            spec.n_days = 1;
            single_day.push_back(synth::gen_scheduled_trace(spec, u).trace);
        }
        run_stages(corpus_of(traces), config_in(dir / "multi"), {Stage::Rrs});
        const auto rows = read_csv_rows(dir / "multi" / "rrs.csv");
        check(rows.size() == traces.size(), "missing rrs rows");
        for (const auto& row : rows) check(row.size() == 5 && row[1] == "1", "user " + row[0] + " has rrs " + row[1]);
        users += rows.size();

        run_stages(corpus_of(single_day), config_in(dir / "single"), {Stage::Rrs});
        for (const auto& row : read_csv_rows(dir / "single" / "rrs.csv"))
            check(row.size() == 5 && row[1] == "0", "single-day user " + row[0] + " has rrs " + row[1]);
    }

    // Nested slot grids: a coarser slot contains every finer one.
    constexpr Millis kMonday = 1'704'067'200'000;
    for (int round = 0; round < 300; ++round) {
        std::vector<Millis> ts;
        const auto n = gen.between(1, 40);
        for (int i = 0; i < n; ++i) ts.push_back(kMonday + gen.between(0, 9) * kMsPerDay + gen.between(0, kMsPerDay - 1));
        std::sort(ts.begin(), ts.end());
        const auto trace = testing::trace_at(ts);
        const auto sessions = sessionize_fixed(trace, 1);
        double prev = 0.0;
        for (int width : {5, 15, 30, 60, 120, 240, 720, 1440}) {
            const auto r = rrs(sessions, width, TzOffset{});
            check(r.rrs && *r.rrs >= prev, "rrs decreased at width " + std::to_string(width));
            prev = r.rrs.value_or(prev);
        }
    }
    if (o.pass) o.detail = std::to_string(users) + " scheduled users at rrs 1, single days at 0, monotone on 300 fixtures";
    return o;
}

Outcome rhythm_recovery() {
    Outcome o;
    Check check{o};
    const auto dir = testing::scratch_dir("acceptance_rhythm");
    int correct = 0;
    std::string margins;
    for (int run = 0; run < kRhythmRuns; ++run) {
        // Several sessions per hour so each hour carries a label sequence.
        // Evening sessions end alternately in B and A; mid-day ones stay on A.
        synth::Scheduled spec;
        spec.daily_slots = {12 * 60 + 5, 12 * 60 + 20, 12 * 60 + 35, 12 * 60 + 50,
                            20 * 60 + 5, 20 * 60 + 20, 20 * 60 + 35, 20 * 60 + 50};
        spec.category_script = {"AAA", "AAA", "AAA", "AAA", "ABB", "BAA", "ABB", "BAA"};
        spec.jitter_min = 4;
        spec.category_noise = 0.15;
        spec.n_days = 14;
        std::vector<UserTrace> traces;
        for (std::uint64_t u = 0; u < 3; ++u) {
            spec.user_id = "u" + std::to_string(u);
            traces.push_back(synth::gen_scheduled_trace(spec, derive_seed(static_cast<std::uint64_t>(run) * 1000, u)).trace);
        }
        run_stages(corpus_of(traces), config_in(dir), {Stage::Rhythm});
        std::map<int, double> weekday_mean;
        for (const auto& row : read_csv_rows(dir / "rhythm.csv"))
            if (row.size() == 5 && row[1] == "weekday" && !row[2].empty()) weekday_mean[std::stoi(row[0])] = std::stod(row[2]);
        const bool ok = weekday_mean.count(20) && weekday_mean.count(12) && weekday_mean[20] > weekday_mean[12];
        correct += ok ? 1 : 0;
        if (run < 3) margins += fmt("%.3f/%.3f ", weekday_mean[20], weekday_mean[12]);
    }
    check(correct >= kRhythmRequired, std::to_string(correct) + "/" + std::to_string(kRhythmRuns) + " runs correct");
    o.detail = std::to_string(correct) + "/" + std::to_string(kRhythmRuns) + " runs with 20:00 > 12:00 (first runs " +
               margins + ")";
    return o;
}

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "behavtrace");
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
    return code;
}

Outcome end_to_end() {
    Outcome o;
    Check check{o};
    const auto dir = testing::scratch_dir("acceptance_e2e");
    Gen gen(1212);
    const std::string cats = "ABCDEFGH";
    TraceCorpus corpus;
    for (std::uint64_t u = 0; u < 100; ++u) {
        // Twenty daily sessions of five events each, with jitter and noise.
        synth::Scheduled spec;
        spec.user_id = "user" + std::to_string(u);
        spec.n_days = 30;
        spec.events_per_session = 5;
        spec.jitter_min = 20;
        spec.category_noise = 0.3;
        spec.intra_gap_ms = 20'000;
        spec.category_script.clear();
        for (int s = 0; s < 20; ++s) {
            spec.daily_slots.push_back(360 + s * 50 + static_cast<int>(gen.between(0, 20)));
            spec.category_script.push_back(gen.word(5, cats, 2));
        }
        auto trace = synth::gen_scheduled_trace(spec, derive_seed(12, u)).trace;
        corpus.traces[trace.user_id] = std::move(trace);
    }
    {
        std::ofstream out(dir / "events.jsonl", std::ios::binary);
        write_events_jsonl(out, corpus);
    }
    const auto events = corpus.event_count();

    double worst = 0.0;
    for (const char* name : {"a", "b"}) {
        const auto t0 = Clock::now();
        const int code =
            run_cli({"pipeline", "--input", (dir / "events.jsonl").string(), "--out", (dir / name).string(), "--seed", "7"});
        const double elapsed = seconds_since(t0);
        worst = std::max(worst, elapsed);
        check(code == 0, std::string("pipeline exit code ") + std::to_string(code));
    }
    check(worst < kPipelineBudgetS, fmt("slowest run %.2f s", worst));
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(dir / "a")) {
        const auto name = entry.path().filename();
        check(fs::exists(dir / "b" / name) && slurp(entry.path()) == slurp(dir / "b" / name), name.string() + " differs");
        ++files;
    }
    check(files >= 12, "missing outputs");
    if (o.pass) o.detail = std::to_string(events) + " events, slowest run " + fmt("%.2f s", worst) + ", " +
                           std::to_string(files) + " files identical";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"sessionizer matches brute-force splitter", sessionizer_oracle},
        {"median threshold is scale equivariant", median_scale_equivariance},
        {"power-law exponent recovery", powerlaw_recovery},
        {"priority-queue heavy tail", priority_queue_tail},
        {"distinct subsequence count", phi_correctness},
        {"edit distance metric axioms", edit_distance_metric},
        {"complexity index bounds", complexity_bounds},
        {"transition conservation and stickiness", transition_conservation},
        {"pattern compression", pattern_compression},
        {"repeated-session rate ground truth", rrs_ground_truth},
        {"circadian rhythm recovery", rhythm_recovery},
        {"end-to-end performance and determinism", end_to_end},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome;
        try {
            outcome = criteria[i].second();
        } catch (const std::exception& ex) {
            outcome = {false, std::string("threw: ") + ex.what()};
        }
        failed += outcome.pass ? 0 : 1;
        std::printf("%s %2zu %s: %s\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, outcome.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
