#include "helpers.hpp"

#include "behavtrace/error.hpp"
#include "behavtrace/patterns.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sstream>

using namespace behavtrace;
using testing::letters;

namespace {

std::vector<CategorySequence> seqs(std::initializer_list<const char*> items) {
    std::vector<CategorySequence> out;
    for (const char* s : items) out.push_back(make_sequence(letters(s)));
    return out;
}

std::vector<std::string> medoid_strings(const PatternSet& p) {
    std::vector<std::string> out;
    for (const auto& m : p.medoids) {
        std::string s;
        for (const auto& sym : m.symbols) s += sym;
        out.push_back(s);
    }
    return out;
}

PatternParams params(double theta) {
    PatternParams p;
    p.cut_theta = theta;
    return p;
}

}  // namespace

TEST_CASE("representative patterns on fixtures") {
    const auto fixture = seqs({"AB", "AB", "AB", "CD"});
    const auto p = representative_patterns("u", fixture, params(0.1));
    CHECK(medoid_strings(p) == std::vector<std::string>{"AB", "CD"});
    CHECK(p.cluster_sizes == std::vector<std::size_t>{3, 1});
    CHECK(p.assignment.at(3) == 1);

    const auto same = seqs({"ABA", "ABA", "ABA"});
    CHECK(medoid_strings(representative_patterns("u", same, params(0.1))) == std::vector<std::string>{"ABA"});

    const auto all = representative_patterns("u", seqs({"AB", "CD", "EF", "ABC"}), params(1.0));
    CHECK(all.medoids.size() == 1);
    CHECK(all.cluster_sizes == std::vector<std::size_t>{4});
}

TEST_CASE("single-category sessions are not clustered") {
    const auto p = representative_patterns("u", seqs({"AAA", "AB", "B"}), params(0.3));
    CHECK(medoid_strings(p) == std::vector<std::string>{"AB"});
    CHECK(p.assignment.size() == 1);
    CHECK(p.assignment.count(1) == 1);
    CHECK(representative_patterns("u", seqs({"A", "B"}), params(0.3)).medoids.empty());
}

TEST_CASE("average linkage merges near sequences") {
    // ABAB and ABAC are 2/8 apart; both are 1.0 from CDCD.
    const auto p = representative_patterns("u", seqs({"ABAB", "CDCD", "ABAC", "ABAB"}), params(0.3));
    CHECK(medoid_strings(p) == std::vector<std::string>{"ABAB", "CDCD"});
    CHECK(p.cluster_sizes == std::vector<std::size_t>{3, 1});
}

TEST_CASE("pattern params are validated") {
    CHECK_THROWS_AS(validate(params(-0.1)), ConfigError);
    CHECK_THROWS_AS(validate(params(1.5)), ConfigError);
    PatternParams bad;
    bad.costs.sub = 5.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("subsampled clustering still assigns every session") {
    testing::Gen gen(4);
    std::vector<CategorySequence> input;
    for (int i = 0; i < 300; ++i) input.push_back(make_sequence(letters(gen.word(6, "ABC", 2) + "AB")));
    PatternParams p = params(0.3);
    p.max_cluster_sessions = 50;
    p.seed = 9;
    const auto set = representative_patterns("u", input, p);
    CHECK(set.assignment.size() == input.size());
    std::size_t total = 0;
    for (auto s : set.cluster_sizes) total += s;
    CHECK(total == input.size());
    const auto again = representative_patterns("u", input, p);
    CHECK(medoid_strings(again) == medoid_strings(set));
}

TEST_CASE("determinism across thread counts") {
    testing::Gen gen(8);
    std::vector<CategorySequence> input;
    for (int i = 0; i < 400; ++i) input.push_back(make_sequence(letters(gen.word(8, "ABCD", 2))));
    PatternParams one = params(0.3);
    PatternParams many = one;
    many.threads = 4;
    const auto a = representative_patterns("u", input, one);
    const auto b = representative_patterns("u", input, many);
    CHECK(medoid_strings(a) == medoid_strings(b));
    CHECK(a.cluster_sizes == b.cluster_sizes);
    CHECK(a.assignment == b.assignment);
}

TEST_CASE("global patterns and writers") {
    const auto u1 = representative_patterns("u1", seqs({"AB", "AB", "CD"}), params(0.1));
    const auto u2 = representative_patterns("u2", seqs({"AB", "EF", "EF", "EF"}), params(0.1));
    const std::vector<PatternSet> sets{u1, u2};
    const auto global = global_patterns(sets);
    REQUIRE(global.size() == 3);
    CHECK(global[0].symbols == letters("AB"));
    CHECK(global[0].n_users == 2);
    CHECK(global[0].n_sessions == 3);
    CHECK(global[1].symbols == letters("EF"));
    CHECK(global[1].n_sessions == 3);

    std::ostringstream csv_out;
    write_global_patterns_csv(csv_out, global);
    CHECK(csv_out.str() == "pattern,length,n_users,n_sessions\nA>B,2,2,3\nE>F,2,1,3\nC>D,2,1,1\n");

    std::ostringstream jsonl;
    write_patterns_jsonl(jsonl, u1);
    std::istringstream lines(jsonl.str());
    std::string line;
    std::getline(lines, line);
    const auto j = nlohmann::json::parse(line);
    CHECK(j["user"] == "u1");
    CHECK(j["medoid"] == nlohmann::json::array({"A", "B"}));
    CHECK(j["size"] == 2);
}
