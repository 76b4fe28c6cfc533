#pragma once

#include "behavtrace/trace_model.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

using namespace behavtrace;

inline Event behavior(const std::string& user, Millis ts, const std::string& cat = "A",
                      std::optional<Millis> duration = std::nullopt) {
    Event e;
    e.user_id = user;
    e.ts = Timestamp{ts};
    e.behavior_id = "app_" + cat;
    e.category_id = cat;
    e.duration_ms = duration;
    return e;
}

inline Event screen(const std::string& user, Millis ts, EventKind kind) {
    Event e;
    e.user_id = user;
    e.ts = Timestamp{ts};
    e.kind = kind;
    return e;
}

/// Behavior events at `ts` with categories taken from `cats` (cycled) and no durations.
inline UserTrace trace_at(const std::vector<Millis>& ts, const std::string& cats = "A", const std::string& user = "u") {
    UserTrace t;
    t.user_id = user;
    for (std::size_t i = 0; i < ts.size(); ++i)
        t.events.push_back(behavior(user, ts[i], std::string(1, cats[i % cats.size()])));
    t.normalize();
    return t;
}

inline std::vector<std::string> letters(const std::string& s) {
    std::vector<std::string> out;
    for (char c : s) out.emplace_back(1, c);
    return out;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("behavtrace_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Small deterministic generator for property tests.
struct Gen {
    std::mt19937_64 eng;
    explicit Gen(std::uint64_t seed) : eng(seed) {}
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(eng() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    double unit() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
    std::string word(std::size_t max_len, const std::string& alphabet, std::size_t min_len = 1) {
        std::string s(static_cast<std::size_t>(between(static_cast<std::int64_t>(min_len), static_cast<std::int64_t>(max_len))), ' ');
        for (auto& c : s) c = alphabet[static_cast<std::size_t>(between(0, static_cast<std::int64_t>(alphabet.size()) - 1))];
        return s;
    }
};

}  // namespace testing
