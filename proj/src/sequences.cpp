#include "behavtrace/sequences.hpp"

#include "behavtrace/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace behavtrace {

CategorySequence make_sequence(std::vector<std::string> symbols) {
    std::set<std::string> distinct(symbols.begin(), symbols.end());
    return {std::move(symbols), {distinct.begin(), distinct.end()}};
}

std::vector<std::string> Dss::symbols() const {
    std::vector<std::string> out;
    out.reserve(spells.size());
    for (const auto& s : spells) out.push_back(s.category);
    return out;
}

Dss collapse_runs(std::span<const std::string> symbols, Millis unit) {
    Dss d;
    for (const auto& s : symbols) {
        if (!d.spells.empty() && d.spells.back().category == s) d.spells.back().duration_ms += unit;
        else d.spells.push_back({s, unit});
    }
    return d;
}

CategorySequence encode_full(const Session& session, const UserTrace& trace, std::vector<std::string> alphabet) {
    const auto b = trace.behaviors();
    if (session.end_event() > b.size()) throw DataError("session does not belong to trace");
    CategorySequence seq;
    seq.symbols.reserve(session.n_events);
    for (std::size_t i = session.first_event; i < session.end_event(); ++i) {
        if (!b[i]->category_id) throw DataError("uncategorized event: behavior '" + b[i]->behavior_id + "'");
        seq.symbols.push_back(*b[i]->category_id);
    }
    std::set<std::string> missing(seq.symbols.begin(), seq.symbols.end());
    for (const auto& a : alphabet) missing.erase(a);
    alphabet.insert(alphabet.end(), missing.begin(), missing.end());
    seq.alphabet = std::move(alphabet);
    return seq;
}

Dss encode_dss(const Session& session, const UserTrace& trace) {
    const auto b = trace.behaviors();
    if (session.end_event() > b.size()) throw DataError("session does not belong to trace");
    Dss d;
    for (std::size_t i = session.first_event; i < session.end_event(); ++i) {
        const Event& e = *b[i];
        if (!e.category_id) throw DataError("uncategorized event: behavior '" + e.behavior_id + "'");
        if (!e.duration_ms) throw DataError("missing duration: behavior '" + e.behavior_id + "'");
        if (!d.spells.empty() && d.spells.back().category == *e.category_id) d.spells.back().duration_ms += *e.duration_ms;
        else d.spells.push_back({*e.category_id, *e.duration_ms});
    }
    return d;
}

void validate(const EditCosts& costs) {
    if (!(costs.sub > 0.0) || !(costs.indel > 0.0)) throw ConfigError("edit costs must be positive");
    if (costs.sub > 2.0 * costs.indel) throw ConfigError("substitution cost must not exceed 2 * indel");
}

EditDistance edit_distance(std::span<const int> a, std::span<const int> b, const EditCosts& costs) {
    std::vector<double> prev(b.size() + 1);
    std::vector<double> cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = costs.indel * static_cast<double>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = costs.indel * static_cast<double>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const double diag = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0.0 : costs.sub);
            cur[j] = std::min({diag, prev[j] + costs.indel, cur[j - 1] + costs.indel});
        }
        std::swap(prev, cur);
    }
    EditDistance d;
    d.distance = prev[b.size()];
    const double denom = costs.indel * static_cast<double>(a.size() + b.size());
    d.normalized = denom > 0.0 ? d.distance / denom : 0.0;
    return d;
}

EditDistance edit_distance(const CategorySequence& a, const CategorySequence& b, const EditCosts& costs) {
    validate(costs);
    std::unordered_map<std::string, int> ids;
    auto intern = [&](const std::vector<std::string>& symbols) {
        std::vector<int> out;
        out.reserve(symbols.size());
        for (const auto& s : symbols) out.push_back(ids.emplace(s, static_cast<int>(ids.size())).first->second);
        return out;
    };
    const auto ia = intern(a.symbols);
    const auto ib = intern(b.symbols);
    return edit_distance(std::span<const int>(ia), std::span<const int>(ib), costs);
}

BigCount distinct_subsequences(std::span<const std::string> symbols, std::size_t max_length) {
    if (symbols.size() > max_length) throw DataError("sequence too long for exact count");
    // dp[i] = distinct subsequences of the first i symbols. A repeated symbol
    // re-creates every subsequence that ended just before its last occurrence.
    std::vector<BigCount> dp(symbols.size() + 1);
    dp[0] = 1;
    std::unordered_map<std::string, std::size_t> last_seen;  // 1-based position
    for (std::size_t i = 1; i <= symbols.size(); ++i) {
        dp[i] = 2 * dp[i - 1];
        auto [it, fresh] = last_seen.try_emplace(symbols[i - 1], i);
        if (!fresh) {
            dp[i] -= dp[it->second - 1];
            it->second = i;
        }
    }
    return dp.back();
}

BigCount distinct_subsequences(const CategorySequence& s, std::size_t max_length) {
    return distinct_subsequences(std::span<const std::string>(s.symbols), max_length);
}

double turbulence(const Dss& d, Millis duration_unit_ms) {
    if (d.spells.empty()) throw DataError("turbulence needs at least one spell");
    if (duration_unit_ms <= 0) throw ConfigError("duration unit must be positive");
    const auto symbols = d.symbols();
    // Exact counts stay cheap well past any realistic spell count; log2 of a
    // double caps the length near 1000.
    const BigCount phi = distinct_subsequences(std::span<const std::string>(symbols), 1000);

    const double n = static_cast<double>(d.spells.size());
    double mean = 0.0;
    for (const auto& s : d.spells) mean += static_cast<double>(s.duration_ms) / static_cast<double>(duration_unit_ms);
    mean /= n;
    double var = 0.0;
    for (const auto& s : d.spells) {
        const double t = static_cast<double>(s.duration_ms) / static_cast<double>(duration_unit_ms) - mean;
        var += t * t;
    }
    var /= n;
    const double var_max = (n - 1.0) * (mean - 1.0) * (mean - 1.0);
    return std::log2(phi.convert_to<double>()) + std::log2((var_max + 1.0) / (var + 1.0));
}

double complexity_index(std::span<const std::string> symbols, std::size_t alphabet_size) {
    const std::size_t n = symbols.size();
    if (n <= 1 || alphabet_size < 2) return 0.0;
    std::size_t changes = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (symbols[i] != symbols[i - 1]) ++changes;
    if (changes == 0) return 0.0;

    std::map<std::string_view, std::size_t> freq;
    for (const auto& s : symbols) ++freq[s];
    double h = 0.0;
    for (const auto& [_, c] : freq) {
        const double p = static_cast<double>(c) / static_cast<double>(n);
        h -= p * std::log(p);
    }
    const double q_ratio = static_cast<double>(changes) / static_cast<double>(n - 1);
    const double h_ratio = h / std::log(static_cast<double>(alphabet_size));
    return std::clamp(std::sqrt(q_ratio * h_ratio), 0.0, 1.0);
}

double complexity_index(const CategorySequence& s) {
    return complexity_index(std::span<const std::string>(s.symbols), s.alphabet.size());
}

}  // namespace behavtrace
