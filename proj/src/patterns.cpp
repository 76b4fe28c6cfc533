#include "behavtrace/patterns.hpp"

#include "behavtrace/csv.hpp"
#include "behavtrace/error.hpp"
#include "behavtrace/parallel.hpp"
#include "behavtrace/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

namespace behavtrace {

void validate(const PatternParams& params) {
    if (!(params.cut_theta > 0.0) || params.cut_theta > 1.0) throw ConfigError("cut_theta must be in (0, 1]");
    validate(params.costs);
    if (params.min_distinct_categories < 1) throw ConfigError("min_distinct_categories must be >= 1");
    if (params.max_cluster_sessions < 1) throw ConfigError("max_cluster_sessions must be >= 1");
}

namespace {

// Condensed symmetric distance matrix without the diagonal.
class CondensedMatrix {
public:
    explicit CondensedMatrix(std::size_t n) : n_(n), data_(n < 2 ? 0 : n * (n - 1) / 2, 0.0) {}

    double get(std::size_t i, std::size_t j) const { return data_[offset(i, j)]; }
    void set(std::size_t i, std::size_t j, double v) { data_[offset(i, j)] = v; }

private:
    std::size_t offset(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
    }

    std::size_t n_;
    std::vector<double> data_;
};

// Average-linkage agglomeration over weighted items; returns the member
// lists of the clusters that remain once every pair is farther than theta.
std::vector<std::vector<std::size_t>> average_linkage(CondensedMatrix d, std::vector<double> weight, double theta) {
    const std::size_t n = weight.size();
    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < n; ++i) members[i] = {i};
    std::vector<bool> active(n, true);
    std::vector<std::size_t> nn(n, n);
    std::vector<double> nn_d(n, std::numeric_limits<double>::infinity());

    auto refresh = [&](std::size_t i) {
        nn[i] = n;
        nn_d[i] = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || !active[j]) continue;
            const double v = d.get(i, j);
            if (v < nn_d[i]) {
                nn_d[i] = v;
                nn[i] = j;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) refresh(i);

    for (std::size_t remaining = n; remaining > 1; --remaining) {
        // Lexicographically smallest closest pair.
        std::size_t a = n;
        for (std::size_t i = 0; i < n; ++i)
            if (active[i] && nn[i] < n && (a == n || nn_d[i] < nn_d[a])) a = i;
        if (a == n || nn_d[a] > theta) break;
        std::size_t b = nn[a];
        if (b < a) std::swap(a, b);

        const double wa = weight[a];
        const double wb = weight[b];
        active[b] = false;
        weight[a] = wa + wb;
        members[a].insert(members[a].end(), members[b].begin(), members[b].end());
        members[b].clear();
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == a) continue;
            d.set(k, a, (wa * d.get(k, a) + wb * d.get(k, b)) / (wa + wb));
        }
        refresh(a);
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == a) continue;
            if (nn[k] == a || nn[k] == b) {
                refresh(k);
            } else {
                const double v = d.get(k, a);
                if (v < nn_d[k] || (v == nn_d[k] && a < nn[k])) {
                    nn_d[k] = v;
                    nn[k] = a;
                }
            }
        }
    }

    std::vector<std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < n; ++i)
        if (active[i]) out.push_back(std::move(members[i]));
    return out;
}

std::size_t distinct_count(const std::vector<std::string>& symbols) {
    return std::set<std::string_view>(symbols.begin(), symbols.end()).size();
}

}  // namespace

PatternSet representative_patterns(const std::string& user_id, std::span<const CategorySequence> sessions,
                                   const PatternParams& params) {
    validate(params);
    PatternSet result;
    result.user_id = user_id;
    result.params = params;

    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < sessions.size(); ++i)
        if (distinct_count(sessions[i].symbols) >= params.min_distinct_categories) eligible.push_back(i);
    if (eligible.empty()) return result;

    std::vector<std::size_t> clustered = eligible;
    if (clustered.size() > params.max_cluster_sessions) {
        Rng rng(params.seed);
        for (std::size_t i = 0; i < params.max_cluster_sessions; ++i)
            std::swap(clustered[i], clustered[i + rng.below(clustered.size() - i)]);
        clustered.resize(params.max_cluster_sessions);
        std::sort(clustered.begin(), clustered.end());
    }

    // Intern symbols; ids serve equality only.
    std::unordered_map<std::string, int> ids;
    auto intern = [&](const std::vector<std::string>& symbols) {
        std::vector<int> out;
        out.reserve(symbols.size());
        for (const auto& s : symbols) out.push_back(ids.emplace(s, static_cast<int>(ids.size())).first->second);
        return out;
    };

    // Unique sequences in lexicographic order, weighted by multiplicity.
    std::map<std::vector<std::string>, std::vector<std::size_t>> groups;
    for (const std::size_t s : clustered) groups[sessions[s].symbols].push_back(s);
    std::vector<const std::vector<std::string>*> unique;
    std::vector<std::vector<int>> encoded;
    std::vector<double> weight;
    std::vector<std::size_t> first_session;
    for (const auto& [symbols, members] : groups) {
        unique.push_back(&symbols);
        encoded.push_back(intern(symbols));
        weight.push_back(static_cast<double>(members.size()));
        first_session.push_back(members.front());
    }
    const std::size_t u = unique.size();

    CondensedMatrix dist(u);
    parallel_for(u, params.threads, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < u; ++j)
            dist.set(i, j, edit_distance(std::span<const int>(encoded[i]), std::span<const int>(encoded[j]), params.costs)
                               .normalized);
    });
    auto distance = [&](std::size_t i, std::size_t j) { return i == j ? 0.0 : dist.get(i, j); };

    auto clusters = average_linkage(dist, weight, params.cut_theta);

    struct Cluster {
        std::size_t medoid;
        std::size_t earliest_session;
        std::vector<std::size_t> members;
    };
    std::vector<Cluster> ordered;
    for (auto& members : clusters) {
        std::size_t best = members.front();
        double best_cost = std::numeric_limits<double>::infinity();
        for (const std::size_t m : members) {
            double cost = 0.0;
            for (const std::size_t v : members) cost += weight[v] * distance(m, v);
            const bool better = cost < best_cost ||
                                (cost == best_cost && (unique[m]->size() < unique[best]->size() ||
                                                       (unique[m]->size() == unique[best]->size() && *unique[m] < *unique[best])));
            if (better) {
                best = m;
                best_cost = cost;
            }
        }
        std::size_t earliest = std::numeric_limits<std::size_t>::max();
        for (const std::size_t m : members) earliest = std::min(earliest, first_session[m]);
        ordered.push_back({best, earliest, std::move(members)});
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const Cluster& x, const Cluster& y) { return x.earliest_session < y.earliest_session; });

    result.cluster_sizes.assign(ordered.size(), 0);
    std::vector<std::vector<int>> medoid_codes;
    for (std::size_t c = 0; c < ordered.size(); ++c) {
        const auto& symbols = *unique[ordered[c].medoid];
        result.medoids.push_back(make_sequence(symbols));
        medoid_codes.push_back(encoded[ordered[c].medoid]);
        for (const std::size_t m : ordered[c].members) {
            for (const std::size_t s : groups.at(*unique[m])) result.assignment[s] = c;
            result.cluster_sizes[c] += groups.at(*unique[m]).size();
        }
    }

    // Sessions left out of the subsample join the nearest medoid.
    for (const std::size_t s : eligible) {
        if (result.assignment.count(s)) continue;
        const auto code = intern(sessions[s].symbols);
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < medoid_codes.size(); ++c) {
            const double dn =
                edit_distance(std::span<const int>(code), std::span<const int>(medoid_codes[c]), params.costs).normalized;
            if (dn < best_d) {
                best_d = dn;
                best = c;
            }
        }
        result.assignment[s] = best;
        ++result.cluster_sizes[best];
    }
    return result;
}

std::vector<GlobalPattern> global_patterns(std::span<const PatternSet> per_user) {
    std::map<std::vector<std::string>, std::pair<std::set<std::string>, std::size_t>> table;
    for (const auto& set : per_user) {
        for (std::size_t c = 0; c < set.medoids.size(); ++c) {
            auto& entry = table[set.medoids[c].symbols];
            entry.first.insert(set.user_id);
            entry.second += set.cluster_sizes[c];
        }
    }
    std::vector<GlobalPattern> out;
    out.reserve(table.size());
    for (auto& [symbols, entry] : table) out.push_back({symbols, entry.first.size(), entry.second});
    std::stable_sort(out.begin(), out.end(),
                     [](const GlobalPattern& a, const GlobalPattern& b) { return a.n_sessions > b.n_sessions; });
    return out;
}

void write_patterns_jsonl(std::ostream& out, const PatternSet& patterns) {
    for (std::size_t c = 0; c < patterns.medoids.size(); ++c) {
        nlohmann::ordered_json j;
        j["user"] = patterns.user_id;
        j["medoid"] = patterns.medoids[c].symbols;
        j["size"] = patterns.cluster_sizes[c];
        out << j.dump() << '\n';
    }
}

void write_global_patterns_csv(std::ostream& out, std::span<const GlobalPattern> patterns) {
    out << "pattern,length,n_users,n_sessions\n";
    for (const auto& p : patterns) {
        std::string joined;
        for (std::size_t i = 0; i < p.symbols.size(); ++i) {
            if (i) joined += '>';
            joined += p.symbols[i];
        }
        out << csv::escape(joined) << ',' << p.symbols.size() << ',' << p.n_users << ',' << p.n_sessions << '\n';
    }
}

}  // namespace behavtrace
