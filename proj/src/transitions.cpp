#include "behavtrace/transitions.hpp"

#include "behavtrace/csv.hpp"
#include "behavtrace/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <ostream>
#include <set>
#include <unordered_map>

namespace behavtrace {

std::size_t TransitionMatrix::index_of(std::string_view category) const {
    const auto it = std::find(categories.begin(), categories.end(), category);
    return static_cast<std::size_t>(it - categories.begin());
}

TransitionMatrix make_transition_matrix(std::vector<std::string> categories) {
    if (categories.empty()) throw ConfigError("transition matrix needs at least one category");
    TransitionMatrix m;
    m.counts.assign(categories.size() * categories.size(), 0);
    m.categories = std::move(categories);
    return m;
}

TransitionMatrix count_transitions(const SessionSet& sessions, const UserTrace& trace, const Taxonomy& taxonomy) {
    return count_transitions(sessions, trace, taxonomy.categories());
}

TransitionMatrix count_transitions(const SessionSet& sessions, const UserTrace& trace,
                                   std::vector<std::string> categories) {
    const auto b = trace.behaviors();
    std::set<std::string> extra;
    {
        const std::set<std::string> known(categories.begin(), categories.end());
        for (const auto& s : sessions.sessions) {
            for (std::size_t i = s.first_event; i < s.end_event(); ++i) {
                const Event& e = *b[i];
                if (!e.category_id) throw DataError("uncategorized event: behavior '" + e.behavior_id + "'");
                if (!known.count(*e.category_id)) extra.insert(*e.category_id);
            }
        }
    }
    categories.insert(categories.end(), extra.begin(), extra.end());
    if (categories.empty()) categories.push_back(std::string(kOtherCategory));

    TransitionMatrix m = make_transition_matrix(std::move(categories));
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < m.size(); ++i) index.emplace(m.categories[i], i);

    const std::size_t k = m.size();
    for (const auto& s : sessions.sessions) {
        for (std::size_t i = s.first_event + 1; i < s.end_event(); ++i) {
            const std::size_t from = index.at(*b[i - 1]->category_id);
            const std::size_t to = index.at(*b[i]->category_id);
            ++m.counts[from * k + to];
            ++m.n_transitions;
        }
    }
    return m;
}

TransitionMatrix pool_transitions(std::span<const TransitionMatrix> matrices) {
    std::vector<std::string> categories;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& m : matrices)
        for (const auto& c : m.categories)
            if (index.emplace(c, categories.size()).second) categories.push_back(c);
    if (categories.empty()) categories.push_back(std::string(kOtherCategory));

    TransitionMatrix pooled = make_transition_matrix(std::move(categories));
    const std::size_t k = pooled.size();
    for (const auto& m : matrices) {
        std::vector<std::size_t> map(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) map[i] = index.at(m.categories[i]);
        for (std::size_t r = 0; r < m.size(); ++r)
            for (std::size_t c = 0; c < m.size(); ++c) pooled.counts[map[r] * k + map[c]] += m.at(r, c);
        pooled.n_transitions += m.n_transitions;
    }
    return pooled;
}

TransitionRates transition_rates(const TransitionMatrix& m) {
    const std::size_t k = m.size();
    TransitionRates r{m.categories, std::vector<double>(k * k, 0.0), std::vector<std::uint64_t>(k, 0)};
    for (std::size_t i = 0; i < k; ++i) {
        std::uint64_t total = 0;
        for (std::size_t j = 0; j < k; ++j) total += m.at(i, j);
        r.row_support[i] = total;
        if (total == 0) continue;
        for (std::size_t j = 0; j < k; ++j)
            r.rates[i * k + j] = static_cast<double>(m.at(i, j)) / static_cast<double>(total);
    }
    return r;
}

TransitionRates mean_user_rates(std::span<const TransitionMatrix> per_user) {
    // Pool first only to fix the category order and the supports.
    const TransitionMatrix layout = pool_transitions(per_user);
    const std::size_t k = layout.size();
    TransitionRates out{layout.categories, std::vector<double>(k * k, 0.0), std::vector<std::uint64_t>(k, 0)};
    std::vector<std::size_t> users_supporting(k, 0);

    for (const auto& m : per_user) {
        const TransitionRates r = transition_rates(m);
        std::vector<std::size_t> map(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) map[i] = layout.index_of(m.categories[i]);
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (r.row_support[i] == 0) continue;
            ++users_supporting[map[i]];
            out.row_support[map[i]] += r.row_support[i];
            for (std::size_t j = 0; j < m.size(); ++j) out.rates[map[i] * k + map[j]] += r.at(i, j);
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (users_supporting[i] == 0) continue;
        for (std::size_t j = 0; j < k; ++j) out.rates[i * k + j] /= static_cast<double>(users_supporting[i]);
    }
    return out;
}

AssortativitySplit assortativity_split(const TransitionRates& rates) {
    const std::size_t k = rates.size();
    AssortativitySplit split;
    split.assortative.resize(k, 0.0);
    split.disassortative_mass.resize(k, 0.0);
    double diagonal_mass = 0.0;
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        split.assortative[c] = rates.at(c, c);
        if (rates.row_support[c] == 0) continue;
        split.disassortative_mass[c] = 1.0 - rates.at(c, c);
        diagonal_mass += rates.at(c, c) * static_cast<double>(rates.row_support[c]);
        total += static_cast<double>(rates.row_support[c]);
    }
    split.overall_assortative_share = total > 0.0 ? diagonal_mass / total : 0.0;
    return split;
}

void write_matrix_csv(std::ostream& out, const TransitionMatrix& m) {
    out << "from";
    for (const auto& c : m.categories) out << ',' << csv::escape(c);
    out << '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        out << csv::escape(m.categories[i]);
        for (std::size_t j = 0; j < m.size(); ++j) out << ',' << m.at(i, j);
        out << '\n';
    }
}

void write_edge_list_json(std::ostream& out, const TransitionMatrix& m) {
    const TransitionRates r = transition_rates(m);
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (m.at(i, j) == 0) continue;
            nlohmann::ordered_json e;
            e["from"] = m.categories[i];
            e["to"] = m.categories[j];
            e["count"] = m.at(i, j);
            e["rate"] = r.at(i, j);
            edges.push_back(std::move(e));
        }
    }
    out << edges.dump(2) << '\n';
}

}  // namespace behavtrace
