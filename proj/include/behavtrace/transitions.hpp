#pragma once

#include "behavtrace/sessionizer.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace behavtrace {

/// Category-to-category transition counts within sessions. Row = origin,
/// column = destination; storage is row-major K x K.
struct TransitionMatrix {
    std::vector<std::string> categories;
    std::vector<std::uint64_t> counts;
    std::uint64_t n_transitions = 0;

    std::size_t size() const { return categories.size(); }
    std::uint64_t at(std::size_t from, std::size_t to) const { return counts[from * size() + to]; }
    /// Index of a category, or size() when absent.
    std::size_t index_of(std::string_view category) const;
};

/// Empty matrix over the given categories (K >= 1).
TransitionMatrix make_transition_matrix(std::vector<std::string> categories);

/// Counts (cat(i), cat(i+1)) pairs inside each session. The matrix covers
/// the taxonomy's categories followed, in sorted order, by any extra
/// categories the events carry (such as "__other__"). DataError when a
/// session holds an uncategorized event.
TransitionMatrix count_transitions(const SessionSet& sessions, const UserTrace& trace, const Taxonomy& taxonomy);
TransitionMatrix count_transitions(const SessionSet& sessions, const UserTrace& trace,
                                   std::vector<std::string> categories);

/// Sums matrices over the union of their categories (first-seen order).
TransitionMatrix pool_transitions(std::span<const TransitionMatrix> matrices);

struct TransitionRates {
    std::vector<std::string> categories;
    std::vector<double> rates;               // row-major K x K
    std::vector<std::uint64_t> row_support;  // transitions leaving each row

    std::size_t size() const { return categories.size(); }
    double at(std::size_t from, std::size_t to) const { return rates[from * size() + to]; }
};

/// Row-normalized counts; unsupported rows stay zero.
TransitionRates transition_rates(const TransitionMatrix& m);

/// Per-user-mean variant: each row is the mean of the users' normalized rows
/// among users who support that row. row_support sums the users' supports.
TransitionRates mean_user_rates(std::span<const TransitionMatrix> per_user);

struct AssortativitySplit {
    std::vector<double> assortative;          // rates[c][c]
    std::vector<double> disassortative_mass;  // 1 - rates[c][c] on supported rows, else 0
    double overall_assortative_share = 0.0;   // support-weighted diagonal share
};

AssortativitySplit assortativity_split(const TransitionRates& rates);

/// CSV with a header row and header column of category ids.
void write_matrix_csv(std::ostream& out, const TransitionMatrix& m);
/// JSON array of {"from","to","count","rate"} for every non-zero cell.
void write_edge_list_json(std::ostream& out, const TransitionMatrix& m);

}  // namespace behavtrace
