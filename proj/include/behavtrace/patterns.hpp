#pragma once

#include "behavtrace/sequences.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace behavtrace {

struct PatternParams {
    /// Average-linkage merges happen while the closest pair of clusters is
    /// at normalized distance <= cut_theta.
    double cut_theta = 0.3;
    EditCosts costs;
    /// Sessions need this many distinct symbols to be clustered.
    std::size_t min_distinct_categories = 2;
    /// Above this many eligible sessions a seeded uniform subsample is
    /// clustered and the rest join their nearest medoid.
    std::size_t max_cluster_sessions = 20'000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

void validate(const PatternParams& params);

/// Representative sequential patterns of one user.
struct PatternSet {
    std::string user_id;
    std::vector<CategorySequence> medoids;
    /// Sessions assigned to each medoid.
    std::vector<std::size_t> cluster_sizes;
    /// Input position of each eligible session -> medoid index.
    std::map<std::size_t, std::size_t> assignment;
    PatternParams params;
};

/// Average-linkage clustering of the eligible sessions under normalized edit
/// distance, cut at cut_theta. Identical sequences are clustered once with
/// their multiplicity as weight. Each cluster's medoid is the member with the
/// least weighted distance sum (ties: shorter, then lexicographically
/// smaller). Medoids are ordered by the earliest session they represent.
PatternSet representative_patterns(const std::string& user_id, std::span<const CategorySequence> sessions,
                                   const PatternParams& params);

/// A medoid shared by one or more users, deduplicated by exact equality.
struct GlobalPattern {
    std::vector<std::string> symbols;
    std::size_t n_users = 0;
    std::size_t n_sessions = 0;
};

/// Corpus-level table sorted by session count (desc) then symbols.
std::vector<GlobalPattern> global_patterns(std::span<const PatternSet> per_user);

/// One line per medoid: {"user","medoid":[...],"size"}.
void write_patterns_jsonl(std::ostream& out, const PatternSet& patterns);
/// CSV: pattern,length,n_users,n_sessions with symbols joined by '>'.
void write_global_patterns_csv(std::ostream& out, std::span<const GlobalPattern> patterns);

}  // namespace behavtrace
