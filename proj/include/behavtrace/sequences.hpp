#pragma once

#include "behavtrace/sessionizer.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace behavtrace {

/// Symbols of a session (or trajectory) over an explicit alphabet.
struct CategorySequence {
    std::vector<std::string> symbols;
    std::vector<std::string> alphabet;

    friend bool operator==(const CategorySequence&, const CategorySequence&) = default;
};

/// Builds a sequence whose alphabet is the sorted set of its own symbols.
CategorySequence make_sequence(std::vector<std::string> symbols);

struct Spell {
    std::string category;
    Millis duration_ms = 0;

    friend bool operator==(const Spell&, const Spell&) = default;
};

/// Distinct successive states: runs collapsed into spells with durations.
struct Dss {
    std::vector<Spell> spells;

    std::vector<std::string> symbols() const;
};

/// Collapses runs of equal symbols; each symbol weighs `unit` duration.
Dss collapse_runs(std::span<const std::string> symbols, Millis unit = 1);

/// One symbol per event of the session, in order. The alphabet is the given
/// category list followed by any missing symbols in sorted order.
CategorySequence encode_full(const Session& session, const UserTrace& trace,
                             std::vector<std::string> alphabet = {});

/// Run-collapsed encoding; a spell's duration sums its events' durations.
/// DataError when an event lacks a category or a duration.
Dss encode_dss(const Session& session, const UserTrace& trace);

struct EditCosts {
    double sub = 2.0;
    double indel = 1.0;
};

/// Throws ConfigError unless both costs are positive and sub <= 2 * indel.
void validate(const EditCosts& costs);

struct EditDistance {
    double distance = 0.0;
    /// distance / (indel * (|a| + |b|)), in [0, 1]; 0 for two empty inputs.
    double normalized = 0.0;
};

EditDistance edit_distance(const CategorySequence& a, const CategorySequence& b, const EditCosts& costs = {});
EditDistance edit_distance(std::span<const int> a, std::span<const int> b, const EditCosts& costs = {});

using BigCount = boost::multiprecision::cpp_int;

inline constexpr std::size_t kDefaultMaxSubsequenceLength = 64;

/// Number of distinct subsequences, the empty one included. DataError
/// "sequence too long for exact count" beyond `max_length`.
BigCount distinct_subsequences(std::span<const std::string> symbols,
                               std::size_t max_length = kDefaultMaxSubsequenceLength);
BigCount distinct_subsequences(const CategorySequence& s, std::size_t max_length = kDefaultMaxSubsequenceLength);

/// log2(phi(x) * (s2_max + 1) / (s2 + 1)) over the spells of `d`, durations
/// expressed in `duration_unit_ms`. s2 is the population variance of spell
/// durations; s2_max = (n - 1)(mean - 1)^2 is the variance of one long spell
/// next to n - 1 unit spells with the same total.
double turbulence(const Dss& d, Millis duration_unit_ms = 1000);

/// sqrt((q / q_max) * (h / h_max)): q counts symbol changes (q_max = n - 1),
/// h is the Shannon entropy of the symbol distribution and h_max = ln |alphabet|.
/// 0 for length 1, a constant sequence, or a one-letter alphabet.
double complexity_index(const CategorySequence& s);
double complexity_index(std::span<const std::string> symbols, std::size_t alphabet_size);

}  // namespace behavtrace
