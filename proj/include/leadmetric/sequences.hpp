#pragma once

#include "leadmetric/group.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace leadmetric {

struct ConjugatorResult {
    std::vector<GroupElement> elements;
    bool complete = false;           // false when the budget ran out first
    std::uint64_t examined = 0;      // candidates tried
};

/// h^{-1} g h lies outside H \ {g} for every g in I.
bool conjugation_excludes(const GroupModel& model, const FiniteSubset& i, const FiniteSubset& h,
                          const GroupElement& candidate);

/// First `count` elements h, in ball order from `start_length`, with
/// h^{-1} g h outside H \ {g} for all g in I. At most `budget` candidates
/// are examined.
ConjugatorResult conjugator_search(const GroupModel& model, const FiniteSubset& i, const FiniteSubset& h,
                                   std::size_t count, std::uint64_t budget, const Integer& start_length = 0);

/// Envelope C_i. The first envelope is the explicit set C_0; later ones are
/// Cayley balls, whose fifth powers are again balls (of five times the
/// radius), so no explicit power is ever materialized.
struct Envelope {
    std::optional<FiniteSubset> explicit_set;
    Integer radius = 0;  // for balls; for C_0 the maximal word length in it

    bool contains(const GroupModel& model, const GroupElement& g) const;
};

struct SeparatedSequence {
    std::vector<GroupElement> elements;  // g_1 .. g_n
    std::vector<Envelope> envelopes;     // C_0 .. C_n
};

/// g_i outside C_{i-1}^5, g_i in C_i, C_i symmetric and containing
/// C_{i-1}^5. g_1 is the ball-order-minimal element outside C_0^5, later
/// g_i are lexicographically minimal on the sphere just outside C_{i-1}^5.
SeparatedSequence separated_sequence(const GroupModel& model, const FiniteSubset& c0, std::size_t length);

struct InclusionSolutions {
    std::size_t count = 0;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // 0-based (i, j)
};

/// Pairs i != j with g_i g g_j^{-1} in C_0.
InclusionSolutions count_inclusion_solutions(const GroupModel& model, const GroupElement& g,
                                             const std::vector<GroupElement>& elements, const FiniteSubset& c0);

}  // namespace leadmetric
