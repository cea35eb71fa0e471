#pragma once

#include "leadmetric/group.hpp"

#include <cstdint>
#include <vector>

namespace leadmetric {

using Pattern = std::vector<std::uint32_t>;

/// Finite union of cylinders in a full shift alphabet^G, kept in disjoint
/// normal form: a support (sorted, only coordinates the set depends on)
/// and the sorted set of full patterns on that support.
///
/// The empty set has no patterns; the whole space has the empty support
/// and the single empty pattern.
class CylinderUnion {
public:
    CylinderUnion() = default;

    /// Patterns are given positionally against `support` (any order).
    static CylinderUnion make(std::uint32_t alphabet, std::vector<GroupElement> support, std::vector<Pattern> patterns);
    static CylinderUnion full(std::uint32_t alphabet);
    static CylinderUnion empty(std::uint32_t alphabet);
    /// [x_s = symbol]
    static CylinderUnion coordinate(std::uint32_t alphabet, const GroupElement& s, std::uint32_t symbol);

    std::uint32_t alphabet() const { return alphabet_; }
    const std::vector<GroupElement>& support() const { return support_; }
    const std::vector<Pattern>& patterns() const { return patterns_; }
    bool is_empty() const { return patterns_.empty(); }

    /// Patterns re-expressed on a superset of the support (sorted).
    std::vector<Pattern> expand_to(const std::vector<GroupElement>& superset) const;

    friend bool operator==(const CylinderUnion& a, const CylinderUnion& b) {
        return a.alphabet_ == b.alphabet_ && a.support_ == b.support_ && a.patterns_ == b.patterns_;
    }
    friend bool operator!=(const CylinderUnion& a, const CylinderUnion& b) { return !(a == b); }

private:
    std::uint32_t alphabet_ = 2;
    std::vector<GroupElement> support_;
    std::vector<Pattern> patterns_;
};

CylinderUnion cylinder_union(const CylinderUnion& a, const CylinderUnion& b);
CylinderUnion cylinder_intersection(const CylinderUnion& a, const CylinderUnion& b);
CylinderUnion cylinder_complement(const CylinderUnion& a);

/// Shift image for (T^g x)(k) = x(k g): support s moves to s g^{-1}.
CylinderUnion shift(const GroupModel& model, const GroupElement& g, const CylinderUnion& a);

/// Product measure of the set under the symbol weights.
Rational cylinder_measure(const std::vector<Rational>& weights, const CylinderUnion& a);

/// μ(A ∩ B) without expanding either set: patterns are grouped by their
/// restriction to the common coordinates.
Rational cylinder_intersection_measure(const std::vector<Rational>& weights, const CylinderUnion& a,
                                       const CylinderUnion& b);

/// Lifts a set on alphabet A to the product alphabet A x B (symbol a·|B| + b):
/// as the first factor (A x everything) or the second (everything x B).
CylinderUnion lift_first(const CylinderUnion& a, std::uint32_t other_alphabet);
CylinderUnion lift_second(const CylinderUnion& b, std::uint32_t other_alphabet);

}  // namespace leadmetric
