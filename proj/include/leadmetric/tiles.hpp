#pragma once

#include "leadmetric/group.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace leadmetric {

/// A box tile of Z^d: F = [0,k_1) x ... x [0,k_d) with centers the
/// sublattice k_1 Z x ... x k_d Z.
struct Tile {
    GroupModel model = GroupModel::zd(1);
    std::vector<std::uint64_t> sides;
    FiniteSubset shape;

    bool contains_center(const GroupElement& c) const;
    /// Centers c whose translate F + c meets ball(radius), sorted.
    FiniteSubset centers_near_ball(std::uint64_t radius) const;
};

Tile box_tile(const GroupModel& model, const std::vector<std::uint64_t>& sides);

struct TileCheck {
    bool disjoint = true;
    bool covers = true;
    std::string witness;
    bool ok() const { return disjoint && covers; }
};

/// Translates of the shape restricted to ball(radius) are pairwise disjoint
/// and cover ball(radius - diam F).
TileCheck verify_tile(const Tile& tile, std::uint64_t radius);

enum class RefineStrategy {
    /// Smallest union of tile translates (by #G, then multiplicities) that
    /// satisfies the invariance and size conditions.
    Minimal,
    /// Enclosing cube with defect < eps / (8 (#F)^2) on C and F F^{-1},
    /// keeping the centers whose translates fit inside.
    ProofThresholds,
};

struct RefinedTile {
    FiniteSubset set;      // G
    FiniteSubset centers;  // c_i with G = disjoint union of F + c_i
    std::vector<std::uint64_t> multiplicities;  // tile copies per axis
};

struct RefineConditions {
    bool disjoint_union = false;    // G is exactly the disjoint union of F c_i
    bool invariant = false;         // defect(g, G) < eps for g in C
    bool large = false;             // 3 (#F)^2 / #G < eps
    std::string failure;
    bool ok() const { return disjoint_union && invariant && large; }
};

RefinedTile refine_tile(const FiniteSubset& c, const Rational& epsilon, const Tile& tile,
                        RefineStrategy strategy = RefineStrategy::Minimal);

/// Literal check of the three conditions on an arbitrary (G, centers).
RefineConditions check_refined(const FiniteSubset& c, const Rational& epsilon, const Tile& tile,
                               const RefinedTile& refined);

}  // namespace leadmetric
