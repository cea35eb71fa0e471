#include "leadmetric/errors.hpp"
#include "leadmetric/tiles.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace leadmetric;

namespace {

// Oracle: count how many translates cover each point of a box window.
bool translates_partition_window(const Tile& t, long long lo, long long hi) {
    std::map<std::vector<long long>, int> hits;
    const unsigned d = t.model.coordinates();
    for (const auto& c : t.centers_near_ball(static_cast<std::uint64_t>(d * (hi - lo + 2) + 10))) {
        for (const auto& f : t.shape) {
            std::vector<long long> p;
            bool inside = true;
            for (unsigned i = 0; i < d; ++i) {
                long long v = f[i].convert_to<long long>() + c[i].convert_to<long long>();
                inside = inside && v >= lo && v <= hi;
                p.push_back(v);
            }
            if (inside) ++hits[p];
        }
    }
    std::size_t expected = 1;
    for (unsigned i = 0; i < d; ++i) expected *= static_cast<std::size_t>(hi - lo + 1);
    if (hits.size() != expected) return false;
    for (const auto& [p, n] : hits)
        if (n != 1) return false;
    return true;
}

}  // namespace

TEST(Tiles, BoxTileShapes) {
    auto z = GroupModel::zd(1);
    auto t = box_tile(z, {3});
    EXPECT_EQ(t.shape, (FiniteSubset{z.element({0}), z.element({1}), z.element({2})}));
    EXPECT_TRUE(t.contains_center(z.element({-6})));
    EXPECT_FALSE(t.contains_center(z.element({4})));
    EXPECT_EQ(box_tile(GroupModel::zd(2), {2, 2}).shape.size(), 4u);
    EXPECT_THROW(box_tile(z, {0}), DomainError);
    EXPECT_THROW(box_tile(GroupModel::heisenberg(), {1, 1, 1}), DomainError);
}

TEST(Tiles, TranslatesPartitionBalls) {
    for (auto [name, sides] : std::vector<std::pair<const char*, std::vector<std::uint64_t>>>{
             {"Z", {3}}, {"Z", {1}}, {"Z^2", {2, 2}}, {"Z^2", {3, 1}}, {"Z^3", {2, 1, 2}}}) {
        auto t = box_tile(GroupModel::parse(name), sides);
        for (std::uint64_t r = 0; r <= (t.model.coordinates() == 3 ? 8u : 20u); ++r) {
            auto check = verify_tile(t, r);
            EXPECT_TRUE(check.ok()) << name << " r=" << r << " " << check.witness;
        }
        EXPECT_TRUE(translates_partition_window(t, -5, 5));
    }
}

TEST(Tiles, BrokenTileDetected) {
    auto z = GroupModel::zd(1);
    auto t = box_tile(z, {3});
    t.shape = FiniteSubset{z.element({0}), z.element({1}), z.element({2}), z.element({3})};
    EXPECT_FALSE(verify_tile(t, 10).disjoint);
}

TEST(Tiles, RefineIntervalExample) {
    auto z = GroupModel::zd(1);
    auto t = box_tile(z, {3});
    FiniteSubset c{z.element({-1}), z.element({1})};
    auto r = refine_tile(c, Rational(1, 4), t);
    EXPECT_GE(r.set.size(), 108u);  // 3 * 9 / #G < 1/4
    EXPECT_EQ(r.set.size(), 111u);
    auto check = check_refined(c, Rational(1, 4), t, r);
    EXPECT_TRUE(check.ok()) << check.failure;
    // direct condition checks, independent of check_refined
    EXPECT_LT(Rational(27, 111), Rational(1, 4));
    EXPECT_LT(invariance_defect(z, z.element({1}), r.set), Rational(1, 4));
    EXPECT_EQ(r.centers.size() * 3, r.set.size());
}

TEST(Tiles, RefineEmptyConstraint) {
    auto z = GroupModel::zd(1);
    auto t = box_tile(z, {3});
    auto r = refine_tile(FiniteSubset{}, Rational(1, 4), t);
    EXPECT_EQ(r.set.size(), 111u);
    EXPECT_TRUE(check_refined(FiniteSubset{}, Rational(1, 4), t, r).ok());
}

TEST(Tiles, RefinePlane) {
    auto z2 = GroupModel::zd(2);
    auto t = box_tile(z2, {2, 2});
    auto c = z2.ball(1);
    auto r = refine_tile(c, Rational(1, 2), t);
    auto check = check_refined(c, Rational(1, 2), t, r);
    EXPECT_TRUE(check.ok()) << check.failure;
}

TEST(Tiles, ProofThresholdStrategy) {
    auto z = GroupModel::zd(1);
    auto t = box_tile(z, {3});
    FiniteSubset c{z.element({-1}), z.element({1})};
    auto r = refine_tile(c, Rational(1, 4), t, RefineStrategy::ProofThresholds);
    EXPECT_EQ(r.set.size(), 1152u);
    EXPECT_TRUE(check_refined(c, Rational(1, 4), t, r).ok());
}

TEST(Tiles, RefineRejectsBadInput) {
    auto z = GroupModel::zd(1);
    auto t = box_tile(z, {3});
    EXPECT_THROW(refine_tile(FiniteSubset{}, Rational(0), t), DomainError);
    EXPECT_THROW(refine_tile(FiniteSubset{}, Rational(1), t), DomainError);
}
