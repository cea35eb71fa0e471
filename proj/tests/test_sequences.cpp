#include "leadmetric/errors.hpp"
#include "leadmetric/sequences.hpp"

#include <gtest/gtest.h>

using namespace leadmetric;

TEST(Conjugators, AbelianReturnsBallPrefix) {
    auto z2 = GroupModel::zd(2);
    auto res = conjugator_search(z2, z2.ball(2), z2.ball(3), 6, 100);
    ASSERT_TRUE(res.complete);
    auto seq = z2.ball_sequence(1);
    ASSERT_EQ(res.elements.size(), 6u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(res.elements[i], seq[i]);
}

TEST(Conjugators, HeisenbergExclusionVerified) {
    auto h = GroupModel::heisenberg();
    FiniteSubset i{h.element({1, 0, 0})};
    FiniteSubset hs{h.element({0, 1, 0})};
    auto res = conjugator_search(h, i, hs, 10, 1000);
    ASSERT_TRUE(res.complete);
    for (const auto& c : res.elements) {
        // matrix oracle: x conjugated by (a,b,c) is (1, 0, b)
        auto conj = h.compose(h.compose(h.invert(c), h.element({1, 0, 0})), c);
        EXPECT_EQ(conj, h.element({1, 0, c[1].convert_to<long long>()}));
        EXPECT_TRUE(conj == h.element({1, 0, 0}) || !hs.contains(conj));
    }
    // a harder instance: H contains many conjugates of x
    FiniteSubset big;
    for (int c = -3; c <= 3; ++c) big = set_union(big, FiniteSubset{h.element({1, 0, c})});
    auto res2 = conjugator_search(h, i, big, 5, 5000);
    ASSERT_TRUE(res2.complete);
    for (const auto& c : res2.elements) {
        auto conj = h.conjugate(c, h.element({1, 0, 0}));
        EXPECT_TRUE(conj == h.element({1, 0, 0}) || !big.contains(conj));
    }
}

TEST(Conjugators, ZeroCountAndBudget) {
    auto h = GroupModel::heisenberg();
    auto none = conjugator_search(h, h.ball(1), h.ball(1), 0, 1);
    EXPECT_TRUE(none.complete);
    EXPECT_TRUE(none.elements.empty());
    auto starved = conjugator_search(h, h.ball(2), h.ball(4), 1000, 10);
    EXPECT_FALSE(starved.complete);
    EXPECT_EQ(starved.examined, 10u);
}

TEST(Separated, IntegerExample) {
    auto z = GroupModel::zd(1);
    auto c0 = z.ball(2);
    auto seq = separated_sequence(z, c0, 3);
    ASSERT_EQ(seq.elements.size(), 3u);
    auto p = set_power(z, c0, 5);
    EXPECT_EQ(p, z.ball(10));
    EXPECT_FALSE(p.contains(seq.elements[0]));
    EXPECT_EQ(seq.elements[0], z.element({-11}));
    EXPECT_EQ(seq.elements[1], z.element({-56}));
    EXPECT_EQ(seq.elements[2], z.element({-281}));
}

TEST(Separated, EnvelopeInvariants) {
    for (const char* name : {"Z", "Z^2", "H3"}) {
        auto m = GroupModel::parse(name);
        auto c0 = m.ball(1);
        auto seq = separated_sequence(m, c0, 4);
        ASSERT_EQ(seq.envelopes.size(), 5u);
        EXPECT_FALSE(set_power(m, c0, 5).contains(seq.elements[0]));
        for (std::size_t i = 1; i <= 4; ++i) {
            const auto& prev = seq.envelopes[i - 1];
            const auto& env = seq.envelopes[i];
            EXPECT_TRUE(env.contains(m, seq.elements[i - 1]));
            // C_{i-1}^5 is inside the radius-5r ball; g_i lies beyond it
            EXPECT_GT(m.word_length(seq.elements[i - 1]), i == 1 ? Integer(5) : 5 * prev.radius);
            EXPECT_GE(env.radius, i == 1 ? Integer(5) : 5 * prev.radius);
        }
    }
}

TEST(Separated, RejectsNonSymmetric) {
    auto z = GroupModel::zd(1);
    EXPECT_THROW(separated_sequence(z, FiniteSubset{z.identity(), z.element({1})}, 2), DomainError);
    EXPECT_THROW(separated_sequence(z, FiniteSubset{z.element({1}), z.element({-1})}, 2), DomainError);
}

TEST(Separated, AtMostTwoInclusionSolutions) {
    for (const char* name : {"Z", "Z^2", "H3"}) {
        auto m = GroupModel::parse(name);
        auto c0 = m.ball(2);
        auto seq = separated_sequence(m, c0, 8);
        for (const auto& g : m.ball(4)) {
            auto sol = count_inclusion_solutions(m, g, seq.elements, c0);
            EXPECT_LE(sol.count, 2u) << name << " g=" << to_string(g);
            EXPECT_EQ(sol.count, sol.pairs.size());
        }
    }
    EXPECT_EQ(count_inclusion_solutions(GroupModel::zd(1), GroupModel::zd(1).identity(), {}, GroupModel::zd(1).ball(2))
                  .count,
              0u);
}

TEST(Separated, SolutionsFoundWhenTheyExist) {
    auto z = GroupModel::zd(1);
    auto c0 = z.ball(2);
    auto seq = separated_sequence(z, c0, 4);
    // g = g_j - g_i is a solution for the ordered pair (i, j) in Z
    auto g = z.compose(z.invert(seq.elements[0]), seq.elements[1]);
    auto sol = count_inclusion_solutions(z, g, seq.elements, c0);
    EXPECT_GE(sol.count, 1u);
    EXPECT_LE(sol.count, 2u);
}
