#include "leadmetric/kernels.hpp"
#include "leadmetric/errors.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace leadmetric;

namespace {

std::vector<MeasurableSet> random_point_sets(std::mt19937_64& rng, std::uint32_t n, std::size_t count) {
    std::vector<MeasurableSet> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(oracle::random_points(rng, n));
    return out;
}

}  // namespace

TEST(Kernels, SerialAndParallelTablesAgree) {
    std::mt19937_64 rng(11);
    std::vector<Action> actions{rotation_action(37, 5), torus_action({6, 7}), heisenberg_mod_action(4)};
    for (const auto& t : actions) {
        const auto sets = random_point_sets(rng, t.permutation().ground_size(), 5);
        const auto elements = t.model().ball_sequence(4);
        const auto a = correlation_table_serial(t, elements, sets);
        const auto b = correlation_table_parallel(t, elements, sets);
        EXPECT_EQ(a.values, b.values);
        EXPECT_EQ(a.elements, b.elements);
    }
}

TEST(Kernels, PermutationEntriesMatchPointCount) {
    std::mt19937_64 rng(12);
    auto t = torus_action({5, 4});
    const auto sets = random_point_sets(rng, 20, 4);
    const auto elements = t.model().ball_sequence(3);
    const auto table = correlation_table_parallel(t, elements, sets);
    for (std::size_t k = 0; k < elements.size(); ++k) {
        // translation by (a, b) on the 5×4 torus, row-major
        const long a = elements[k][0].convert_to<long>(), b = elements[k][1].convert_to<long>();
        for (std::size_t i = 0; i < sets.size(); ++i) {
            for (std::size_t j = 0; j < sets.size(); ++j) {
                const auto& sa = std::get<PointSet>(sets[i]);
                const auto& sb = std::get<PointSet>(sets[j]);
                long count = 0;
                for (std::uint32_t x = 0; x < 20; ++x) {
                    if (!sa.contains(x)) continue;
                    const long r = ((static_cast<long>(x / 4) + a) % 5 + 5) % 5;
                    const long c = ((static_cast<long>(x % 4) + b) % 4 + 4) % 4;
                    count += sb.contains(static_cast<std::uint32_t>(r * 4 + c)) ? 1 : 0;
                }
                EXPECT_EQ(table.at(k, i, j), ratio(count, 20));
            }
        }
    }
}

TEST(Kernels, BernoulliEntriesMatchBruteForce) {
    std::mt19937_64 rng(13);
    for (const char* group : {"Z", "H3"}) {
        auto m = GroupModel::parse(group);
        std::vector<Rational> w{ratio(1, 5), ratio(4, 5)};
        Action t = BernoulliAction(m, w);
        auto ball = m.ball_sequence(2);
        std::vector<MeasurableSet> sets;
        for (int i = 0; i < 3; ++i) sets.push_back(oracle::random_cylinder(rng, 2, {ball[0], ball[1 + i]}));
        const auto elements = m.ball_sequence(2);
        const auto a = correlation_table_serial(t, elements, sets);
        const auto b = correlation_table_parallel(t, elements, sets);
        ASSERT_EQ(a.values, b.values);
        for (std::size_t k = 0; k < elements.size(); ++k) {
            for (std::size_t i = 0; i < 3; ++i) {
                for (std::size_t j = 0; j < 3; ++j) {
                    EXPECT_EQ(a.at(k, i, j), oracle::brute_correlation(m, w, elements[k], std::get<CylinderUnion>(sets[i]),
                                                                       std::get<CylinderUnion>(sets[j])));
                }
            }
        }
    }
}

TEST(Kernels, DisplacementAgreesAndMatchesDefinition) {
    std::mt19937_64 rng(14);
    auto t = rotation_action(16, 1);
    auto s = rotation_action(16, 3);
    const auto sets = random_point_sets(rng, 16, 4);
    const auto elements = t.model().ball_sequence(5);
    const auto a = displacement_serial(t, s, elements, sets);
    const auto b = displacement_parallel(t, s, elements, sets);
    ASSERT_EQ(a, b);
    for (std::size_t k = 0; k < elements.size(); ++k) {
        const long g = elements[k][0].convert_to<long>();
        Rational expect = 0;
        for (std::size_t i = 0; i < sets.size(); ++i) {
            const auto& set = std::get<PointSet>(sets[i]);
            long diff = 0;
            for (std::uint32_t y = 0; y < 16; ++y) {
                const bool in_t = set.contains(static_cast<std::uint32_t>(((y - g) % 16 + 16) % 16));
                const bool in_s = set.contains(static_cast<std::uint32_t>(((y - 3 * g) % 16 + 16) % 16));
                diff += in_t != in_s ? 1 : 0;
            }
            expect += pow2_inverse(i + 1) * ratio(diff, 16);
        }
        EXPECT_EQ(a[k], expect) << g;
    }
}

TEST(Kernels, ErrorsSurfaceFromParallelRegion) {
    auto t = rotation_action(8);
    std::vector<MeasurableSet> wrong{PointSet::full(9)};
    EXPECT_THROW(correlation_table_parallel(t, {t.model().identity()}, wrong), BackendMismatch);
    EXPECT_THROW(displacement_parallel(t, rotation_action(9), {t.model().identity()}, {PointSet::full(8)}),
                 BackendMismatch);
}
