#include "leadmetric/caps.hpp"
#include "leadmetric/errors.hpp"
#include "leadmetric/group.hpp"

#include <gtest/gtest.h>

#include <array>
#include <deque>
#include <map>
#include <random>
#include <set>

using namespace leadmetric;

namespace {

// Independent oracle: 3x3 upper unitriangular integer matrices.
using Mat = std::array<std::array<long long, 3>, 3>;

Mat to_matrix(long long a, long long b, long long c) { return {{{1, a, c}, {0, 1, b}, {0, 0, 1}}}; }

Mat mul(const Mat& x, const Mat& y) {
    Mat r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[i][j] += x[i][k] * y[k][j];
    return r;
}

std::array<long long, 3> triple(const GroupElement& g) {
    return {g[0].convert_to<long long>(), g[1].convert_to<long long>(), g[2].convert_to<long long>()};
}

// Plain BFS over matrices, no memo sharing with the library.
std::map<std::array<long long, 3>, int> matrix_bfs(int radius) {
    std::map<std::array<long long, 3>, int> dist;
    std::deque<Mat> queue;
    const Mat id = to_matrix(0, 0, 0);
    dist[{0, 0, 0}] = 0;
    queue.push_back(id);
    const std::array<Mat, 4> gens = {to_matrix(1, 0, 0), to_matrix(-1, 0, 0), to_matrix(0, 1, 0), to_matrix(0, -1, 0)};
    while (!queue.empty()) {
        Mat m = queue.front();
        queue.pop_front();
        const int d = dist[{m[0][1], m[1][2], m[0][2]}];
        if (d == radius) continue;
        for (const auto& s : gens) {
            Mat n = mul(m, s);
            std::array<long long, 3> key{n[0][1], n[1][2], n[0][2]};
            if (dist.emplace(key, d + 1).second) queue.push_back(n);
        }
    }
    return dist;
}

}  // namespace

TEST(Group, ParseDescriptors) {
    EXPECT_EQ(GroupModel::parse("Z").descriptor(), "Z");
    EXPECT_EQ(GroupModel::parse("Z^2").coordinates(), 2u);
    EXPECT_EQ(GroupModel::parse("Z^3").rank(), 3u);
    EXPECT_EQ(GroupModel::parse("H3").descriptor(), "H3");
    EXPECT_THROW(GroupModel::parse("Z^4"), ParseError);
    EXPECT_THROW(GroupModel::parse("F2"), ParseError);
}

TEST(Group, ZdCompose) {
    auto z2 = GroupModel::zd(2);
    EXPECT_EQ(z2.compose(z2.element({1, 2}), z2.element({3, -1})), z2.element({4, 1}));
    EXPECT_EQ(z2.compose(z2.element({5, 7}), z2.identity()), z2.element({5, 7}));
    EXPECT_EQ(z2.invert(z2.element({2, -3})), z2.element({-2, 3}));
    EXPECT_EQ(z2.invert(z2.identity()), z2.identity());
}

TEST(Group, HeisenbergMatchesMatrixProduct) {
    auto h = GroupModel::heisenberg();
    EXPECT_EQ(h.compose(h.element({1, 0, 0}), h.element({0, 1, 0})), h.element({1, 1, 1}));
    EXPECT_EQ(h.invert(h.element({1, 1, 1})), h.element({-1, -1, 0}));
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> coord(-9, 9);
    for (int trial = 0; trial < 300; ++trial) {
        const long long a = coord(rng), b = coord(rng), c = coord(rng);
        const long long d = coord(rng), e = coord(rng), f = coord(rng);
        Mat m = mul(to_matrix(a, b, c), to_matrix(d, e, f));
        auto got = triple(h.compose(h.element({a, b, c}), h.element({d, e, f})));
        EXPECT_EQ(got[0], m[0][1]);
        EXPECT_EQ(got[1], m[1][2]);
        EXPECT_EQ(got[2], m[0][2]);
        Mat inv = mul(to_matrix(a, b, c), to_matrix(-a, -b, -c + a * b));
        EXPECT_EQ(inv, to_matrix(0, 0, 0));
        EXPECT_EQ(h.compose(h.invert(h.element({a, b, c})), h.element({a, b, c})), h.identity());
    }
}

TEST(Group, MixedModelsRejected) {
    auto z2 = GroupModel::zd(2);
    auto h = GroupModel::heisenberg();
    EXPECT_THROW(z2.compose(z2.identity(), h.identity()), ModelMismatch);
    EXPECT_THROW(GroupModel::zd(1).compose(GroupModel::zd(1).identity(), z2.identity()), ModelMismatch);
}

TEST(Group, AxiomsOnSamples) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> coord(-20, 20);
    for (const char* name : {"Z", "Z^2", "Z^3", "H3"}) {
        auto m = GroupModel::parse(name);
        auto sample = [&] {
            std::vector<Integer> v;
            for (unsigned i = 0; i < m.coordinates(); ++i) v.emplace_back(coord(rng));
            return m.element(v);
        };
        for (int trial = 0; trial < 200; ++trial) {
            auto g = sample(), h = sample(), k = sample();
            EXPECT_EQ(m.compose(m.compose(g, h), k), m.compose(g, m.compose(h, k)));
            EXPECT_EQ(m.compose(g, m.invert(g)), m.identity());
            EXPECT_EQ(m.compose(m.identity(), g), g);
        }
    }
}

TEST(Group, WordLengthZd) {
    auto z2 = GroupModel::zd(2);
    EXPECT_EQ(z2.word_length(z2.element({3, -2})), 5);
    EXPECT_EQ(z2.word_length(z2.identity()), 0);
}

TEST(Group, WordLengthHeisenbergAgainstBfs) {
    auto h = GroupModel::heisenberg();
    EXPECT_EQ(h.word_length(h.element({0, 0, 1})), 4);
    EXPECT_EQ(h.word_length(h.element({1, 1, 1})), 2);
    const auto oracle = matrix_bfs(10);
    for (const auto& [key, d] : oracle) {
        auto g = h.element({key[0], key[1], key[2]});
        ASSERT_EQ(h.word_length(g), d) << to_string(g);
        EXPECT_EQ(h.word_length(h.invert(g)), d);
        auto [lo, hi] = h.word_length_bounds(g);
        EXPECT_LE(lo, d);
        EXPECT_GE(hi, d);
    }
}

TEST(Group, HeisenbergGeodesicCertificateBeyondCap) {
    auto h = GroupModel::heisenberg();
    // Monotone staircase words certify |a|+|b| without search.
    auto g = h.element({-1000, 700, -350000});
    EXPECT_EQ(h.word_length(g), 1700);
    EXPECT_THROW(h.word_length(h.element({0, 0, 100000})), ResourceLimit);
}

TEST(Group, BallSizes) {
    auto z = GroupModel::zd(1);
    auto b = z.ball(2);
    ASSERT_EQ(b.size(), 5u);
    EXPECT_EQ(b[0], z.element({-2}));
    EXPECT_EQ(GroupModel::zd(2).ball(1).size(), 5u);
    auto h = GroupModel::heisenberg();
    const auto oracle = matrix_bfs(6);
    for (int r = 0; r <= 6; ++r) {
        std::size_t expected = 0;
        for (const auto& [key, d] : oracle) expected += d <= r ? 1 : 0;
        EXPECT_EQ(h.ball(r).size(), expected) << r;
    }
    EXPECT_EQ(h.ball(2).size(), 17u);
    EXPECT_FALSE(h.ball(2).contains(h.element({0, 0, 1})));
    EXPECT_TRUE(h.ball(4).contains(h.element({0, 0, 1})));
}

TEST(Group, BallsNestAndSpheresPartition) {
    for (const char* name : {"Z", "Z^2", "Z^3", "H3"}) {
        auto m = GroupModel::parse(name);
        FiniteSubset prev;
        for (std::uint64_t r = 0; r <= 6; ++r) {
            auto b = m.ball(r);
            EXPECT_EQ(set_intersection(prev, b), prev);
            EXPECT_EQ(b.size(), prev.size() + m.sphere(r).size());
            EXPECT_EQ(Integer(m.sphere(r).size()), m.sphere_size(r));
            prev = b;
        }
    }
}

TEST(Group, BallSequenceOrder) {
    for (const char* name : {"Z", "Z^2", "H3"}) {
        auto m = GroupModel::parse(name);
        auto seq = m.ball_sequence(5);
        for (std::size_t i = 1; i < seq.size(); ++i) {
            auto l0 = m.word_length(seq[i - 1]), l1 = m.word_length(seq[i]);
            EXPECT_TRUE(l0 < l1 || (l0 == l1 && seq[i - 1] < seq[i]));
        }
        EXPECT_EQ(FiniteSubset(seq), m.ball(5));
    }
}

TEST(Group, StreamMatchesSpheres) {
    for (const char* name : {"Z", "Z^2", "Z^3", "H3"}) {
        auto m = GroupModel::parse(name);
        BallOrderStream s(m, 0);
        auto seq = m.ball_sequence(5);
        for (const auto& g : seq) {
            auto got = s.next();
            ASSERT_TRUE(got.has_value());
            EXPECT_EQ(*got, g);
        }
    }
}

TEST(Group, StreamBeyondCapUsesCertifiedShell) {
    auto h = GroupModel::heisenberg();
    const Integer n = 1000;
    BallOrderStream s(h, n);
    auto first = *s.next();
    EXPECT_EQ(first, h.element({-1000, 0, 0}));
    GroupElement prev = first;
    for (int i = 0; i < 2000; ++i) {
        auto g = *s.next();
        EXPECT_TRUE(prev < g);
        EXPECT_EQ(h.word_length(g), n);
        prev = g;
    }
}

TEST(Group, SetAlgebra) {
    auto z = GroupModel::zd(1);
    FiniteSubset unit{z.element({-1}), z.identity(), z.element({1})};
    EXPECT_EQ(set_product(z, unit, unit), z.ball(2));
    EXPECT_EQ(set_inverse(z, FiniteSubset{z.element({1}), z.element({2})}),
              (FiniteSubset{z.element({-1}), z.element({-2})}));
    auto h = GroupModel::heisenberg();
    FiniteSubset xy{h.element({1, 0, 0}), h.element({0, 1, 0})};
    auto sq = set_product(h, xy, xy);
    EXPECT_EQ(sq.size(), 4u);
    EXPECT_TRUE(sq.contains(h.element({1, 1, 1})));
    EXPECT_TRUE(sq.contains(h.element({1, 1, 0})));
    EXPECT_TRUE(is_symmetric(h, h.ball(3)));
    EXPECT_EQ(set_power(h, h.ball(1), 3), h.ball(3));
}

TEST(Group, InvarianceDefect) {
    auto z = GroupModel::zd(1);
    std::vector<GroupElement> f;
    for (int i = 0; i < 8; ++i) f.push_back(z.element({i}));
    EXPECT_EQ(invariance_defect(z, z.element({1}), FiniteSubset(f)), ratio(2, 8));
    EXPECT_EQ(invariance_defect(z, z.identity(), FiniteSubset(f)), 0);
    auto z2 = GroupModel::zd(2);
    std::vector<GroupElement> box;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) box.push_back(z2.element({i, j}));
    // enumeration: shifted box shares 12 points
    std::set<std::pair<int, int>> a, b;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            a.insert({i, j});
            b.insert({i + 1, j});
        }
    int sym = 0;
    for (auto p : a) sym += b.count(p) ? 0 : 1;
    for (auto p : b) sym += a.count(p) ? 0 : 1;
    EXPECT_EQ(sym, 8);
    EXPECT_EQ(invariance_defect(z2, z2.element({1, 0}), FiniteSubset(box)), ratio(8, 16));
    EXPECT_THROW(invariance_defect(z2, z2.identity(), FiniteSubset{}), DomainError);
}

TEST(Group, TailBoundsDominateExactTails) {
    for (const char* name : {"Z", "Z^2", "Z^3", "H3"}) {
        Weighting w(GroupModel::parse(name));
        const std::uint64_t top = w.model().kind() == GroupKind::Zd ? 120 : caps().max_bfs_radius;
        for (std::uint64_t r : {0ull, 1ull, 3ull, 8ull}) {
            Rational partial = 0;
            for (std::uint64_t n = r + 1; n <= top; ++n) {
                partial += Rational(mpz_class(w.model().sphere_size(n).str())) * pow2_inverse(n);
            }
            EXPECT_GE(w.tail_bound(r), partial) << name << " r=" << r;
            EXPECT_GE(w.tail_bound(r), w.tail_bound(r + 1));
            // ball mass + tail bounds the full sum from above consistently
            EXPECT_GT(w.ball_mass(r) + w.tail_bound(r), w.ball_mass(r + 1));
        }
        EXPECT_LT(w.tail_bound(60), Rational(1, 1000000));
    }
}

TEST(Group, Diameter) {
    auto z2 = GroupModel::zd(2);
    EXPECT_EQ(diameter(z2, z2.ball(2)), 4);
    EXPECT_EQ(max_word_length(z2, z2.ball(2)), 2);
}
