#include "leadmetric/caps.hpp"
#include "leadmetric/errors.hpp"
#include "leadmetric/metrics.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace leadmetric;

namespace {

Rational r(long p, unsigned long q) { return ratio(p, q); }

Action z_action(const Permutation& p) { return PermutationAction(GroupModel::zd(1), static_cast<std::uint32_t>(p.size()), {p}); }

Action bern(std::vector<Rational> w) { return BernoulliAction(GroupModel::zd(1), std::move(w)); }

long period(const Permutation& p) {
    long order = 1;
    for (long k = 1;; ++k) {
        if (oracle::naive_power(p, k) == oracle::naive_power(p, 0)) return k;
        order = k;
    }
    return order;
}

// #(p A △ q A) and #(p A ∩ B) by direct point loops.
long image_difference(const Permutation& p, const Permutation& q, const PointSet& a) {
    std::vector<int> hit(p.size(), 0);
    for (auto x : a.points()) {
        hit[p[x]] ^= 1;
        hit[q[x]] ^= 2;
    }
    long n = 0;
    for (int h : hit) n += (h == 1 || h == 2) ? 1 : 0;
    return n;
}

long image_meet(const Permutation& p, const PointSet& a, const PointSet& b) {
    long n = 0;
    for (auto x : a.points()) n += b.contains(p[x]) ? 1 : 0;
    return n;
}

// Truncated weak metric for two Z-actions, straight from the double sum.
Rational weak_d_oracle(const Permutation& p, const Permutation& q, const GeneratingFamily& fam, std::size_t m,
                       long radius) {
    const auto n = static_cast<unsigned long>(p.size());
    Rational total = 0;
    for (long g = -radius; g <= radius; ++g) {
        Rational inner = 0;
        for (std::size_t i = 1; i <= std::min(m, fam.size()); ++i) {
            const auto& a = std::get<PointSet>(fam.at(i));
            const long fwd = image_difference(oracle::naive_power(p, g), oracle::naive_power(q, g), a);
            const long bwd = image_difference(oracle::naive_power(p, -g), oracle::naive_power(q, -g), a);
            inner += pow2_inverse(i) * ratio(fwd + bwd, n);
        }
        total += pow2_inverse(static_cast<unsigned long>(std::labs(g))) * inner;
    }
    return total;
}

// max over one joint period of the truncated a(T^g, S^g).
Rational lead_w_oracle(const Permutation& p, const Permutation& q, const GeneratingFamily& fam, std::size_t m) {
    const long per = std::lcm(period(p), period(q));
    const auto n = static_cast<unsigned long>(p.size());
    Rational best = 0;
    for (long g = 0; g < per; ++g) {
        const auto pg = oracle::naive_power(p, g), qg = oracle::naive_power(q, g);
        Rational sum = 0;
        for (std::size_t i = 1; i <= m; ++i) {
            for (std::size_t j = 1; j <= m; ++j) {
                const auto& a = std::get<PointSet>(fam.at(i));
                const auto& b = std::get<PointSet>(fam.at(j));
                sum += pow2_inverse(i + j) * abs(ratio(image_meet(pg, a, b) - image_meet(qg, a, b), n));
            }
        }
        best = max(best, sum);
    }
    return best;
}

}  // namespace

TEST(Metrics, TailArithmetic) {
    auto fam = default_family(bern({r(1, 2), r(1, 2)}), 10);
    EXPECT_EQ(pair_tail(fam, 1), r(3, 4));
    EXPECT_LE(pair_tail(fam, 1), 1);
    EXPECT_LE(pair_tail(fam, 8), r(1, 128));
    for (std::size_t m = 1; m < 10; ++m) EXPECT_GT(pair_tail(fam, m), pair_tail(fam, m + 1));
    auto complete = default_family(rotation_action(16));
    EXPECT_EQ(complete.size(), 4u);
    EXPECT_EQ(pair_tail(complete, 4), 0);
    EXPECT_EQ(family_weight(complete, 9), r(15, 16));
}

TEST(Metrics, IdenticalActions) {
    auto t = rotation_action(10, 3);
    auto fam = default_family(t);
    auto d = weak_d(t, t, fam, {4, 6});
    EXPECT_EQ(d.lower, 0);
    EXPECT_EQ(d.upper, 2 * fam.tail(0) * Weighting(t.model()).tail_bound(6));
    auto w = lead_w(t, t, fam, 4);
    EXPECT_EQ(w.lower, 0);
    EXPECT_EQ(w.upper, 0);
    EXPECT_TRUE(w.certified);
    auto b = bern({r(1, 3), r(2, 3)});
    auto bf = default_family(b, 6);
    auto wb = lead_w(b, b, bf, 6);
    EXPECT_EQ(wb.lower, 0);
    EXPECT_EQ(wb.upper, pair_tail(bf, 6));
    auto m = lead_m(b, b, bf, {6, 3});
    EXPECT_EQ(m.lower, 0);
}

TEST(Metrics, WeakDMatchesDoubleSum) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = oracle::random_cycle_permutation(rng, 12, 5);
        const auto q = oracle::random_cycle_permutation(rng, 12, 5);
        auto t = z_action(p), s = z_action(q);
        auto fam = default_family(t);
        for (std::size_t m : {2u, 4u}) {
            auto d = weak_d(t, s, fam, {m, 3});
            EXPECT_EQ(d.lower, weak_d_oracle(p, q, fam, m, 3));
            EXPECT_EQ(d.lower, weak_d(s, t, fam, {m, 3}).lower);
            EXPECT_EQ(d.upper, weak_d(s, t, fam, {m, 3}).upper);
        }
    }
}

TEST(Metrics, LeadWMatchesPeriodScan) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = oracle::random_cycle_permutation(rng, 10, 4);
        const auto q = oracle::random_cycle_permutation(rng, 10, 4);
        auto t = z_action(p), s = z_action(q);
        auto fam = default_family(t);
        auto w = lead_w(t, s, fam, 4);
        EXPECT_TRUE(w.certified);
        EXPECT_EQ(w.lower, lead_w_oracle(p, q, fam, 4));
        EXPECT_EQ(w.lower, w.upper);  // complete family of 4 sets
        EXPECT_GE(w.lower, corr_a(t, s, t.model().identity(), fam, 4).lower);
    }
}

TEST(Metrics, PermutationRelabeling) {
    auto t = rotation_action(10, 1);
    Permutation u = identity_permutation(10);
    std::swap(u[0], u[7]);
    auto s = conjugate_action(t, u);
    auto fam = default_family(t);
    auto d1 = weak_d(t, s, fam, {4, 5});
    auto d2 = weak_d(s, t, fam, {4, 5});
    EXPECT_EQ(d1.lower, d2.lower);
    EXPECT_GT(d1.lower, 0);
    auto m1 = lead_m(t, s, fam, {4, 5});
    auto m2 = lead_m(s, t, fam, {4, 5});
    EXPECT_EQ(m1.lower, m2.lower);
    EXPECT_EQ(m1.upper, m2.upper);
    EXPECT_GE(m1.lower, d1.lower);
    EXPECT_GE(m1.upper, d1.upper);
}

TEST(Metrics, TriangleInequality) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Action> acts;
        for (int k = 0; k < 3; ++k) acts.push_back(z_action(oracle::random_cycle_permutation(rng, 16, 6)));
        auto fam = default_family(acts[0]);
        const Truncation tr{4, 3};
        auto d = [&](int x, int y) { return weak_d(acts[x], acts[y], fam, tr); };
        auto m = [&](int x, int y) { return lead_m(acts[x], acts[y], fam, tr); };
        auto g = acts[0].model().element({2});
        auto a = [&](int x, int y) { return corr_a(acts[x], acts[y], g, fam, 4); };
        EXPECT_LE(d(0, 2).lower, d(0, 1).upper + d(1, 2).upper);
        EXPECT_LE(m(0, 2).lower, m(0, 1).upper + m(1, 2).upper);
        EXPECT_LE(a(0, 2).lower, a(0, 1).upper + a(1, 2).upper);
        EXPECT_LE(a(0, 1).upper, 1);
        EXPECT_LE(lead_w(acts[0], acts[1], fam, 4).upper, 1);
    }
}

TEST(Metrics, CorrAForBernoulliPair) {
    auto t = bern({r(1, 2), r(1, 2)});
    auto s = bern({r(1, 3), r(2, 3)});
    auto fam = default_family(t, 8);
    auto z = t.model();
    // g = 9 moves every family support off the others: all terms factorize
    auto g = z.element({9});
    auto a8 = corr_a(t, s, g, fam, 8);
    Rational expect = 0;
    for (std::size_t i = 1; i <= 8; ++i) {
        for (std::size_t j = 1; j <= 8; ++j) {
            const auto& ai = std::get<CylinderUnion>(fam.at(i));
            const auto& aj = std::get<CylinderUnion>(fam.at(j));
            const Rational ct = oracle::brute_correlation(z, t.bernoulli().weights(), g, ai, aj);
            const Rational cs = oracle::brute_correlation(z, s.bernoulli().weights(), g, ai, aj);
            EXPECT_EQ(ct, r(1, 4));
            EXPECT_EQ(cs, r(1, 9));
            expect += pow2_inverse(i + j) * abs(ct - cs);
        }
    }
    EXPECT_EQ(a8.lower, expect);
    // nested refinement
    MetricInterval prev = corr_a(t, s, g, fam, 1);
    EXPECT_LE(prev.width(), 1);
    for (std::size_t m = 2; m <= 8; ++m) {
        auto cur = corr_a(t, s, g, fam, m);
        EXPECT_GE(cur.lower, prev.lower);
        EXPECT_LE(cur.upper, prev.upper);
        prev = cur;
    }
    EXPECT_LE(prev.width(), r(1, 128));
}

TEST(Metrics, LeadWBeyondHorizonIsExact) {
    auto t = bern({r(1, 2), r(1, 2)});
    auto s = bern({r(1, 2), r(1, 2)});
    std::mt19937_64 rng(24);
    auto z = t.model();
    GeneratingFamily fam;
    fam.sets.push_back(oracle::random_cylinder(rng, 2, {z.element({0}), z.element({1})}));
    fam.sets.push_back(oracle::random_cylinder(rng, 2, {z.element({0}), z.element({2})}));
    // same weights: identical marginals, beyond-horizon term 0
    auto w = lead_w(t, s, fam, 2);
    EXPECT_EQ(w.lower, 0);
    auto s2 = bern({r(1, 4), r(3, 4)});
    auto w2 = lead_w(t, s2, fam, 2);
    Rational scan = 0;
    for (const auto& g : z.ball_sequence(8)) scan = max(scan, corr_a(t, s2, g, fam, 2).lower);
    EXPECT_EQ(w2.lower, scan);
    EXPECT_TRUE(w2.certified);
    EXPECT_EQ(w2.radius, 2u);
}

TEST(Metrics, PermutationSupRefusedWithoutHorizon) {
    Caps saved = caps();
    Caps small = saved;
    small.max_image_closure = 5;
    set_caps(small);
    auto t = rotation_action(11);
    auto fam = default_family(t);
    EXPECT_THROW(lead_w(t, rotation_action(11, 2), fam, 2), DomainError);
    auto w = lead_w(t, rotation_action(11, 2), fam, 2, 6);
    EXPECT_FALSE(w.certified);
    set_caps(saved);
}

TEST(Metrics, QNeighborhood) {
    auto t = bern({r(1, 2), r(1, 2)});
    auto fam = default_family(t, 4);
    EXPECT_EQ(in_q_neighborhood(t, t, fam, {1, 2}, r(1, 1000)).verdict, Verdict::Yes);
    EXPECT_EQ(in_q_neighborhood(t, t, fam, {1, 2}, 0).verdict, Verdict::No);
    auto s = bern({r(2, 5), r(3, 5)});
    auto res = in_q_neighborhood(t, s, fam, {1, 2}, r(1, 5));
    // exhaustive scan over a ball containing every interaction, plus a far element
    Rational scan = 0;
    auto z = t.model();
    for (const auto& g : z.ball_sequence(6)) {
        for (std::size_t i : {1, 2}) {
            for (std::size_t j : {1, 2}) {
                scan = max(scan, abs(correlation(t, g, fam.at(i), fam.at(j)) - correlation(s, g, fam.at(i), fam.at(j))));
            }
        }
    }
    EXPECT_EQ(res.sup, scan);
    EXPECT_EQ(res.sup, r(1, 10));  // μ(A) = 1/2 vs 2/5 at g = e
    EXPECT_EQ(res.verdict, Verdict::Yes);
    EXPECT_EQ(in_q_neighborhood(t, s, fam, {1, 2}, r(1, 10)).verdict, Verdict::No);
    auto u = in_u_neighborhood(t, s, fam, {1}, r(1, 5), {z.element({3})});
    EXPECT_EQ(u.sup, r(1, 4) - r(4, 25));
}

TEST(Metrics, ForwardInclusion) {
    auto t = rotation_action(16);
    auto fam = default_family(t);
    auto fw = forward_inclusion(fam, 1);
    EXPECT_EQ(fw.q, (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(fw.tail_term, r(3, 8));
    std::mt19937_64 rng(25);
    int premises = 0;
    for (int trial = 0; trial < 50; ++trial) {
        Permutation u = identity_permutation(16);
        std::swap(u[rng() % 16], u[rng() % 16]);
        auto s = conjugate_action(t, u);
        auto check = check_forward_inclusion(t, s, fam, fw);
        EXPECT_TRUE(check.decided);
        EXPECT_TRUE(check.holds());
        premises += check.premise ? 1 : 0;
    }
    EXPECT_GT(premises, 0);
}

TEST(Metrics, BackwardInclusion) {
    auto bw = backward_inclusion({1}, r(1, 2));
    EXPECT_EQ(bw.max_index, 1u);
    EXPECT_EQ(bw.radius, r(1, 8));
    auto t = bern({r(1, 2), r(1, 2)});
    auto fam = default_family(t, 12);
    int premises = 0;
    for (int k = 1; k <= 50; ++k) {
        auto s = bern({r(1, 2) + ratio(1, 2000 * k + 3), r(1, 2) - ratio(1, 2000 * k + 3)});
        auto check = check_backward_inclusion(t, s, fam, backward_inclusion({1, 2}, r(1, 2)));
        EXPECT_TRUE(check.holds());
        premises += check.premise ? 1 : 0;
    }
    EXPECT_GT(premises, 0);
}

TEST(Metrics, FingerprintWorkedExample) {
    auto t = bern({r(1, 2), r(1, 2)});
    auto fam = default_family(t, 2);
    auto fp = fingerprint(t, fam, {1}, r(1, 4));
    EXPECT_EQ(fp.n, 0u);
    ASSERT_EQ(fp.cells.size(), 1u);
    EXPECT_EQ(fp.cells[0], 4);
    EXPECT_EQ(grid_index(r(1, 2), r(1, 4)), 4);
    auto self = fingerprint_close(t, t, fam, {1}, r(1, 4));
    EXPECT_TRUE(self.equal);
    EXPECT_EQ(self.sup, 0);
    auto other = bern({r(1, 3), r(2, 3)});
    EXPECT_FALSE(fingerprint_close(t, other, fam, {1}, r(1, 20)).equal);
}

TEST(Metrics, GridIndexIsNearest) {
    const Rational eps = r(1, 6);
    for (long num = 0; num <= 60; ++num) {
        const Rational v = ratio(num, 60);
        const Integer k = grid_index(v, eps);
        const Rational center = eps * Rational(k.str()) / 2;
        EXPECT_LE(abs(v - center), eps / 4);
        EXPECT_LT(abs(v - center), eps / 2);
    }
}

TEST(Metrics, EqualFingerprintsImplyCloseness) {
    std::mt19937_64 rng(26);
    auto z = GroupModel::zd(1);
    int equal = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const Rational p = ratio(40 + static_cast<long>(rng() % 21), 100);
        const Rational p2 = p + ratio(static_cast<long>(rng() % 5), 1000);
        Action t = BernoulliAction(z, {p, 1 - p});
        Action s = BernoulliAction(z, {p2, 1 - p2});
        GeneratingFamily fam;
        fam.sets.push_back(oracle::random_cylinder(rng, 2, {z.element({0}), z.element({1})}));
        fam.sets.push_back(oracle::random_cylinder(rng, 2, {z.element({-1})}));
        auto c = fingerprint_close(t, s, fam, {1, 2}, r(1, 5));
        EXPECT_TRUE(c.holds()) << c.sup;
        equal += c.equal ? 1 : 0;
    }
    EXPECT_GT(equal, 0);
}

TEST(Metrics, MixingProfiles) {
    auto t = bern({r(1, 2), r(1, 2)});
    auto z = t.model();
    GeneratingFamily single;
    single.sets.push_back(CylinderUnion::coordinate(2, z.identity(), 0));
    auto p0 = mixing_profile(t, single, 1, 6);
    EXPECT_TRUE(p0.mixing_certified);
    for (const auto& [radius, v] : p0.rows) EXPECT_EQ(v, 0) << radius;
    GeneratingFamily pair;
    pair.sets.push_back(CylinderUnion::make(2, {z.element({0}), z.element({1})}, {Pattern{0, 0}}));
    auto p1 = mixing_profile(t, pair, 1, 6);
    ASSERT_TRUE(p1.zero_beyond);
    EXPECT_LE(*p1.zero_beyond, 2u);
    EXPECT_GT(p1.rows[0].second, 0);
    for (const auto& [radius, v] : p1.rows) {
        if (radius > *p1.zero_beyond) EXPECT_EQ(v, 0);
    }
    auto rot = rotation_action(10);
    auto pr = mixing_profile(rot, default_family(rot), 2, 8);
    EXPECT_FALSE(pr.mixing_certified);
    EXPECT_GT(pr.rows.back().second, 0);
}

TEST(Metrics, CompletenessStages) {
    std::vector<Action> seq;
    for (unsigned k = 2; k <= 7; ++k) seq.push_back(bern({r(1, 2) + pow2_inverse(k), r(1, 2) - pow2_inverse(k)}));
    auto limit = bern({r(1, 2), r(1, 2)});
    auto fam = default_family(limit, 4);
    auto stages = completeness_demo(seq, limit, fam, 4, 6);
    ASSERT_EQ(stages.size(), seq.size());
    for (std::size_t i = 0; i < stages.size(); ++i) {
        EXPECT_TRUE(stages[i].holds);
        if (i > 0) {
            EXPECT_LE(stages[i].cauchy, stages[i - 1].cauchy);
            EXPECT_LT(stages[i].w_to_limit, stages[i - 1].w_to_limit);
        }
    }
}

TEST(Metrics, BackendMismatches) {
    auto t = bern({r(1, 2), r(1, 2)});
    auto s = bern({r(1, 3), r(2, 3)});
    auto fam = default_family(t, 4);
    EXPECT_THROW(weak_d(t, s, fam, {4, 2}), BackendMismatch);
    EXPECT_THROW(lead_w(t, rotation_action(4), fam, 2), BackendMismatch);
    EXPECT_THROW(fingerprint(rotation_action(4), default_family(rotation_action(4)), {1}, r(1, 4)), DomainError);
}
