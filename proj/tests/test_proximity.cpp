#include "leadmetric/errors.hpp"
#include "leadmetric/proximity.hpp"

#include <gtest/gtest.h>

using namespace leadmetric;

namespace {

const ProximityCertificate& desk() {
    static const ProximityCertificate cert = certify_proximity(desk_inputs(ratio(9, 10)));
    return cert;
}

std::string describe(const ProximityCertificate& c) {
    const auto* f = c.evaluation.first_failure();
    return f ? f->stage + ": " + f->name + " " + to_string(f->lhs) + " " + f->relation + " " + to_string(f->rhs) +
                   " " + f->note
             : "passed";
}

bool has_stage(const ProximityEvaluation& ev, const std::string& stage) {
    for (const auto& r : ev.records) {
        if (r.stage == stage) return true;
    }
    return false;
}

}  // namespace

TEST(Proximity, DeskScenarioPasses) {
    const auto& cert = desk();
    ASSERT_TRUE(cert.passed()) << describe(cert);
    EXPECT_EQ(cert.pack.prefix, 1u);
    EXPECT_EQ(cert.pack.epsilon, ratio(1, 20));
    EXPECT_LE(cert.evaluation.z_ground_size, 4096u);
    EXPECT_LE(cert.evaluation.global_sup, 6 * cert.pack.epsilon);
    EXPECT_LT(cert.evaluation.w_upper, ratio(9, 10));
    EXPECT_GE(cert.pack.sweep_radius, cert.pack.selection.c_radius + 2);
    for (const auto& stage : {"parameters", "mixing-T", "tile", "conjugation", "selection", "refined-tower", "special", "sweep",
                              "global", "final"}) {
        EXPECT_TRUE(has_stage(cert.evaluation, stage)) << stage;
    }
    std::size_t mixtures = 0;
    for (const auto& r : cert.evaluation.records) {
        if (r.name.rfind("mixture", 0) == 0) {
            ++mixtures;
            EXPECT_LE(r.lhs, r.rhs);
        }
    }
    EXPECT_EQ(mixtures, 2 * cert.pack.sweep_radius + 1);
}

TEST(Proximity, SweepAgreesWithTheGlobalSup) {
    const auto& ev = desk().evaluation;
    EXPECT_LE(ev.sweep_sup, ev.global_sup);
}

TEST(Proximity, DeskParametersAgreeWithHandDerivation) {
    // r = {[x_0 = 0]}: pair tail 1 - (1/2)^2 = 3/4 < 9/10, and (9/10 - 3/4) / (12/4) = 1/20.
    const auto& p = desk().pack;
    EXPECT_EQ(p.h_t, FiniteSubset{GroupModel::zd(1).element({0})});
    EXPECT_EQ(p.tile_sides, std::vector<std::uint64_t>{1});
    EXPECT_EQ(p.u, identity_permutation(43));
    // quadratic residues mod 43 have a flat difference function, so only 0 deviates
    EXPECT_EQ(p.selection.factor_radius, 0u);
    // 3 / #G < 1/20 needs #G >= 61
    EXPECT_EQ(p.refined.set.size(), 61u);
    EXPECT_EQ(p.selection.elements.size(), 61u);
}

TEST(Proximity, CertificateReplaysAndIsDeterministic) {
    const Json doc = encode(desk());
    const auto result = replay(parse_json(dump(doc), "cert"));
    EXPECT_TRUE(result.verdict) << result.mismatch;
    EXPECT_TRUE(result.mismatch.empty());
    EXPECT_EQ(result.checked, desk().evaluation.records.size());
    EXPECT_EQ(dump(encode(certify_proximity(desk_inputs(ratio(9, 10))))), dump(doc));
}

TEST(Proximity, TamperedElementFailsReplay) {
    Json doc = encode(desk());
    doc["pack"]["construction"]["selection"]["elements"][3] = Json::array({"-7"});
    const auto result = replay(doc);
    EXPECT_FALSE(result.verdict);
    ASSERT_TRUE(result.first_failure.has_value());
    EXPECT_EQ(result.first_failure->stage, "selection");
    EXPECT_NE(result.first_failure->note.find("g_4"), std::string::npos) << result.first_failure->note;
}

TEST(Proximity, TamperedRecordIsAMismatch) {
    Json doc = encode(desk());
    doc["records"][0]["lhs"] = "1/2";
    const auto result = replay(doc);
    EXPECT_FALSE(result.verdict);
    EXPECT_NE(result.mismatch.find("record 0"), std::string::npos);
}

TEST(Proximity, TamperedBaseFailsRefinedTower) {
    Json doc = encode(desk());
    doc["pack"]["construction"]["tower_base"]["points"] = Json::array({0, 1});
    const auto result = replay(doc);
    ASSERT_TRUE(result.first_failure.has_value());
    EXPECT_EQ(result.first_failure->stage, "refined-tower");
}

TEST(Proximity, SmallQFailsRefinedTower) {
    auto in = desk_inputs(ratio(9, 10));
    in.q = rotation_action(40);
    const auto cert = certify_proximity(in);
    EXPECT_FALSE(cert.passed());
    EXPECT_EQ(cert.failed_stage(), "refined-tower") << describe(cert);
}

TEST(Proximity, WrongSizedSetFailsConjugation) {
    auto in = desk_inputs(ratio(9, 10));
    in.s_sets = {PointSet::from_points(43, {0, 1, 2})};
    ProximityConfig cfg;
    cfg.conjugator_budget = 50;
    const auto cert = certify_proximity(in, cfg);
    EXPECT_FALSE(cert.passed());
    EXPECT_EQ(cert.failed_stage(), "conjugation") << describe(cert);
}

TEST(Proximity, MissingSetsFailParameters) {
    auto in = desk_inputs(ratio(9, 10));
    in.s_sets.clear();
    const auto cert = certify_proximity(in);
    EXPECT_FALSE(cert.passed());
    EXPECT_EQ(cert.failed_stage(), "parameters");
}

TEST(Proximity, ProductWithLargeDeltaIsTrivial) {
    Action s = rotation_action(5);
    Action q = rotation_action(4);
    Action t = product_action(s, q);
    ProximityInputs in{t, default_family(t), s, {PointSet::from_points(5, {0, 1})}, q, ratio(3, 2)};
    const auto cert = certify_proximity(in);
    EXPECT_TRUE(cert.passed()) << describe(cert);
    EXPECT_TRUE(cert.pack.trivial());
    ASSERT_EQ(cert.evaluation.records.size(), 1u);
    // complete 5-bit family: w <= W^2 = (31/32)^2
    EXPECT_EQ(cert.evaluation.w_upper, ratio(961, 1024));
    const auto result = replay(encode(cert));
    EXPECT_TRUE(result.verdict);
}

TEST(Proximity, RelationsAreExact) {
    EXPECT_TRUE(relation_holds(ratio(1, 3), "<", ratio(1, 2)));
    EXPECT_FALSE(relation_holds(ratio(1, 2), "<", ratio(1, 2)));
    EXPECT_TRUE(relation_holds(ratio(1, 2), "<=", ratio(1, 2)));
    EXPECT_TRUE(relation_holds(ratio(2, 4), "==", ratio(1, 2)));
    EXPECT_THROW(relation_holds(0, ">", 1), DomainError);
}
