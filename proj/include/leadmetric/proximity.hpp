#pragma once

#include "leadmetric/constructions.hpp"
#include "leadmetric/io.hpp"

#include <optional>
#include <string>
#include <vector>

namespace leadmetric {

/// T with its generating family; S and Q permutation actions; `s_sets[i]` is
/// the set of S's space playing the role of family set i + 1.
struct ProximityInputs {
    Action t;
    GeneratingFamily t_family;
    Action s;
    std::vector<PointSet> s_sets;
    Action q;
    Rational delta;
};

struct ProximityConfig {
    std::uint64_t conjugator_budget = 5000;  // transpositions tried for U
    std::uint64_t selection_budget = 100'000;
    std::uint64_t s_mixing_radius = 32;
    std::optional<std::uint64_t> t_horizon;  // permutation-backend T only
    std::uint64_t sweep_margin = 2;
    std::uint64_t max_tile_side = 64;
    RefineStrategy strategy = RefineStrategy::Minimal;
    std::optional<Rational> epsilon;  // overrides the derived ε when smaller
};

/// Everything the checks need, so a certificate can be re-verified without
/// repeating any search.
struct ProximityPack {
    explicit ProximityPack(ProximityInputs in, ProximityConfig cfg = {}) : inputs(std::move(in)), config(std::move(cfg)) {}

    ProximityInputs inputs;
    ProximityConfig config;
    std::size_t prefix = 0;  // M: r = {A_1..A_M}
    Rational epsilon = 0;
    FiniteSubset h_t;
    std::vector<std::uint64_t> tile_sides;
    Permutation u;  // S is replaced by U^{-1} S U
    ElementSelection selection;
    RefinedTile refined;
    PointSet tower_base;
    std::uint64_t sweep_radius = 0;
    /// Set when a search stage found nothing; evaluation stops there.
    std::string search_stage;
    std::string search_failure;

    bool trivial() const { return prefix == 0; }
};

/// One checked inequality `lhs relation rhs` with relation "<", "<=" or "==".
struct InequalityRecord {
    std::string stage;
    std::string name;
    Rational lhs;
    std::string relation;
    Rational rhs;
    bool holds = false;
    std::string note;

    friend bool operator==(const InequalityRecord& a, const InequalityRecord& b) {
        return a.stage == b.stage && a.name == b.name && a.lhs == b.lhs && a.relation == b.relation &&
               a.rhs == b.rhs && a.holds == b.holds && a.note == b.note;
    }
};

bool relation_holds(const Rational& lhs, const std::string& relation, const Rational& rhs);

/// Bad-mass accounting of the mixture sweep, reported against the per-case
/// bounds (ε, 2ε, ε) but not asserted.
struct CaseAccount {
    ProofCase proof_case = ProofCase::InH;
    std::size_t elements = 0;
    Rational max_bad_mass = 0;
    Rational bound = 0;
    bool within = true;
};

struct ProximityEvaluation {
    std::vector<InequalityRecord> records;
    std::vector<CaseAccount> cases;
    Rational sweep_sup = 0;
    Rational global_sup = 0;
    Rational w_upper = 1;
    std::uint32_t z_ground_size = 0;

    bool passed() const;
    /// First failing record, if any.
    const InequalityRecord* first_failure() const;
};

/// Runs every check of the pipeline on a fixed pack. The stages, in order:
/// parameters, mixing-T, tile, conjugation, selection, refined-tower, special, sweep,
/// global, final. A stage that cannot be evaluated adds one failing record
/// carrying the error and ends the evaluation.
ProximityEvaluation evaluate(const ProximityPack& pack);

struct ProximityCertificate {
    ProximityPack pack;
    ProximityEvaluation evaluation;
    bool passed() const { return evaluation.passed(); }
    std::string failed_stage() const;
};

/// Searches the parameters stage by stage, then evaluates the pack.
ProximityCertificate certify_proximity(const ProximityInputs& inputs, const ProximityConfig& config = {});

Json encode(const ProximityPack& pack);
ProximityPack decode_pack(const JsonReader& r);
Json encode(const InequalityRecord& rec);
InequalityRecord decode_record(const JsonReader& r);
Json encode(const ProximityCertificate& cert);

struct ReplayResult {
    bool verdict = false;            // recomputed records all hold and match the stored ones
    bool stored_verdict = false;
    std::size_t checked = 0;
    std::optional<InequalityRecord> first_failure;
    std::string mismatch;            // first stored record differing from its recomputation
};

/// Parses a certificate document and re-evaluates its pack.
ReplayResult replay(const Json& certificate);

/// The desk-scale instance: T = Bernoulli(1/2) on Z with r = {[x_0 = 0]},
/// S = rotation on Z_43 with the quadratic residues, Q = rotation on Z_64.
ProximityInputs desk_inputs(const Rational& delta);

}  // namespace leadmetric
