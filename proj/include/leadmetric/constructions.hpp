#pragma once

#include "leadmetric/actions.hpp"
#include "leadmetric/sequences.hpp"
#include "leadmetric/tiles.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace leadmetric {

/// Disjoint translates Q^g E, g in G, with the uncovered remainder O.
/// `levels` is aligned with `tile.elements()`.
struct RokhlinTower {
    PointSet base;
    FiniteSubset tile;
    std::vector<PointSet> levels;
    PointSet remainder;
    Rational epsilon;
    bool reached = false;  // μ(O) <= ε

    Rational remainder_mass() const;
    /// Index of the level containing y, or nullopt for remainder points.
    std::vector<std::optional<std::size_t>> level_index() const;
};

/// Greedy base selection in point-index order: x joins E when its slice
/// {Q^g x : g in G} consists of #G distinct unclaimed points. The scan runs
/// over every point; `reached` records whether μ(O) <= ε.
RokhlinTower build_tower(const Action& q, const FiniteSubset& g, const Rational& epsilon);

struct TowerCheck {
    bool levels_match = true;   // level_g = Q^g E
    bool disjoint = true;
    bool equal_mass = true;     // #G μ(E) = μ(∪ levels)
    bool remainder_complement = true;
    bool small_remainder = true;
    std::string failure;
    bool ok() const { return levels_match && disjoint && equal_mass && remainder_complement && small_remainder; }
};

TowerCheck check_tower(const Action& q, const RokhlinTower& tower);

struct RefinedTower {
    RefinedTile refined;
    RokhlinTower tower;
    RefineConditions conditions;  // 1-3
    TowerCheck tower_check;       // 4
    bool ok() const { return conditions.ok() && tower_check.ok(); }
};

RefinedTower refine_with_tower(const Action& q, const Tile& f, const FiniteSubset& c, const Rational& epsilon,
                         RefineStrategy strategy = RefineStrategy::Minimal);

struct SelectionOptions {
    std::uint64_t budget = 100'000;
    /// Permutation-backend S: radius of the ball scanned for correlations
    /// deviating from the product. Required there, ignored for Bernoulli S.
    std::optional<std::uint64_t> mixing_radius;
};

/// Element selection for the proximity selection.
///  - factor_radius N0: every x with |x| > N0 has |μ(S^x A ∩ B) − μ(A)μ(B)| < ε on r;
///  - h = ∪_{f,h∈F} f^{-1} ball(N0) h, the envelope C_0;
///  - c = ball(N0 + 4 max|f|), so g ∉ C forces k = f^{-1} g h ∉ H;
///  - g_1 is ball-minimal outside H^5, later g_n come from conjugator_search
///    over I_n = ∪_{i<n} g_i H g_i^{-1} starting at length 5ρ_{n-1} + 1,
///    with ρ_n = |g_n| the radius of the ball envelope C_n.
struct ElementSelection {
    Rational epsilon;
    std::uint64_t factor_radius = 0;
    std::uint64_t max_f = 0;
    std::uint64_t c_radius = 0;
    FiniteSubset h;
    std::vector<GroupElement> elements;
    std::vector<Integer> envelope_radii;  // ρ_0 = max length in H^5, ρ_1, ...
    bool complete = true;
    bool mixing_certified = false;
    std::optional<std::uint64_t> mixing_radius;  // permutation S only
};

ElementSelection select_elements(const Action& s, const FiniteSubset& f, const std::vector<MeasurableSet>& r,
                              const Rational& epsilon, std::size_t count, const SelectionOptions& options = {});

/// Exceptional counts of the selection over every g for which any exception is
/// possible (g = f g_j f^{-1} y h g_i^{-1} h^{-1} with y deviating), so the
/// scan covers the whole group for Bernoulli S.
struct ExceptionReport {
    std::size_t scanned = 0;
    std::size_t max_pairs = 0;                // i != j, per (g, f, h, A, B)
    std::size_t max_diagonal_outside_c = 0;   // i, per (g, f, h, A, B), g ∉ C
    std::optional<GroupElement> pair_witness;
    std::optional<GroupElement> diagonal_witness;
    bool exhaustive = false;
    bool pairs_ok() const { return max_pairs <= 2; }
    bool diagonal_ok() const { return max_diagonal_outside_c <= 1; }
};

ExceptionReport count_exceptions(const Action& s, const FiniteSubset& f, const std::vector<MeasurableSet>& r,
                           const ElementSelection& selection);

/// Structural conditions on a stored prefix: g_n outside the fifth power of
/// the previous envelope and inside its own envelope; first failing index.
struct SeparationCheck {
    bool ok = true;
    std::string failure;
};
SeparationCheck check_separation(const GroupModel& model, const ElementSelection& selection);

struct SpecialActionParams {
    Action s;
    Action q;
    std::vector<PointSet> r;             // sets in S's space
    FiniteSubset f;
    FiniteSubset centers;                // c_i
    std::vector<GroupElement> g_list;    // g_i, aligned with centers
    RokhlinTower tower;                  // over G = ⊔ F c_i
    /// Sets of Z's space mapped by V onto A × Y; defaults to A × Y itself.
    std::optional<std::vector<PointSet>> v_source;
};

struct SpecialAction {
    Action z;
    Permutation v;  // Z's space → X × Y (index x N_Y + y)
    Permutation j;
    std::vector<PointSet> r_z;  // V^{-1}(A × Y)
    std::vector<std::pair<std::size_t, std::size_t>> level_word;  // per level of G: (f index, center index)
};

/// Z = V^{-1} J^{-1} (S × Q) J V on N_X N_Y points.
SpecialAction build_special_action(const SpecialActionParams& params);

/// Index-order bijection U of {0..n-1} with U(source_i) = target_i for all
/// i, matching atoms of the two set systems. Strict mode throws DomainError
/// naming the first set whose cardinalities differ; otherwise unmatched
/// points are paired in index order.
Permutation transfer_bijection(std::uint32_t n, const std::vector<PointSet>& source, const std::vector<PointSet>& target,
                               bool strict);

enum class ProofCase { InH, InCOutsideH, OutsideC };
std::string case_name(ProofCase c);

struct QuadrupleTerm {
    std::size_t f = 0, h = 0, i = 0, j = 0;  // indices into F and centers
    GroupElement k;                           // f^{-1} g h
    Rational s_value;                         // μ(S^{g_j^{-1} k g_i} Ã_h ∩ B̃_f)
    Rational weight;                          // μ(Q^{g h c_i} E ∩ Q^{f c_j} E)
    Rational difference;                      // |μ(T^g A ∩ B) − s_value|
};

struct MixtureDecomposition {
    Rational t_value;
    Rational z_value;
    Rational lhs;
    Rational rhs;
    Rational remainder_term;  // 2 μ(O)
    std::vector<QuadrupleTerm> terms;  // nonzero weights only
    Rational bad_mass;                 // weights of terms with difference > 2ε
    std::size_t bad_quadruples = 0;
    ProofCase proof_case = ProofCase::OutsideC;
    bool holds() const { return lhs <= rhs; }
};

/// Mixture decomposition of μ(Z^g A ∩ B) for one (g, A, B): A = r[a], B = r[b] on S's side and t_sets[a],
/// t_sets[b] on T's side. `h_t` is the set outside which T factorizes and
/// `c_radius` the envelope radius used for the case split.
MixtureDecomposition mixture_decomposition(const Action& t, const std::vector<MeasurableSet>& t_sets,
                                const SpecialActionParams& params, const SpecialAction& special,
                                const GroupElement& g, std::size_t a, std::size_t b, const FiniteSubset& h_t,
                                std::uint64_t c_radius, const Rational& epsilon);

/// U with U(shared_i) = v^{-1}(q_i) and the exact identity
/// μ(S^g A ∩ B) = μ(U^{-1} T^g U shared_A ∩ shared_B) over every distinct
/// image of T (exhaustive: T^g determines S^g through the factor).
struct FactorWitness {
    Permutation u;
    Action conjugate;
    std::size_t checked = 0;
    Rational max_difference = 0;
    bool exact = true;
};

FactorWitness factor_conjugacy_witness(const Action& t, const Action& s, const FactorMap& v,
                                       const std::vector<PointSet>& q, const std::vector<PointSet>& shared);

/// Product P = T_1 × ... × T_k; for each T_i a conjugate of P matched to
/// the shared family (bit sets of P's space, indices q) as closely as the
/// cardinalities allow, with the exact sup over all g of the correlation
/// difference on q.
struct DensityEntry {
    std::size_t index = 0;
    bool cardinalities_match = true;
    Rational distance;
    bool within = false;  // distance < ε
};

struct DensityReport {
    std::uint32_t product_size = 0;
    Rational epsilon;
    std::vector<DensityEntry> entries;
    bool ok() const;
};

DensityReport density_demo(const std::vector<Action>& actions, const std::vector<std::size_t>& q,
                           const Rational& epsilon);

}  // namespace leadmetric
