#pragma once

#include "leadmetric/cylinder.hpp"
#include "leadmetric/group.hpp"
#include "leadmetric/permutation.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace leadmetric {

/// Action of Z^d or H3 on {0..N-1} with uniform measure, given by one
/// permutation per positive generator.
class PermutationAction {
public:
    PermutationAction(GroupModel model, std::uint32_t ground_size, std::vector<Permutation> generator_images);

    const GroupModel& model() const { return model_; }
    std::uint32_t ground_size() const { return n_; }
    const std::vector<Permutation>& generator_images() const { return images_; }

    /// T^g. Z^d: product of generator powers. H3: (a,b,c) = z^{c-ab} x^a y^b
    /// with z the commutator x y x^{-1} y^{-1}.
    Permutation element(const GroupElement& g) const;

private:
    GroupModel model_;
    std::uint32_t n_;
    std::vector<Permutation> images_;
    std::vector<CycleForm> cycles_;
    CycleForm center_;  // H3 only: cycles of the commutator image
};

/// Bernoulli shift on alphabet^G with (T^g x)(k) = x(k g) and i.i.d.
/// symbols distributed by `weights`.
class BernoulliAction {
public:
    BernoulliAction(GroupModel model, std::vector<Rational> weights);

    const GroupModel& model() const { return model_; }
    std::uint32_t alphabet() const { return static_cast<std::uint32_t>(weights_.size()); }
    const std::vector<Rational>& weights() const { return weights_; }

private:
    GroupModel model_;
    std::vector<Rational> weights_;
};

enum class Backend { Permutation, Bernoulli };

using MeasurableSet = std::variant<PointSet, CylinderUnion>;

class Action {
public:
    Action(PermutationAction a) : impl_(std::move(a)) {}
    Action(BernoulliAction a) : impl_(std::move(a)) {}

    Backend backend() const { return impl_.index() == 0 ? Backend::Permutation : Backend::Bernoulli; }
    const GroupModel& model() const;
    const PermutationAction& permutation() const;
    const BernoulliAction& bernoulli() const;

private:
    std::variant<PermutationAction, BernoulliAction> impl_;
};

std::string backend_name(Backend b);

/// Throws BackendMismatch unless the set lives in the action's space.
void check_set(const Action& t, const MeasurableSet& a);
/// Same measure space: equal ground size, or equal alphabet and weights.
bool same_space(const Action& t, const Action& s);

MeasurableSet full_set(const Action& t);
MeasurableSet empty_set(const Action& t);

MeasurableSet act(const Action& t, const GroupElement& g, const MeasurableSet& a);
Rational measure(const Action& t, const MeasurableSet& a);
Rational intersection_measure(const Action& t, const MeasurableSet& a, const MeasurableSet& b);
Rational symmetric_difference_measure(const Action& t, const MeasurableSet& a, const MeasurableSet& b);
/// μ(T^g A ∩ B)
Rational correlation(const Action& t, const GroupElement& g, const MeasurableSet& a, const MeasurableSet& b);

MeasurableSet set_intersection(const MeasurableSet& a, const MeasurableSet& b);
MeasurableSet set_union(const MeasurableSet& a, const MeasurableSet& b);
MeasurableSet set_complement(const MeasurableSet& a);
bool same_set(const MeasurableSet& a, const MeasurableSet& b);

struct RelationCheck {
    std::string relation;
    bool pass = true;
    std::string witness;
};

struct ActionReport {
    std::vector<RelationCheck> checks;
    bool ok() const;
};

/// Exact check of the defining relations (commuting generators for Z^d,
/// central commutator for H3). Bernoulli actions are checked through the
/// shift on sample cylinders.
ActionReport verify_action(const Action& t);

/// S × Q with index x·N_Q + y, or the Bernoulli shift over the product
/// alphabet a·|B| + b.
Action product_action(const Action& s, const Action& q);
MeasurableSet product_set(const Action& s, const Action& q, const MeasurableSet& a, const MeasurableSet& b);

/// (U^{-1} T U)^g = U^{-1} ∘ T^g ∘ U.
Action conjugate_action(const Action& t, const Permutation& u);

/// Point map from T's space to S's space.
struct FactorMap {
    std::vector<std::uint32_t> map;
};

struct FactorReport {
    bool equivariant = true;
    bool measure_preserving = true;
    std::string witness;
    bool ok() const { return equivariant && measure_preserving; }
};

/// v ∘ T^g = S^g ∘ v for every g in ball(radius) and every point; μ_T(v^{-1} A)
/// = μ_S(A) for every fibre and every test set.
FactorReport factor_check(const FactorMap& v, const Action& t, const Action& s, std::uint64_t radius,
                          const std::vector<PointSet>& test_sets);
PointSet preimage(const FactorMap& v, std::uint32_t source_size, const PointSet& a);

struct FreenessReport {
    std::uint64_t radius = 0;
    std::vector<std::pair<GroupElement, Rational>> fixed_mass;  // nonidentity g in ball(radius)
    bool free_at_radius = true;
};

FreenessReport freeness_report(const Action& t, std::uint64_t radius);

/// Indexed family A_1, A_2, ... (base 1). `complete` marks a family whose
/// materialized prefix is the whole family; otherwise the family continues
/// beyond the stored sets and tails are bounded by 2^{-M}.
struct GeneratingFamily {
    std::vector<MeasurableSet> sets;
    bool complete = false;

    std::size_t size() const { return sets.size(); }
    const MeasurableSet& at(std::size_t index) const;
    /// sum_{i > prefix} 2^{-i} over the whole family.
    Rational tail(std::size_t prefix) const;
};

/// Permutation actions: A_i = {x : bit i-1 of x is set}, a complete family
/// separating points. Bernoulli actions: [x_s = a] over s in ball order and
/// a < alphabet-1 (first `count` of them).
GeneratingFamily default_family(const Action& t, std::size_t count = 8);

/// Rotation x -> x + step on Z_n as a Z-action.
Action rotation_action(std::uint32_t n, std::uint32_t step = 1);
/// Z^d acting on Z_{n_1} x ... x Z_{n_d} by coordinate translations
/// (row-major indexing).
Action torus_action(const std::vector<std::uint32_t>& sides);
/// H3 acting on the Heisenberg group mod n by left multiplication;
/// point (a,b,c) has index (a n + b) n + c.
Action heisenberg_mod_action(std::uint32_t n);

}  // namespace leadmetric
