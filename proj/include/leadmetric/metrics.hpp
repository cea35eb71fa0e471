#pragma once

#include "leadmetric/actions.hpp"
#include "leadmetric/kernels.hpp"

#include <optional>
#include <string>
#include <vector>

namespace leadmetric {

/// Certified enclosure [lower, upper] of a metric value. `family_prefix` and
/// `radius` record where the infinite sums were truncated; `certified` is
/// false when a supremum over the group was only taken over a declared ball.
struct MetricInterval {
    Rational lower = 0;
    Rational upper = 0;
    std::size_t family_prefix = 0;
    std::uint64_t radius = 0;
    bool certified = true;

    Rational width() const { return upper - lower; }
    bool contains(const Rational& v) const { return lower <= v && v <= upper; }
};

MetricInterval operator+(const MetricInterval& a, const MetricInterval& b);

struct Truncation {
    std::size_t family_prefix = 8;
    std::uint64_t radius = 4;
};

/// sum_{i <= prefix} 2^{-i} over the family (the whole family when prefix
/// exceeds a complete family's size).
Rational family_weight(const GeneratingFamily& family, std::size_t prefix);
/// sum of 2^{-i-j} over index pairs with i or j beyond the prefix.
Rational pair_tail(const GeneratingFamily& family, std::size_t prefix);
/// First `prefix` sets (at most the family size).
std::vector<MeasurableSet> family_prefix(const GeneratingFamily& family, std::size_t prefix);

/// Joint correlation data of two actions on the same sets, covering the whole
/// group whenever `exhaustive` holds:
///  - Bernoulli pairs: `elements` are the g for which some translated support
///    meets another support; every other g gives the product values
///    `beyond_t`, `beyond_s` ([i][j] = μ(A_i)μ(A_j)).
///  - permutation pairs: `elements` are one representative per distinct pair
///    (T^g, S^g), found by breadth-first search over the generators.
///  - otherwise `elements` is a declared ball and `exhaustive` is false.
struct CorrelationSweep {
    std::string method;
    std::vector<GroupElement> elements;
    CorrelationTable t;
    CorrelationTable s;
    bool exhaustive = false;
    bool has_beyond = false;
    std::vector<Rational> beyond_t;
    std::vector<Rational> beyond_s;
    std::uint64_t horizon = 0;
};

/// Throws DomainError when no exhaustive method applies and no horizon is
/// declared: a supremum over an unchecked remainder is never reported.
CorrelationSweep correlation_sweep(const Action& t, const Action& s, const std::vector<MeasurableSet>& sets,
                                   std::optional<std::uint64_t> declared_horizon = std::nullopt);

/// Distinct joint images (T^g, S^g) with one representative g each, in
/// discovery order, or nullopt beyond the image-closure cap.
std::optional<std::vector<GroupElement>> joint_image_representatives(const Action& t, const Action& s);
/// The same for any tuple of permutation actions of one group, ground sets
/// of any sizes.
std::optional<std::vector<GroupElement>> image_representatives(const std::vector<Action>& actions);

/// Weak metric d, truncated at family prefix M and ball radius R; the upper
/// end adds 2·tail(M) per weighted element and 2·W·tail_bound(R) for the rest.
MetricInterval weak_d(const Action& t, const Action& s, const GeneratingFamily& family, const Truncation& trunc);

/// a(T^g, S^g) truncated at family prefix M.
MetricInterval corr_a(const Action& t, const Action& s, const GroupElement& g, const GeneratingFamily& family,
                      std::size_t prefix);

/// w = sup_g a(T^g, S^g).
MetricInterval lead_w(const Action& t, const Action& s, const GeneratingFamily& family, std::size_t prefix,
                      std::optional<std::uint64_t> declared_horizon = std::nullopt);

/// m = d + w.
MetricInterval lead_m(const Action& t, const Action& s, const GeneratingFamily& family, const Truncation& trunc,
                      std::optional<std::uint64_t> declared_horizon = std::nullopt);

enum class Verdict { Yes, No, Unknown };
std::string verdict_name(Verdict v);

struct NeighborhoodResult {
    Verdict verdict = Verdict::Unknown;
    Rational sup = 0;  // largest difference found
    std::optional<GroupElement> witness;
    std::size_t witness_i = 0;  // 1-based family indices of the witness pair
    std::size_t witness_j = 0;
};

/// S ∈ Q(T, q, ε): sup_g |μ(T^g A ∩ B) − μ(S^g A ∩ B)| < ε for A, B in q
/// (1-based family indices).
NeighborhoodResult in_q_neighborhood(const Action& t, const Action& s, const GeneratingFamily& family,
                                     const std::vector<std::size_t>& q, const Rational& epsilon,
                                     std::optional<std::uint64_t> declared_horizon = std::nullopt);

/// The same bound on an explicit finite list of elements.
NeighborhoodResult in_u_neighborhood(const Action& t, const Action& s, const GeneratingFamily& family,
                                     const std::vector<std::size_t>& q, const Rational& epsilon,
                                     const std::vector<GroupElement>& elements);

/// q = {A_1..A_M} with M minimal such that 2·tail(M) < δ/2.
struct ForwardInclusion {
    Rational delta;
    std::size_t prefix = 0;
    std::vector<std::size_t> q;
    Rational tail_term;  // 2·tail(M)
};
ForwardInclusion forward_inclusion(const GeneratingFamily& family, const Rational& delta);

/// Radius ε / 2^{2l}, l the largest index in q.
struct BackwardInclusion {
    Rational epsilon;
    std::vector<std::size_t> q;
    std::size_t max_index = 0;
    Rational radius;
};
BackwardInclusion backward_inclusion(const std::vector<std::size_t>& q, const Rational& epsilon);

/// One sampled implication premise ⇒ conclusion. `decided` is false when the
/// premise could not be certified.
struct InclusionCheck {
    bool decided = false;
    bool premise = false;
    bool conclusion = false;
    Rational neighborhood_sup;
    MetricInterval w;
    bool holds() const { return !decided || !premise || conclusion; }
};

/// Premise S ∈ Q(T, q, δ/4); conclusion w(T, S) < δ.
InclusionCheck check_forward_inclusion(const Action& t, const Action& s, const GeneratingFamily& family,
                                 const ForwardInclusion& forward);
/// Premise w(T, S) < ε/2^{2l}; conclusion S ∈ Q(T, q, ε).
InclusionCheck check_backward_inclusion(const Action& t, const Action& s, const GeneratingFamily& family,
                                  const BackwardInclusion& backward);

/// Countable parameter pack of a mixing action: n beyond which every
/// correlation on q is within ε/2 of the product, the grid indices n_g per
/// (g, A, B) for |g| <= n (nearest point of the grid εk/2, ties upward), and
/// the marginals μ(A).
struct Fingerprint {
    Rational epsilon;
    std::vector<std::size_t> q;
    std::uint64_t n = 0;
    std::vector<Rational> marginals;
    std::vector<GroupElement> elements;  // ball(n) in ball order
    std::vector<Integer> cells;          // [g][i][j]

    friend bool operator==(const Fingerprint& a, const Fingerprint& b) {
        return a.epsilon == b.epsilon && a.q == b.q && a.n == b.n && a.marginals == b.marginals &&
               a.elements == b.elements && a.cells == b.cells;
    }
};

/// Grid index k with |v − εk/2| <= ε/4.
Integer grid_index(const Rational& value, const Rational& epsilon);

/// Bernoulli actions only (the mixing radius n is exact there).
Fingerprint fingerprint(const Action& t, const GeneratingFamily& family, const std::vector<std::size_t>& q,
                        const Rational& epsilon);

struct FingerprintComparison {
    bool equal = false;
    Rational sup;  // exact sup_g over q of the correlation difference
    bool holds() const { return !equal || sup < epsilon; }
    Rational epsilon;
};
FingerprintComparison fingerprint_close(const Action& t, const Action& s, const GeneratingFamily& family,
                                        const std::vector<std::size_t>& q, const Rational& epsilon);

/// radius r ↦ max over |g| = r and pairs from the prefix of
/// |μ(T^g A ∩ B) − μ(A)μ(B)|, r = 1..R.
struct MixingProfile {
    std::vector<std::pair<std::uint64_t, Rational>> rows;
    bool mixing_certified = false;       // Bernoulli: exact decay to 0
    std::optional<std::uint64_t> zero_beyond;  // profile is 0 for every radius above this
};
MixingProfile mixing_profile(const Action& t, const GeneratingFamily& family, std::size_t prefix,
                             std::uint64_t radius);

/// One stage of the completeness argument on a convergent sequence of
/// Bernoulli actions: with e = w(T, T_m).upper and k0 the factorization
/// radius of T_m, every checked g with |g| > k0 satisfies
/// |μ(T^g A_i ∩ A_j) − μ(A_i)μ(A_j)| <= e(2^{i+j+1} + 1).
struct CompletenessStage {
    std::size_t index = 0;
    Rational cauchy;  // max over later pairs (l, k) of w(T_l, T_k).upper
    Rational w_to_limit;
    std::uint64_t k0 = 0;
    bool holds = true;
};
std::vector<CompletenessStage> completeness_demo(const std::vector<Action>& sequence, const Action& limit,
                                                 const GeneratingFamily& family, std::size_t prefix,
                                                 std::uint64_t check_radius);

}  // namespace leadmetric
