#pragma once

#include "leadmetric/rational.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace leadmetric {

/// Arbitrary precision integer used for group coordinates. Separated
/// sequences grow geometrically, so 64-bit coordinates overflow quickly.
using Integer = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                              boost::multiprecision::et_off>;

enum class GroupKind : std::uint8_t { Zd, Heisenberg3 };

/// Normal form of a group element.
///
/// Zd: the integer vector (coords[0..d)).
/// Heisenberg3: (a, b, c) for the matrix with rows (1 a c), (0 1 b), (0 0 1).
struct GroupElement {
    GroupKind kind = GroupKind::Zd;
    std::uint8_t dim = 1;
    std::array<Integer, 3> coords{};

    const Integer& operator[](std::size_t i) const { return coords[i]; }
    std::size_t size() const { return dim; }

    friend bool operator==(const GroupElement& a, const GroupElement& b) {
        return a.kind == b.kind && a.dim == b.dim && a.coords == b.coords;
    }
    friend bool operator!=(const GroupElement& a, const GroupElement& b) { return !(a == b); }
    /// Lexicographic order on the normal form.
    friend bool operator<(const GroupElement& a, const GroupElement& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        if (a.dim != b.dim) return a.dim < b.dim;
        for (std::size_t i = 0; i < a.dim; ++i) {
            if (a.coords[i] != b.coords[i]) return a.coords[i] < b.coords[i];
        }
        return false;
    }
};

struct GroupElementHash {
    std::size_t operator()(const GroupElement& g) const noexcept;
};

std::string to_string(const GroupElement& g);
std::ostream& operator<<(std::ostream& out, const GroupElement& g);

class FiniteSubset;

/// A finitely generated group with a fixed symmetric generating set:
/// Z^d with the unit vectors, or the discrete Heisenberg group with
/// x = (1,0,0), y = (0,1,0).
///
/// Models are cheap to copy; the Heisenberg word-length memo is shared
/// between copies and guarded by a mutex.
class GroupModel {
public:
    static GroupModel zd(unsigned dimension);
    static GroupModel heisenberg();
    /// Descriptors: "Z", "Z^2", "Z^3", "H3".
    static GroupModel parse(std::string_view descriptor);

    std::string descriptor() const;
    GroupKind kind() const;
    /// Number of normal-form coordinates.
    unsigned coordinates() const;
    /// Number of positive generators (d for Z^d, 2 for H3).
    unsigned rank() const;
    bool is_abelian() const { return kind() == GroupKind::Zd; }

    GroupElement identity() const;
    GroupElement element(std::initializer_list<long long> coords) const;
    GroupElement element(const std::vector<Integer>& coords) const;
    bool owns(const GroupElement& g) const;

    GroupElement compose(const GroupElement& g, const GroupElement& h) const;
    GroupElement invert(const GroupElement& g) const;
    /// g^{-1} h g
    GroupElement conjugate(const GroupElement& g, const GroupElement& h) const;

    /// Symmetric generating set in a fixed order: s_1, s_1^{-1}, s_2, s_2^{-1}, ...
    const std::vector<GroupElement>& generators() const;
    const std::vector<GroupElement>& positive_generators() const;

    /// Exact word length. Z^d: L1 norm. H3: geodesic certificate when
    /// available, otherwise memoized breadth-first search up to the
    /// configured radius cap (ResourceLimit beyond it).
    Integer word_length(const GroupElement& g) const;
    /// Cheap [lower, upper] bounds; equal when the length is certified
    /// without search.
    std::pair<Integer, Integer> word_length_bounds(const GroupElement& g) const;
    /// word_length(g) <= radius, avoiding search whenever the bounds decide it.
    bool in_ball(const GroupElement& g, std::uint64_t radius) const;

    /// { g : |g| <= radius }, sorted by normal form.
    FiniteSubset ball(std::uint64_t radius) const;
    /// Same elements in ball order: by (length, normal form).
    std::vector<GroupElement> ball_sequence(std::uint64_t radius) const;
    /// Elements of length exactly n, lexicographic.
    std::vector<GroupElement> sphere(std::uint64_t n) const;
    Integer sphere_size(std::uint64_t n) const;

    friend bool operator==(const GroupModel& a, const GroupModel& b);
    friend bool operator!=(const GroupModel& a, const GroupModel& b) { return !(a == b); }

    struct Impl;

private:
    explicit GroupModel(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
    void check(const GroupElement& g) const;
    std::shared_ptr<Impl> impl_;
};

/// Finite set of group elements, stored sorted by normal form without
/// duplicates.
class FiniteSubset {
public:
    FiniteSubset() = default;
    explicit FiniteSubset(std::vector<GroupElement> elements);
    FiniteSubset(std::initializer_list<GroupElement> elements)
        : FiniteSubset(std::vector<GroupElement>(elements)) {}

    std::size_t size() const { return elements_.size(); }
    bool empty() const { return elements_.empty(); }
    bool contains(const GroupElement& g) const;
    const std::vector<GroupElement>& elements() const { return elements_; }
    auto begin() const { return elements_.begin(); }
    auto end() const { return elements_.end(); }
    const GroupElement& operator[](std::size_t i) const { return elements_[i]; }

    friend bool operator==(const FiniteSubset& a, const FiniteSubset& b) {
        return a.elements_ == b.elements_;
    }

private:
    std::vector<GroupElement> elements_;
};

FiniteSubset set_product(const GroupModel& model, const FiniteSubset& a, const FiniteSubset& b);
FiniteSubset set_inverse(const GroupModel& model, const FiniteSubset& a);
/// a^k by iterated set_product (k >= 1).
FiniteSubset set_power(const GroupModel& model, const FiniteSubset& a, unsigned k);
FiniteSubset set_union(const FiniteSubset& a, const FiniteSubset& b);
FiniteSubset set_intersection(const FiniteSubset& a, const FiniteSubset& b);
FiniteSubset set_difference(const FiniteSubset& a, const FiniteSubset& b);
FiniteSubset left_translate(const GroupModel& model, const GroupElement& g, const FiniteSubset& a);
FiniteSubset right_translate(const GroupModel& model, const FiniteSubset& a, const GroupElement& g);
bool is_symmetric(const GroupModel& model, const FiniteSubset& a);
/// max |g| over the set (0 for the empty set).
Integer max_word_length(const GroupModel& model, const FiniteSubset& a);
/// max |f^{-1} h| over f, h in the set.
Integer diameter(const GroupModel& model, const FiniteSubset& a);

/// #(gF △ F) / #F.
Rational invariance_defect(const GroupModel& model, const GroupElement& g, const FiniteSubset& f);

/// Weights 2^{-|g|} and rational upper bounds on their tails. Both models
/// have polynomial growth, so sum_g 2^{-|g|} converges.
class Weighting {
public:
    explicit Weighting(GroupModel model) : model_(std::move(model)) {}

    const GroupModel& model() const { return model_; }
    Rational weight(const GroupElement& g) const;
    /// Upper bound on sum_{|g| > radius} 2^{-|g|}: exact sphere counts for a
    /// stretch of radii, then a geometric majorant of a polynomial bound on
    /// sphere sizes.
    Rational tail_bound(std::uint64_t radius) const;
    /// sum_{|g| <= radius} 2^{-|g|}, exact.
    Rational ball_mass(std::uint64_t radius) const;

private:
    GroupModel model_;
};

/// Lazily enumerates group elements in ball order starting from a given
/// length. Beyond the breadth-first-search cap the Heisenberg stream is
/// restricted to elements whose length is certified by a monotone word
/// (|a| + |b| = n and c between 0 and ab), still in lexicographic order.
class BallOrderStream {
public:
    BallOrderStream(GroupModel model, Integer start_length);
    std::optional<GroupElement> next();
    const Integer& current_length() const { return length_; }

private:
    void start_sphere();
    std::optional<GroupElement> successor(const GroupElement& g) const;
    std::optional<GroupElement> first_on_sphere() const;

    GroupModel model_;
    Integer length_;
    bool use_bfs_sphere_ = false;
    std::vector<GroupElement> bfs_sphere_;
    std::size_t bfs_index_ = 0;
    std::optional<GroupElement> cursor_;
    bool sphere_started_ = false;
};

}  // namespace leadmetric
