#pragma once

#include "leadmetric/group.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace leadmetric {

/// Bijection of {0..N-1}; p[i] is the image of i.
using Permutation = std::vector<std::uint32_t>;

Permutation identity_permutation(std::uint32_t n);
/// (a ∘ b)[i] = a[b[i]]: apply b first.
Permutation compose(const Permutation& a, const Permutation& b);
Permutation inverse(const Permutation& p);
bool is_bijection(const Permutation& p, std::uint32_t n);

/// Cycle structure cached for fast powers with arbitrary exponents.
class CycleForm {
public:
    CycleForm() = default;
    explicit CycleForm(const Permutation& p);
    /// p^k for any integer k (negative allowed).
    Permutation power(const Integer& k) const;
    std::uint32_t size() const { return static_cast<std::uint32_t>(position_.size()); }

private:
    std::vector<std::vector<std::uint32_t>> cycles_;
    std::vector<std::uint32_t> cycle_of_;
    std::vector<std::uint32_t> position_;
};

/// Subset of {0..N-1} stored as a bitset.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(std::uint32_t ground_size);
    static PointSet from_points(std::uint32_t ground_size, const std::vector<std::uint32_t>& points);
    static PointSet full(std::uint32_t ground_size);

    std::uint32_t ground_size() const { return n_; }
    bool contains(std::uint32_t p) const { return (words_[p >> 6] >> (p & 63)) & 1u; }
    void insert(std::uint32_t p) { words_[p >> 6] |= std::uint64_t{1} << (p & 63); }
    void erase(std::uint32_t p) { words_[p >> 6] &= ~(std::uint64_t{1} << (p & 63)); }
    std::size_t count() const;
    std::vector<std::uint32_t> points() const;
    const std::vector<std::uint64_t>& words() const { return words_; }

    /// {p(x) : x in this set}
    PointSet image(const Permutation& p) const;
    PointSet operator&(const PointSet& o) const;
    PointSet operator|(const PointSet& o) const;
    PointSet complement() const;
    /// Symmetric difference.
    PointSet operator^(const PointSet& o) const;

    friend bool operator==(const PointSet& a, const PointSet& b) { return a.n_ == b.n_ && a.words_ == b.words_; }
    friend bool operator!=(const PointSet& a, const PointSet& b) { return !(a == b); }
    friend bool operator<(const PointSet& a, const PointSet& b) {
        return a.n_ != b.n_ ? a.n_ < b.n_ : a.words_ < b.words_;
    }

private:
    std::uint32_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

/// #(A ∩ B) via popcount.
std::size_t intersection_count(const PointSet& a, const PointSet& b);

}  // namespace leadmetric
