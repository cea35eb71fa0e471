#include "leadmetric/permutation.hpp"

#include "leadmetric/errors.hpp"

#include <bit>

namespace leadmetric {

Permutation identity_permutation(std::uint32_t n) {
    Permutation p(n);
    for (std::uint32_t i = 0; i < n; ++i) p[i] = i;
    return p;
}

Permutation compose(const Permutation& a, const Permutation& b) {
    if (a.size() != b.size()) throw DomainError("composing permutations of different sizes");
    Permutation r(a.size());
    for (std::size_t i = 0; i < b.size(); ++i) r[i] = a[b[i]];
    return r;
}

Permutation inverse(const Permutation& p) {
    Permutation r(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) r[p[i]] = static_cast<std::uint32_t>(i);
    return r;
}

bool is_bijection(const Permutation& p, std::uint32_t n) {
    if (p.size() != n) return false;
    std::vector<bool> seen(n, false);
    for (auto v : p) {
        if (v >= n || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

CycleForm::CycleForm(const Permutation& p) : cycle_of_(p.size()), position_(p.size()) {
    std::vector<bool> seen(p.size(), false);
    for (std::uint32_t start = 0; start < p.size(); ++start) {
        if (seen[start]) continue;
        std::vector<std::uint32_t> cycle;
        for (std::uint32_t x = start; !seen[x]; x = p[x]) {
            seen[x] = true;
            cycle_of_[x] = static_cast<std::uint32_t>(cycles_.size());
            position_[x] = static_cast<std::uint32_t>(cycle.size());
            cycle.push_back(x);
        }
        cycles_.push_back(std::move(cycle));
    }
}

Permutation CycleForm::power(const Integer& k) const {
    Permutation r(position_.size());
    for (const auto& cycle : cycles_) {
        const auto len = static_cast<std::int64_t>(cycle.size());
        Integer m = k % len;
        if (m < 0) m += len;
        const auto shift = m.convert_to<std::int64_t>();
        for (std::int64_t i = 0; i < len; ++i) r[cycle[i]] = cycle[(i + shift) % len];
    }
    return r;
}

PointSet::PointSet(std::uint32_t ground_size) : n_(ground_size), words_((ground_size + 63) / 64, 0) {}

PointSet PointSet::from_points(std::uint32_t ground_size, const std::vector<std::uint32_t>& points) {
    PointSet s(ground_size);
    for (auto p : points) {
        if (p >= ground_size) {
            throw ValidationError("point " + std::to_string(p) + " outside ground set of size " +
                                  std::to_string(ground_size));
        }
        s.insert(p);
    }
    return s;
}

PointSet PointSet::full(std::uint32_t ground_size) {
    PointSet s(ground_size);
    for (std::uint32_t p = 0; p < ground_size; ++p) s.insert(p);
    return s;
}

std::size_t PointSet::count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

std::vector<std::uint32_t> PointSet::points() const {
    std::vector<std::uint32_t> out;
    for (std::size_t w = 0; w < words_.size(); ++w) {
        std::uint64_t bits = words_[w];
        while (bits) {
            const int b = std::countr_zero(bits);
            out.push_back(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(b)));
            bits &= bits - 1;
        }
    }
    return out;
}

PointSet PointSet::image(const Permutation& p) const {
    if (p.size() != n_) throw BackendMismatch("permutation size does not match the point set");
    PointSet r(n_);
    for (auto x : points()) r.insert(p[x]);
    return r;
}

PointSet PointSet::operator&(const PointSet& o) const {
    if (o.n_ != n_) throw BackendMismatch("point sets over different ground sets");
    PointSet r(n_);
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = words_[i] & o.words_[i];
    return r;
}

PointSet PointSet::operator|(const PointSet& o) const {
    if (o.n_ != n_) throw BackendMismatch("point sets over different ground sets");
    PointSet r(n_);
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = words_[i] | o.words_[i];
    return r;
}

PointSet PointSet::operator^(const PointSet& o) const {
    if (o.n_ != n_) throw BackendMismatch("point sets over different ground sets");
    PointSet r(n_);
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = words_[i] ^ o.words_[i];
    return r;
}

PointSet PointSet::complement() const {
    PointSet r = full(n_);
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] &= ~words_[i];
    return r;
}

std::size_t intersection_count(const PointSet& a, const PointSet& b) {
    if (a.ground_size() != b.ground_size()) throw BackendMismatch("point sets over different ground sets");
    std::size_t c = 0;
    const auto& wa = a.words();
    const auto& wb = b.words();
    for (std::size_t i = 0; i < wa.size(); ++i) c += static_cast<std::size_t>(std::popcount(wa[i] & wb[i]));
    return c;
}

}  // namespace leadmetric
