#include "leadmetric/group.hpp"

#include "leadmetric/caps.hpp"
#include "leadmetric/errors.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>
#include <unordered_map>

namespace leadmetric {

namespace {

// Heisenberg elements inside the breadth-first-search cap have small
// coordinates, so the memo uses a packed key.
using SmallKey = std::array<std::int32_t, 3>;

struct SmallKeyHash {
    std::size_t operator()(const SmallKey& k) const noexcept {
        std::uint64_t h = static_cast<std::uint32_t>(k[0]);
        h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(k[1]);
        h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(k[2]);
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

Integer abs_int(const Integer& x) { return x < 0 ? Integer(-x) : x; }

bool fits_small(const GroupElement& g) {
    static const Integer limit = Integer(1) << 30;
    return abs_int(g.coords[0]) < limit && abs_int(g.coords[1]) < limit && abs_int(g.coords[2]) < limit;
}

SmallKey to_small(const GroupElement& g) {
    return {g.coords[0].convert_to<std::int32_t>(), g.coords[1].convert_to<std::int32_t>(),
            g.coords[2].convert_to<std::int32_t>()};
}

GroupElement from_small(const SmallKey& k) {
    GroupElement g;
    g.kind = GroupKind::Heisenberg3;
    g.dim = 3;
    g.coords = {Integer(k[0]), Integer(k[1]), Integer(k[2])};
    return g;
}

Integer isqrt_ceil(const Integer& m) {
    if (m <= 0) return 0;
    Integer r = boost::multiprecision::sqrt(m);
    if (r * r < m) r += 1;
    return r;
}

// Binomial coefficient for small arguments, exact.
Integer binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    Integer r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

// Lex-ordered Z^d sphere enumeration: coordinates before the last range
// over the remaining budget, the last one takes -rem then +rem.
void zd_sphere(unsigned d, std::int64_t n, std::vector<std::int64_t>& prefix, std::int64_t rem,
               std::vector<std::vector<std::int64_t>>& out) {
    if (prefix.size() + 1 == d) {
        prefix.push_back(-rem);
        out.push_back(prefix);
        prefix.pop_back();
        if (rem != 0) {
            prefix.push_back(rem);
            out.push_back(prefix);
            prefix.pop_back();
        }
        return;
    }
    for (std::int64_t v = -rem; v <= rem; ++v) {
        prefix.push_back(v);
        zd_sphere(d, n, prefix, rem - (v < 0 ? -v : v), out);
        prefix.pop_back();
    }
}

void zd_ball(unsigned d, std::vector<std::int64_t>& prefix, std::int64_t rem,
             std::vector<std::vector<std::int64_t>>& out) {
    if (prefix.size() == d) {
        out.push_back(prefix);
        return;
    }
    for (std::int64_t v = -rem; v <= rem; ++v) {
        prefix.push_back(v);
        zd_ball(d, prefix, rem - (v < 0 ? -v : v), out);
        prefix.pop_back();
    }
}

// Number of Z^d points with L1 norm exactly n.
Integer zd_sphere_count(unsigned d, std::uint64_t n) {
    if (n == 0) return 1;
    Integer total = 0;
    for (unsigned k = 1; k <= d && k <= n; ++k) {
        total += (Integer(1) << k) * binomial(d, k) * binomial(n - 1, k - 1);
    }
    return total;
}

}  // namespace

std::size_t GroupElementHash::operator()(const GroupElement& g) const noexcept {
    std::size_t h = static_cast<std::size_t>(g.kind) * 31 + g.dim;
    std::hash<Integer> hi;
    for (std::size_t i = 0; i < g.dim; ++i) {
        h ^= hi(g.coords[i]) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

std::string to_string(const GroupElement& g) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < g.dim; ++i) {
        if (i) out << ',';
        out << g.coords[i];
    }
    out << ')';
    return out.str();
}

std::ostream& operator<<(std::ostream& out, const GroupElement& g) { return out << to_string(g); }

struct GroupModel::Impl {
    GroupKind kind;
    unsigned dim;
    std::vector<GroupElement> generators;
    std::vector<GroupElement> positive;

    // Heisenberg breadth-first-search memo, grown one sphere at a time.
    std::mutex mutex;
    std::unordered_map<SmallKey, std::uint32_t, SmallKeyHash> lengths;
    std::vector<std::vector<SmallKey>> spheres;

    void grow_to(std::size_t radius) {
        if (spheres.empty()) {
            spheres.push_back({SmallKey{0, 0, 0}});
            lengths.emplace(SmallKey{0, 0, 0}, 0);
        }
        static const SmallKey steps[4] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
        while (spheres.size() <= radius) {
            const auto n = static_cast<std::uint32_t>(spheres.size());
            std::vector<SmallKey> next;
            for (const SmallKey& k : spheres.back()) {
                for (const SmallKey& s : steps) {
                    // (a,b,c)(s0,s1,0) = (a+s0, b+s1, c + a*s1)
                    SmallKey m{k[0] + s[0], k[1] + s[1], k[2] + k[0] * s[1]};
                    if (lengths.emplace(m, n).second) next.push_back(m);
                }
            }
            std::sort(next.begin(), next.end());
            spheres.push_back(std::move(next));
        }
    }
};

GroupModel GroupModel::zd(unsigned dimension) {
    if (dimension < 1 || dimension > 3) throw DomainError("Z^d supported for d = 1, 2, 3");
    auto impl = std::make_shared<Impl>();
    impl->kind = GroupKind::Zd;
    impl->dim = dimension;
    for (unsigned i = 0; i < dimension; ++i) {
        GroupElement e;
        e.kind = GroupKind::Zd;
        e.dim = static_cast<std::uint8_t>(dimension);
        e.coords[i] = 1;
        impl->positive.push_back(e);
        impl->generators.push_back(e);
        e.coords[i] = -1;
        impl->generators.push_back(e);
    }
    return GroupModel(impl);
}

GroupModel GroupModel::heisenberg() {
    auto impl = std::make_shared<Impl>();
    impl->kind = GroupKind::Heisenberg3;
    impl->dim = 3;
    const std::array<std::array<int, 3>, 4> gens = {{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}}};
    for (std::size_t i = 0; i < gens.size(); ++i) {
        GroupElement e;
        e.kind = GroupKind::Heisenberg3;
        e.dim = 3;
        e.coords = {Integer(gens[i][0]), Integer(gens[i][1]), Integer(gens[i][2])};
        impl->generators.push_back(e);
        if (i % 2 == 0) impl->positive.push_back(e);
    }
    return GroupModel(impl);
}

GroupModel GroupModel::parse(std::string_view descriptor) {
    if (descriptor == "Z") return zd(1);
    if (descriptor == "Z^2") return zd(2);
    if (descriptor == "Z^3") return zd(3);
    if (descriptor == "H3") return heisenberg();
    throw ParseError("group", "unknown group descriptor '" + std::string(descriptor) + "'");
}

std::string GroupModel::descriptor() const {
    if (impl_->kind == GroupKind::Heisenberg3) return "H3";
    if (impl_->dim == 1) return "Z";
    return "Z^" + std::to_string(impl_->dim);
}

GroupKind GroupModel::kind() const { return impl_->kind; }
unsigned GroupModel::coordinates() const { return impl_->dim; }
unsigned GroupModel::rank() const { return static_cast<unsigned>(impl_->positive.size()); }

bool operator==(const GroupModel& a, const GroupModel& b) {
    return a.impl_->kind == b.impl_->kind && a.impl_->dim == b.impl_->dim;
}

GroupElement GroupModel::identity() const {
    GroupElement e;
    e.kind = impl_->kind;
    e.dim = static_cast<std::uint8_t>(impl_->dim);
    return e;
}

GroupElement GroupModel::element(std::initializer_list<long long> coords) const {
    std::vector<Integer> v;
    for (long long c : coords) v.emplace_back(c);
    return element(v);
}

GroupElement GroupModel::element(const std::vector<Integer>& coords) const {
    if (coords.size() != impl_->dim) {
        throw DomainError(descriptor() + " elements have " + std::to_string(impl_->dim) + " coordinates, got " +
                          std::to_string(coords.size()));
    }
    GroupElement e = identity();
    for (std::size_t i = 0; i < coords.size(); ++i) e.coords[i] = coords[i];
    return e;
}

bool GroupModel::owns(const GroupElement& g) const { return g.kind == impl_->kind && g.dim == impl_->dim; }

void GroupModel::check(const GroupElement& g) const {
    if (!owns(g)) throw ModelMismatch("element " + to_string(g) + " does not belong to " + descriptor());
}

GroupElement GroupModel::compose(const GroupElement& g, const GroupElement& h) const {
    check(g);
    check(h);
    GroupElement r = identity();
    if (impl_->kind == GroupKind::Zd) {
        for (unsigned i = 0; i < impl_->dim; ++i) r.coords[i] = g.coords[i] + h.coords[i];
    } else {
        r.coords[0] = g.coords[0] + h.coords[0];
        r.coords[1] = g.coords[1] + h.coords[1];
        r.coords[2] = g.coords[2] + h.coords[2] + g.coords[0] * h.coords[1];
    }
    return r;
}

GroupElement GroupModel::invert(const GroupElement& g) const {
    check(g);
    GroupElement r = identity();
    if (impl_->kind == GroupKind::Zd) {
        for (unsigned i = 0; i < impl_->dim; ++i) r.coords[i] = -g.coords[i];
    } else {
        r.coords[0] = -g.coords[0];
        r.coords[1] = -g.coords[1];
        r.coords[2] = -g.coords[2] + g.coords[0] * g.coords[1];
    }
    return r;
}

GroupElement GroupModel::conjugate(const GroupElement& g, const GroupElement& h) const {
    return compose(compose(invert(g), h), g);
}

const std::vector<GroupElement>& GroupModel::generators() const { return impl_->generators; }
const std::vector<GroupElement>& GroupModel::positive_generators() const { return impl_->positive; }

std::pair<Integer, Integer> GroupModel::word_length_bounds(const GroupElement& g) const {
    check(g);
    Integer l1 = 0;
    if (impl_->kind == GroupKind::Zd) {
        for (unsigned i = 0; i < impl_->dim; ++i) l1 += abs_int(g.coords[i]);
        return {l1, l1};
    }
    const Integer& a = g.coords[0];
    const Integer& b = g.coords[1];
    const Integer& c = g.coords[2];
    l1 = abs_int(a) + abs_int(b);
    const Integer ab = a * b;
    const Integer lo = ab < 0 ? ab : Integer(0);
    const Integer hi = ab < 0 ? Integer(0) : ab;
    if (c >= lo && c <= hi) return {l1, l1};
    // g = z^m x^a y^b with m = c - ab; z^m is a product of at most three
    // commutators [x^k, y^j] plus a short correction.
    const Integer m = abs_int(c - ab);
    const Integer k = isqrt_ceil(m);
    return {l1, l1 + 6 * k + 6};
}

Integer GroupModel::word_length(const GroupElement& g) const {
    auto [lo, hi] = word_length_bounds(g);
    if (lo == hi) return lo;
    const std::size_t cap = caps().max_bfs_radius;
    if (lo > cap || !fits_small(g)) {
        throw ResourceLimit("word length of " + to_string(g) + " exceeds the search radius cap " +
                            std::to_string(cap));
    }
    const std::size_t limit = hi < cap ? hi.convert_to<std::size_t>() : cap;
    std::lock_guard lock(impl_->mutex);
    impl_->grow_to(limit);
    auto it = impl_->lengths.find(to_small(g));
    if (it == impl_->lengths.end()) {
        throw ResourceLimit("word length of " + to_string(g) + " exceeds the search radius cap " +
                            std::to_string(cap));
    }
    return it->second;
}

bool GroupModel::in_ball(const GroupElement& g, std::uint64_t radius) const {
    auto [lo, hi] = word_length_bounds(g);
    if (lo > radius) return false;
    if (hi <= radius) return true;
    const std::size_t cap = caps().max_bfs_radius;
    const std::size_t depth = std::min<std::size_t>(radius, cap);
    if (!fits_small(g)) throw ResourceLimit("element " + to_string(g) + " too large for exact length search");
    std::lock_guard lock(impl_->mutex);
    impl_->grow_to(depth);
    auto it = impl_->lengths.find(to_small(g));
    if (it != impl_->lengths.end()) return it->second <= radius;
    if (radius <= cap) return false;
    throw ResourceLimit("ball membership of " + to_string(g) + " beyond the search radius cap " +
                        std::to_string(cap));
}

std::vector<GroupElement> GroupModel::sphere(std::uint64_t n) const {
    std::vector<GroupElement> out;
    if (impl_->kind == GroupKind::Zd) {
        const Integer count = zd_sphere_count(impl_->dim, n);
        if (count > caps().max_set_size) throw ResourceLimit("sphere of radius " + std::to_string(n) + " too large");
        std::vector<std::vector<std::int64_t>> raw;
        std::vector<std::int64_t> prefix;
        zd_sphere(impl_->dim, static_cast<std::int64_t>(n), prefix, static_cast<std::int64_t>(n), raw);
        out.reserve(raw.size());
        for (const auto& v : raw) {
            GroupElement e = identity();
            for (unsigned i = 0; i < impl_->dim; ++i) e.coords[i] = v[i];
            out.push_back(std::move(e));
        }
        return out;
    }
    if (n > caps().max_bfs_radius) {
        throw ResourceLimit("H3 sphere of radius " + std::to_string(n) + " beyond the search radius cap");
    }
    std::lock_guard lock(impl_->mutex);
    impl_->grow_to(n);
    out.reserve(impl_->spheres[n].size());
    for (const SmallKey& k : impl_->spheres[n]) out.push_back(from_small(k));
    return out;
}

Integer GroupModel::sphere_size(std::uint64_t n) const {
    if (impl_->kind == GroupKind::Zd) return zd_sphere_count(impl_->dim, n);
    if (n > caps().max_bfs_radius) {
        throw ResourceLimit("H3 sphere of radius " + std::to_string(n) + " beyond the search radius cap");
    }
    std::lock_guard lock(impl_->mutex);
    impl_->grow_to(n);
    return Integer(impl_->spheres[n].size());
}

std::vector<GroupElement> GroupModel::ball_sequence(std::uint64_t radius) const {
    if (radius > caps().max_ball_radius) {
        throw ResourceLimit("ball radius " + std::to_string(radius) + " exceeds cap " +
                            std::to_string(caps().max_ball_radius));
    }
    Integer total = 0;
    for (std::uint64_t n = 0; n <= radius; ++n) total += sphere_size(n);
    if (total > caps().max_set_size) {
        throw ResourceLimit("ball of radius " + std::to_string(radius) + " has " + total.str() + " elements");
    }
    std::vector<GroupElement> out;
    out.reserve(total.convert_to<std::size_t>());
    for (std::uint64_t n = 0; n <= radius; ++n) {
        auto s = sphere(n);
        std::move(s.begin(), s.end(), std::back_inserter(out));
    }
    return out;
}

FiniteSubset GroupModel::ball(std::uint64_t radius) const {
    if (impl_->kind == GroupKind::Zd) {
        if (radius > caps().max_ball_radius) {
            throw ResourceLimit("ball radius " + std::to_string(radius) + " exceeds cap " +
                                std::to_string(caps().max_ball_radius));
        }
        Integer total = 0;
        for (std::uint64_t n = 0; n <= radius; ++n) total += zd_sphere_count(impl_->dim, n);
        if (total > caps().max_set_size) {
            throw ResourceLimit("ball of radius " + std::to_string(radius) + " has " + total.str() + " elements");
        }
        std::vector<std::vector<std::int64_t>> raw;
        std::vector<std::int64_t> prefix;
        zd_ball(impl_->dim, prefix, static_cast<std::int64_t>(radius), raw);
        std::vector<GroupElement> out;
        out.reserve(raw.size());
        for (const auto& v : raw) {
            GroupElement e = identity();
            for (unsigned i = 0; i < impl_->dim; ++i) e.coords[i] = v[i];
            out.push_back(std::move(e));
        }
        return FiniteSubset(std::move(out));
    }
    return FiniteSubset(ball_sequence(radius));
}

// ---------------------------------------------------------------------------

FiniteSubset::FiniteSubset(std::vector<GroupElement> elements) : elements_(std::move(elements)) {
    std::sort(elements_.begin(), elements_.end());
    elements_.erase(std::unique(elements_.begin(), elements_.end()), elements_.end());
}

bool FiniteSubset::contains(const GroupElement& g) const {
    return std::binary_search(elements_.begin(), elements_.end(), g);
}

FiniteSubset set_product(const GroupModel& model, const FiniteSubset& a, const FiniteSubset& b) {
    if (static_cast<double>(a.size()) * static_cast<double>(b.size()) > static_cast<double>(caps().max_set_size)) {
        throw ResourceLimit("set product of sizes " + std::to_string(a.size()) + " x " + std::to_string(b.size()) +
                            " exceeds the set size cap");
    }
    std::vector<GroupElement> out;
    out.reserve(a.size() * b.size());
    for (const auto& x : a) {
        for (const auto& y : b) out.push_back(model.compose(x, y));
    }
    return FiniteSubset(std::move(out));
}

FiniteSubset set_inverse(const GroupModel& model, const FiniteSubset& a) {
    std::vector<GroupElement> out;
    out.reserve(a.size());
    for (const auto& x : a) out.push_back(model.invert(x));
    return FiniteSubset(std::move(out));
}

FiniteSubset set_power(const GroupModel& model, const FiniteSubset& a, unsigned k) {
    if (k == 0) throw DomainError("set_power needs k >= 1");
    FiniteSubset r = a;
    for (unsigned i = 1; i < k; ++i) r = set_product(model, r, a);
    return r;
}

FiniteSubset set_union(const FiniteSubset& a, const FiniteSubset& b) {
    std::vector<GroupElement> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return FiniteSubset(std::move(out));
}

FiniteSubset set_intersection(const FiniteSubset& a, const FiniteSubset& b) {
    std::vector<GroupElement> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return FiniteSubset(std::move(out));
}

FiniteSubset set_difference(const FiniteSubset& a, const FiniteSubset& b) {
    std::vector<GroupElement> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return FiniteSubset(std::move(out));
}

FiniteSubset left_translate(const GroupModel& model, const GroupElement& g, const FiniteSubset& a) {
    std::vector<GroupElement> out;
    out.reserve(a.size());
    for (const auto& x : a) out.push_back(model.compose(g, x));
    return FiniteSubset(std::move(out));
}

FiniteSubset right_translate(const GroupModel& model, const FiniteSubset& a, const GroupElement& g) {
    std::vector<GroupElement> out;
    out.reserve(a.size());
    for (const auto& x : a) out.push_back(model.compose(x, g));
    return FiniteSubset(std::move(out));
}

bool is_symmetric(const GroupModel& model, const FiniteSubset& a) { return set_inverse(model, a) == a; }

Integer max_word_length(const GroupModel& model, const FiniteSubset& a) {
    Integer best = 0;
    for (const auto& x : a) best = std::max(best, model.word_length(x));
    return best;
}

Integer diameter(const GroupModel& model, const FiniteSubset& a) {
    Integer best = 0;
    for (const auto& f : a) {
        const GroupElement fi = model.invert(f);
        for (const auto& h : a) best = std::max(best, model.word_length(model.compose(fi, h)));
    }
    return best;
}

Rational invariance_defect(const GroupModel& model, const GroupElement& g, const FiniteSubset& f) {
    if (f.empty()) throw DomainError("invariance defect of an empty set");
    const FiniteSubset gf = left_translate(model, g, f);
    const std::size_t common = set_intersection(gf, f).size();
    const std::size_t sym = 2 * (f.size() - common);
    Rational r(static_cast<unsigned long>(sym), static_cast<unsigned long>(f.size()));
    r.canonicalize();
    return r;
}

// ---------------------------------------------------------------------------

Rational Weighting::weight(const GroupElement& g) const {
    const Integer len = model_.word_length(g);
    if (len > 1u << 20) return Rational(0);  // never reached at desk scale
    return pow2_inverse(len.convert_to<unsigned long>());
}

Rational Weighting::ball_mass(std::uint64_t radius) const {
    Rational total = 0;
    for (std::uint64_t n = 0; n <= radius; ++n) {
        Rational term(mpz_class(model_.sphere_size(n).str()));
        total += term * pow2_inverse(n);
    }
    return total;
}

Rational Weighting::tail_bound(std::uint64_t radius) const {
    // Sphere sizes are at most M n^p: (2n+1)^d <= 3^d n^d on Z^d, and on H3
    // length-n elements have |a|+|b| <= n and |c| <= n^2, so at most
    // (2n^2+2n+1)(2n^2+1) <= 15 n^4 of them.
    unsigned long coef = 15;
    unsigned p = 4;
    std::uint64_t exact_until = radius + 40;
    if (model_.kind() == GroupKind::Zd) {
        p = model_.coordinates();
        coef = 1;
        for (unsigned i = 0; i < p; ++i) coef *= 3;
    } else {
        exact_until = std::min<std::uint64_t>(exact_until, caps().max_bfs_radius);
    }
    Rational total = 0;
    std::uint64_t k = radius;
    for (std::uint64_t n = radius + 1; n <= exact_until; ++n) {
        Rational term(mpz_class(model_.sphere_size(n).str()));
        total += term * pow2_inverse(n);
        k = n;
    }
    // The ratio of consecutive majorant terms ((n+1)/n)^p / 2 decreases in n;
    // at n = k+1 it must be < 1 for the geometric bound.
    if (k < 5) {
        for (std::uint64_t n = k + 1; n <= 5; ++n) {
            total += Rational(static_cast<unsigned long>(coef)) * Rational(mpz_class(n) * n * n * n * n) *
                     pow2_inverse(n);
        }
        k = 5;
    }
    Rational ratio(mpz_class(k + 2), mpz_class(k + 1));
    Rational rho = 1;
    for (unsigned i = 0; i < p; ++i) rho *= ratio;
    Rational first(static_cast<unsigned long>(coef));
    for (unsigned i = 0; i < p; ++i) first *= Rational(mpz_class(k + 1));
    first *= pow2_inverse(k + 1);
    Rational geometric = first / (Rational(1) - rho / 2);
    total += geometric;
    total.canonicalize();
    return total;
}

// ---------------------------------------------------------------------------

BallOrderStream::BallOrderStream(GroupModel model, Integer start_length)
    : model_(std::move(model)), length_(std::move(start_length)) {}

std::optional<GroupElement> BallOrderStream::first_on_sphere() const {
    GroupElement e = model_.identity();
    e.coords[0] = -length_;
    return e;
}

std::optional<GroupElement> BallOrderStream::successor(const GroupElement& g) const {
    GroupElement v = g;
    if (model_.kind() == GroupKind::Heisenberg3) {
        const Integer ab = v.coords[0] * v.coords[1];
        const Integer hi = ab < 0 ? Integer(0) : ab;
        if (v.coords[2] < hi) {
            v.coords[2] += 1;
            return v;
        }
    }
    const unsigned d = model_.kind() == GroupKind::Zd ? model_.coordinates() : 2;
    if (v.coords[d - 1] < 0) {
        v.coords[d - 1] = -v.coords[d - 1];
    } else {
        bool advanced = false;
        for (int i = static_cast<int>(d) - 2; i >= 0 && !advanced; --i) {
            Integer used = 0;
            for (int k = 0; k < i; ++k) used += abs_int(v.coords[k]);
            const Integer candidate = v.coords[i] + 1;
            if (used + abs_int(candidate) <= length_) {
                v.coords[i] = candidate;
                const Integer rem = length_ - used - abs_int(candidate);
                for (unsigned k = i + 1; k < d; ++k) v.coords[k] = 0;
                v.coords[i + 1] = -rem;
                advanced = true;
            }
        }
        if (!advanced) return std::nullopt;
    }
    if (model_.kind() == GroupKind::Heisenberg3) {
        const Integer ab = v.coords[0] * v.coords[1];
        v.coords[2] = ab < 0 ? ab : Integer(0);
    }
    return v;
}

void BallOrderStream::start_sphere() {
    sphere_started_ = true;
    use_bfs_sphere_ = model_.kind() == GroupKind::Heisenberg3 && length_ <= caps().max_bfs_radius;
    if (use_bfs_sphere_) {
        bfs_sphere_ = model_.sphere(length_.convert_to<std::uint64_t>());
        bfs_index_ = 0;
        cursor_.reset();
    } else {
        cursor_ = first_on_sphere();
    }
}

std::optional<GroupElement> BallOrderStream::next() {
    for (;;) {
        if (!sphere_started_) start_sphere();
        if (use_bfs_sphere_) {
            if (bfs_index_ < bfs_sphere_.size()) return bfs_sphere_[bfs_index_++];
        } else if (cursor_) {
            GroupElement out = *cursor_;
            if (length_ == 0) {
                cursor_.reset();
            } else {
                cursor_ = successor(out);
            }
            return out;
        }
        length_ += 1;
        sphere_started_ = false;
    }
}

}  // namespace leadmetric
