#include "leadmetric/tiles.hpp"

#include "leadmetric/caps.hpp"
#include "leadmetric/errors.hpp"

#include <map>

namespace leadmetric {

namespace {

std::int64_t to_i64(const Integer& x) { return x.convert_to<std::int64_t>(); }

// Box [0, n_1) x ... translated by each lattice point (j_1 k_1, ...), j_i < m_i.
void box_translates(const GroupModel& model, const std::vector<std::uint64_t>& sides,
                    const std::vector<std::uint64_t>& mult, std::vector<GroupElement>& centers,
                    std::vector<GroupElement>& points) {
    const unsigned d = model.coordinates();
    std::vector<std::uint64_t> j(d, 0);
    for (;;) {
        GroupElement c = model.identity();
        for (unsigned i = 0; i < d; ++i) c.coords[i] = j[i] * sides[i];
        centers.push_back(c);
        int i = static_cast<int>(d) - 1;
        while (i >= 0) {
            if (++j[i] < mult[i]) break;
            j[i] = 0;
            --i;
        }
        if (i < 0) break;
    }
    std::vector<std::uint64_t> n(d);
    for (unsigned i = 0; i < d; ++i) n[i] = sides[i] * mult[i];
    std::vector<std::uint64_t> p(d, 0);
    for (;;) {
        GroupElement e = model.identity();
        for (unsigned i = 0; i < d; ++i) e.coords[i] = p[i];
        points.push_back(e);
        int i = static_cast<int>(d) - 1;
        while (i >= 0) {
            if (++p[i] < n[i]) break;
            p[i] = 0;
            --i;
        }
        if (i < 0) break;
    }
}

// Closed form for boxes: #(G+v ∩ G) = prod max(0, n_i - |v_i|).
Rational box_defect(const std::vector<std::uint64_t>& n, const GroupElement& v) {
    Integer total = 1;
    Integer overlap = 1;
    for (std::size_t i = 0; i < n.size(); ++i) {
        total *= n[i];
        Integer a = v.coords[i] < 0 ? Integer(-v.coords[i]) : v.coords[i];
        overlap *= a >= n[i] ? Integer(0) : Integer(n[i] - a);
    }
    Rational r(mpz_class((2 * (total - overlap)).str()), mpz_class(total.str()));
    r.canonicalize();
    return r;
}

bool admissible(const std::vector<std::uint64_t>& n, std::uint64_t tile_size, const FiniteSubset& c,
                const Rational& epsilon) {
    std::uint64_t size = 1;
    for (auto x : n) size *= x;
    if (!(Rational(3 * tile_size * tile_size) < epsilon * Rational(static_cast<unsigned long>(size)))) return false;
    for (const auto& g : c) {
        if (!(box_defect(n, g) < epsilon)) return false;
    }
    return true;
}

void factorizations(std::uint64_t t, unsigned d, std::vector<std::uint64_t>& prefix,
                    std::vector<std::vector<std::uint64_t>>& out) {
    if (d == 1) {
        prefix.push_back(t);
        out.push_back(prefix);
        prefix.pop_back();
        return;
    }
    for (std::uint64_t m = 1; m <= t; ++m) {
        if (t % m != 0) continue;
        prefix.push_back(m);
        factorizations(t / m, d - 1, prefix, out);
        prefix.pop_back();
    }
}

RefinedTile materialize(const Tile& tile, const std::vector<std::uint64_t>& mult) {
    std::vector<GroupElement> centers;
    std::vector<GroupElement> points;
    box_translates(tile.model, tile.sides, mult, centers, points);
    return RefinedTile{FiniteSubset(std::move(points)), FiniteSubset(std::move(centers)), mult};
}

}  // namespace

bool Tile::contains_center(const GroupElement& c) const {
    if (!model.owns(c)) return false;
    for (std::size_t i = 0; i < sides.size(); ++i) {
        if (c.coords[i] % sides[i] != 0) return false;
    }
    return true;
}

FiniteSubset Tile::centers_near_ball(std::uint64_t radius) const {
    const unsigned d = model.coordinates();
    const auto r = static_cast<std::int64_t>(radius);
    std::vector<std::int64_t> lo(d), hi(d), cur(d);
    for (unsigned i = 0; i < d; ++i) {
        const auto k = static_cast<std::int64_t>(sides[i]);
        // smallest multiple of k that is > -r - k
        std::int64_t start = -r - k + 1;
        std::int64_t q = start >= 0 ? (start + k - 1) / k : -((-start) / k);
        lo[i] = q * k;
        hi[i] = r;
        cur[i] = lo[i];
    }
    std::vector<GroupElement> out;
    for (;;) {
        std::int64_t dist = 0;
        for (unsigned i = 0; i < d; ++i) {
            const std::int64_t a = cur[i];
            const std::int64_t b = cur[i] + static_cast<std::int64_t>(sides[i]) - 1;
            if (a > 0) dist += a;
            else if (b < 0) dist += -b;
        }
        if (dist <= r) {
            GroupElement c = model.identity();
            for (unsigned i = 0; i < d; ++i) c.coords[i] = cur[i];
            out.push_back(c);
        }
        int i = static_cast<int>(d) - 1;
        while (i >= 0) {
            cur[i] += static_cast<std::int64_t>(sides[i]);
            if (cur[i] <= hi[i]) break;
            cur[i] = lo[i];
            --i;
        }
        if (i < 0) break;
    }
    return FiniteSubset(std::move(out));
}

Tile box_tile(const GroupModel& model, const std::vector<std::uint64_t>& sides) {
    if (model.kind() != GroupKind::Zd) throw DomainError("box tiles exist only for Z^d");
    if (sides.size() != model.coordinates()) throw DomainError("box tile needs one side length per coordinate");
    std::uint64_t size = 1;
    for (auto s : sides) {
        if (s == 0) throw DomainError("box tile side lengths must be positive");
        size *= s;
    }
    if (size > caps().max_tile_size) throw ResourceLimit("box tile of size " + std::to_string(size));
    Tile t;
    t.model = model;
    t.sides = sides;
    std::vector<GroupElement> centers;
    std::vector<GroupElement> points;
    box_translates(model, sides, std::vector<std::uint64_t>(sides.size(), 1), centers, points);
    t.shape = FiniteSubset(std::move(points));
    return t;
}

TileCheck verify_tile(const Tile& tile, std::uint64_t radius) {
    const GroupModel& model = tile.model;
    TileCheck check;
    std::map<GroupElement, GroupElement> owner;
    for (const auto& c : tile.centers_near_ball(radius)) {
        for (const auto& f : tile.shape) {
            GroupElement p = model.compose(f, c);
            if (!model.in_ball(p, radius)) continue;
            auto [it, inserted] = owner.emplace(p, c);
            if (!inserted && check.disjoint) {
                check.disjoint = false;
                check.witness = to_string(p) + " covered by centers " + to_string(it->second) + " and " +
                                to_string(c);
            }
        }
    }
    const auto diam = to_i64(diameter(model, tile.shape));
    if (static_cast<std::int64_t>(radius) >= diam) {
        for (const auto& p : model.ball(radius - diam)) {
            if (owner.count(p) == 0) {
                check.covers = false;
                if (check.witness.empty()) check.witness = to_string(p) + " not covered";
                break;
            }
        }
    }
    return check;
}

RefineConditions check_refined(const FiniteSubset& c, const Rational& epsilon, const Tile& tile,
                               const RefinedTile& refined) {
    const GroupModel& model = tile.model;
    RefineConditions out;
    // Condition 1: the translates are pairwise disjoint and their union is G.
    std::vector<GroupElement> all;
    for (const auto& ci : refined.centers) {
        for (const auto& f : tile.shape) all.push_back(model.compose(f, ci));
    }
    const std::size_t listed = all.size();
    FiniteSubset unioned(std::move(all));
    out.disjoint_union = unioned.size() == listed && unioned == refined.set;
    if (!out.disjoint_union) out.failure = "G is not the disjoint union of tile translates";

    out.invariant = true;
    if (!refined.set.empty()) {
        for (const auto& g : c) {
            if (!(invariance_defect(model, g, refined.set) < epsilon)) {
                out.invariant = false;
                if (out.failure.empty()) out.failure = "invariance defect at " + to_string(g) + " not below epsilon";
                break;
            }
        }
    }
    const auto nf = static_cast<unsigned long>(tile.shape.size());
    out.large = !refined.set.empty() &&
                Rational(3 * nf * nf) / Rational(static_cast<unsigned long>(refined.set.size())) < epsilon;
    if (!out.large && out.failure.empty()) out.failure = "3 (#F)^2 / #G not below epsilon";
    return out;
}

RefinedTile refine_tile(const FiniteSubset& c, const Rational& epsilon, const Tile& tile, RefineStrategy strategy) {
    const GroupModel& model = tile.model;
    if (model.kind() != GroupKind::Zd) throw DomainError("refine_tile supports Z^d models only");
    if (!(epsilon > 0 && epsilon < 1)) throw DomainError("refine_tile needs 0 < epsilon < 1");
    for (const auto& g : c) {
        if (!model.owns(g)) throw ModelMismatch("constraint set element " + to_string(g) + " not in " + model.descriptor());
    }
    const unsigned d = model.coordinates();
    const std::uint64_t tile_size = tile.shape.size();
    const std::size_t cap = caps().max_tile_size;

    if (strategy == RefineStrategy::Minimal) {
        for (std::uint64_t t = 1; t * tile_size <= cap; ++t) {
            std::vector<std::vector<std::uint64_t>> facts;
            std::vector<std::uint64_t> prefix;
            factorizations(t, d, prefix, facts);
            for (const auto& m : facts) {
                std::vector<std::uint64_t> n(d);
                for (unsigned i = 0; i < d; ++i) n[i] = m[i] * tile.sides[i];
                if (!admissible(n, tile_size, c, epsilon)) continue;
                RefinedTile r = materialize(tile, m);
                if (check_refined(c, epsilon, tile, r).ok()) return r;
            }
        }
        throw ResourceLimit("no union of tile translates within the tile size cap satisfies the conditions");
    }

    // Enclosing cube with the tighter defect threshold on C and F F^{-1}.
    const Rational threshold = epsilon / Rational(8 * tile_size * tile_size);
    const FiniteSubset ffinv = set_product(model, tile.shape, set_inverse(model, tile.shape));
    const FiniteSubset constraints = set_union(c, ffinv);
    for (std::uint64_t s = 1;; ++s) {
        std::uint64_t volume = 1;
        for (unsigned i = 0; i < d; ++i) volume *= s;
        if (volume > cap) throw ResourceLimit("enclosing cube exceeds the tile size cap");
        std::vector<std::uint64_t> cube(d, s);
        bool ok = true;
        for (const auto& g : constraints) {
            if (!(box_defect(cube, g) < threshold)) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        std::vector<std::uint64_t> m(d);
        bool empty = false;
        for (unsigned i = 0; i < d; ++i) {
            m[i] = s / tile.sides[i];
            if (m[i] == 0) empty = true;
        }
        if (empty) continue;
        RefinedTile r = materialize(tile, m);
        if (check_refined(c, epsilon, tile, r).ok()) return r;
    }
}

}  // namespace leadmetric
