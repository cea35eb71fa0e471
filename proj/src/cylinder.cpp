#include "leadmetric/cylinder.hpp"

#include "leadmetric/caps.hpp"
#include "leadmetric/errors.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace leadmetric {

namespace {

void check_support_cap(std::size_t size) {
    if (size > caps().max_cylinder_support) {
        throw ResourceLimit("cylinder support of " + std::to_string(size) + " coordinates exceeds cap " +
                            std::to_string(caps().max_cylinder_support));
    }
}

// alphabet^k, guarded against blow-up.
std::size_t pattern_space(std::uint32_t alphabet, std::size_t k) {
    double total = 1;
    std::size_t exact = 1;
    for (std::size_t i = 0; i < k; ++i) {
        total *= alphabet;
        exact *= alphabet;
    }
    if (total > static_cast<double>(caps().max_set_size)) {
        throw ResourceLimit("cylinder pattern space alphabet^" + std::to_string(k) + " exceeds the set size cap");
    }
    return exact;
}

// Odometer over all assignments of `k` symbols.
template <typename F>
void for_each_assignment(std::uint32_t alphabet, std::size_t k, F&& f) {
    pattern_space(alphabet, k);
    Pattern cur(k, 0);
    for (;;) {
        f(cur);
        std::size_t i = k;
        while (i > 0) {
            --i;
            if (++cur[i] < alphabet) break;
            cur[i] = 0;
            if (i == 0) return;
        }
        if (k == 0) return;
    }
}

std::vector<GroupElement> merged_support(const CylinderUnion& a, const CylinderUnion& b) {
    std::vector<GroupElement> s;
    std::set_union(a.support().begin(), a.support().end(), b.support().begin(), b.support().end(),
                   std::back_inserter(s));
    check_support_cap(s.size());
    return s;
}

void check_same_alphabet(const CylinderUnion& a, const CylinderUnion& b) {
    if (a.alphabet() != b.alphabet()) throw BackendMismatch("cylinder sets over different alphabets");
}

}  // namespace

CylinderUnion CylinderUnion::make(std::uint32_t alphabet, std::vector<GroupElement> support,
                                  std::vector<Pattern> patterns) {
    if (alphabet < 2) throw ValidationError("alphabet must have at least two symbols");
    for (const auto& p : patterns) {
        if (p.size() != support.size()) throw ValidationError("pattern length does not match the support");
        for (auto s : p) {
            if (s >= alphabet) throw ValidationError("symbol " + std::to_string(s) + " outside the alphabet");
        }
    }
    // Sort coordinates, carrying the pattern columns along.
    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return support[x] < support[y]; });
    std::vector<GroupElement> sorted;
    std::vector<std::size_t> keep;
    std::vector<std::pair<std::size_t, std::size_t>> duplicates;  // (kept column, dropped column)
    for (std::size_t idx : order) {
        if (!sorted.empty() && sorted.back() == support[idx]) {
            duplicates.emplace_back(keep.back(), idx);
            continue;
        }
        sorted.push_back(support[idx]);
        keep.push_back(idx);
    }
    std::vector<Pattern> reordered;
    for (const auto& p : patterns) {
        bool consistent = true;
        for (auto [k, d] : duplicates) consistent = consistent && p[k] == p[d];
        if (!consistent) continue;
        Pattern q;
        q.reserve(keep.size());
        for (std::size_t idx : keep) q.push_back(p[idx]);
        reordered.push_back(std::move(q));
    }
    std::sort(reordered.begin(), reordered.end());
    reordered.erase(std::unique(reordered.begin(), reordered.end()), reordered.end());

    // Drop coordinates the set does not depend on.
    for (std::size_t k = sorted.size(); k-- > 0;) {
        bool essential = false;
        for (const auto& p : reordered) {
            Pattern v = p;
            for (std::uint32_t a = 0; a < alphabet && !essential; ++a) {
                v[k] = a;
                essential = !std::binary_search(reordered.begin(), reordered.end(), v);
            }
            if (essential) break;
        }
        if (essential) continue;
        for (auto& p : reordered) p.erase(p.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(reordered.begin(), reordered.end());
        reordered.erase(std::unique(reordered.begin(), reordered.end()), reordered.end());
        sorted.erase(sorted.begin() + static_cast<std::ptrdiff_t>(k));
    }
    check_support_cap(sorted.size());
    CylinderUnion c;
    c.alphabet_ = alphabet;
    c.support_ = std::move(sorted);
    c.patterns_ = std::move(reordered);
    return c;
}

CylinderUnion CylinderUnion::full(std::uint32_t alphabet) { return make(alphabet, {}, {Pattern{}}); }

CylinderUnion CylinderUnion::empty(std::uint32_t alphabet) { return make(alphabet, {}, {}); }

CylinderUnion CylinderUnion::coordinate(std::uint32_t alphabet, const GroupElement& s, std::uint32_t symbol) {
    return make(alphabet, {s}, {Pattern{symbol}});
}

std::vector<Pattern> CylinderUnion::expand_to(const std::vector<GroupElement>& superset) const {
    std::vector<std::size_t> own_pos;  // position in superset of each own coordinate
    std::vector<std::size_t> extra_pos;
    std::size_t j = 0;
    for (std::size_t i = 0; i < superset.size(); ++i) {
        if (j < support_.size() && support_[j] == superset[i]) {
            own_pos.push_back(i);
            ++j;
        } else {
            extra_pos.push_back(i);
        }
    }
    if (j != support_.size()) throw DomainError("expand_to needs a superset of the support");
    std::vector<Pattern> out;
    for (const auto& p : patterns_) {
        for_each_assignment(alphabet_, extra_pos.size(), [&](const Pattern& extra) {
            Pattern q(superset.size());
            for (std::size_t k = 0; k < own_pos.size(); ++k) q[own_pos[k]] = p[k];
            for (std::size_t k = 0; k < extra_pos.size(); ++k) q[extra_pos[k]] = extra[k];
            out.push_back(std::move(q));
        });
    }
    std::sort(out.begin(), out.end());
    return out;
}

CylinderUnion cylinder_union(const CylinderUnion& a, const CylinderUnion& b) {
    check_same_alphabet(a, b);
    auto s = merged_support(a, b);
    auto pa = a.expand_to(s);
    auto pb = b.expand_to(s);
    std::vector<Pattern> u;
    std::set_union(pa.begin(), pa.end(), pb.begin(), pb.end(), std::back_inserter(u));
    return CylinderUnion::make(a.alphabet(), s, std::move(u));
}

CylinderUnion cylinder_intersection(const CylinderUnion& a, const CylinderUnion& b) {
    check_same_alphabet(a, b);
    auto s = merged_support(a, b);
    auto pa = a.expand_to(s);
    auto pb = b.expand_to(s);
    std::vector<Pattern> u;
    std::set_intersection(pa.begin(), pa.end(), pb.begin(), pb.end(), std::back_inserter(u));
    return CylinderUnion::make(a.alphabet(), s, std::move(u));
}

CylinderUnion cylinder_complement(const CylinderUnion& a) {
    std::vector<Pattern> out;
    for_each_assignment(a.alphabet(), a.support().size(), [&](const Pattern& p) {
        if (!std::binary_search(a.patterns().begin(), a.patterns().end(), p)) out.push_back(p);
    });
    return CylinderUnion::make(a.alphabet(), a.support(), std::move(out));
}

CylinderUnion shift(const GroupModel& model, const GroupElement& g, const CylinderUnion& a) {
    const GroupElement ginv = model.invert(g);
    std::vector<GroupElement> moved;
    moved.reserve(a.support().size());
    for (const auto& s : a.support()) moved.push_back(model.compose(s, ginv));
    return CylinderUnion::make(a.alphabet(), std::move(moved), a.patterns());
}

Rational cylinder_measure(const std::vector<Rational>& weights, const CylinderUnion& a) {
    if (weights.size() != a.alphabet()) throw BackendMismatch("weights do not match the cylinder alphabet");
    Rational total = 0;
    for (const auto& p : a.patterns()) {
        Rational term = 1;
        for (auto s : p) term *= weights[s];
        total += term;
    }
    return total;
}

Rational cylinder_intersection_measure(const std::vector<Rational>& weights, const CylinderUnion& a,
                                       const CylinderUnion& b) {
    check_same_alphabet(a, b);
    if (weights.size() != a.alphabet()) throw BackendMismatch("weights do not match the cylinder alphabet");
    std::vector<std::size_t> oa, ob;  // overlap positions in a and b
    std::size_t i = 0, j = 0;
    while (i < a.support().size() && j < b.support().size()) {
        if (a.support()[i] == b.support()[j]) {
            oa.push_back(i++);
            ob.push_back(j++);
        } else if (a.support()[i] < b.support()[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    auto group = [&](const CylinderUnion& c, const std::vector<std::size_t>& overlap) {
        std::map<Pattern, Rational> mass;
        std::vector<bool> in_overlap(c.support().size(), false);
        for (auto k : overlap) in_overlap[k] = true;
        for (const auto& p : c.patterns()) {
            Pattern key;
            key.reserve(overlap.size());
            for (auto k : overlap) key.push_back(p[k]);
            Rational w = 1;
            for (std::size_t k = 0; k < p.size(); ++k) {
                if (!in_overlap[k]) w *= weights[p[k]];
            }
            mass[key] += w;
        }
        return mass;
    };
    const auto ma = group(a, oa);
    const auto mb = group(b, ob);
    Rational total = 0;
    auto ia = ma.begin();
    auto ib = mb.begin();
    while (ia != ma.end() && ib != mb.end()) {
        if (ia->first < ib->first) {
            ++ia;
        } else if (ib->first < ia->first) {
            ++ib;
        } else {
            Rational w = ia->second * ib->second;
            for (auto s : ia->first) w *= weights[s];
            total += w;
            ++ia;
            ++ib;
        }
    }
    return total;
}

namespace {

CylinderUnion lift(const CylinderUnion& c, std::uint32_t other, bool as_first) {
    const std::uint32_t alphabet = c.alphabet() * other;
    std::vector<Pattern> out;
    for (const auto& p : c.patterns()) {
        for_each_assignment(other, p.size(), [&](const Pattern& partner) {
            Pattern q(p.size());
            for (std::size_t k = 0; k < p.size(); ++k) {
                q[k] = as_first ? p[k] * other + partner[k] : partner[k] * c.alphabet() + p[k];
            }
            out.push_back(std::move(q));
        });
    }
    return CylinderUnion::make(alphabet, c.support(), std::move(out));
}

}  // namespace

CylinderUnion lift_first(const CylinderUnion& a, std::uint32_t other_alphabet) {
    return lift(a, other_alphabet, true);
}

CylinderUnion lift_second(const CylinderUnion& b, std::uint32_t other_alphabet) {
    return lift(b, other_alphabet, false);
}

}  // namespace leadmetric
