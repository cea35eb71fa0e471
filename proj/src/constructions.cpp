#include "leadmetric/constructions.hpp"

#include "leadmetric/caps.hpp"
#include "leadmetric/errors.hpp"
#include "leadmetric/metrics.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace leadmetric {

namespace {

Rational point_mass(std::size_t count, std::uint32_t n) {
    return ratio(mpz_class(static_cast<unsigned long>(count)), mpz_class(static_cast<unsigned long>(n)));
}

const PermutationAction& require_permutation(const Action& a, const char* role) {
    if (a.backend() != Backend::Permutation) {
        throw BackendMismatch(std::string(role) + " must be a permutation action");
    }
    return a.permutation();
}

std::uint64_t to_u64(const Integer& x) {
    if (x > std::numeric_limits<std::uint64_t>::max()) throw ResourceLimit("word length beyond 64 bits");
    return x.convert_to<std::uint64_t>();
}

std::size_t position_in(const FiniteSubset& set, const GroupElement& g) {
    auto it = std::lower_bound(set.begin(), set.end(), g);
    if (it == set.end() || *it != g) return set.size();
    return static_cast<std::size_t>(it - set.begin());
}

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

// Elements y with |μ(S^y A ∩ B) − μ(A)μ(B)| >= ε, per ordered pair (A, B).
struct Deviations {
    std::vector<std::vector<GroupElement>> bad;  // [a * m + b]
    bool exhaustive = false;
};

Deviations deviating_elements(const Action& s, const std::vector<MeasurableSet>& r, const Rational& epsilon,
                              std::optional<std::uint64_t> radius) {
    const std::size_t m = r.size();
    Deviations out;
    out.bad.resize(m * m);
    if (m == 0) {
        out.exhaustive = true;
        return out;
    }
    std::vector<GroupElement> elements;
    CorrelationTable table;
    if (s.backend() == Backend::Bernoulli) {
        auto sweep = correlation_sweep(s, s, r);
        elements = sweep.elements;
        table = std::move(sweep.t);
        out.exhaustive = true;
    } else {
        if (!radius) throw DomainError("a permutation action needs a declared mixing radius");
        elements = s.model().ball_sequence(*radius);
        table = correlation_table_parallel(s, elements, r);
    }
    std::vector<Rational> mu;
    for (const auto& a : r) mu.push_back(measure(s, a));
    for (std::size_t k = 0; k < elements.size(); ++k) {
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b < m; ++b) {
                if (abs(table.at(k, a, b) - mu[a] * mu[b]) >= epsilon) out.bad[a * m + b].push_back(elements[k]);
            }
        }
    }
    return out;
}

FiniteSubset conjugates(const GroupModel& model, const std::vector<GroupElement>& gs, const FiniteSubset& h) {
    std::vector<GroupElement> out;
    for (const auto& g : gs) {
        const GroupElement ginv = model.invert(g);
        for (const auto& x : h) out.push_back(model.compose(model.compose(g, x), ginv));
    }
    return FiniteSubset(std::move(out));
}

std::uint64_t signature(const std::vector<PointSet>& sets, std::uint32_t x) {
    std::uint64_t sig = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (sets[i].contains(x)) sig |= std::uint64_t{1} << i;
    }
    return sig;
}

}  // namespace

Rational RokhlinTower::remainder_mass() const { return point_mass(remainder.count(), remainder.ground_size()); }

std::vector<std::optional<std::size_t>> RokhlinTower::level_index() const {
    std::vector<std::optional<std::size_t>> out(remainder.ground_size());
    for (std::size_t l = 0; l < levels.size(); ++l) {
        for (auto y : levels[l].points()) out[y] = l;
    }
    return out;
}

RokhlinTower build_tower(const Action& q, const FiniteSubset& g, const Rational& epsilon) {
    const auto& pq = require_permutation(q, "tower action");
    if (g.empty()) throw DomainError("tower shape G is empty");
    if (epsilon < 0) throw DomainError("tower epsilon must be nonnegative");
    for (const auto& x : g) {
        if (!q.model().owns(x)) throw ModelMismatch("tower shape element " + to_string(x) + " not in " + q.model().descriptor());
    }
    const std::uint32_t n = pq.ground_size();
    if (std::uint64_t{n} * g.size() > caps().max_set_size) {
        throw ResourceLimit("tower needs " + std::to_string(std::uint64_t{n} * g.size()) + " stored images");
    }
    std::vector<Permutation> images(g.size());
    std::vector<std::exception_ptr> errors(g.size());
    const auto count = static_cast<std::ptrdiff_t>(g.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
        try {
            images[k] = pq.element(g[k]);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    rethrow_first(errors);

    RokhlinTower tower;
    tower.tile = g;
    tower.epsilon = epsilon;
    tower.base = PointSet(n);
    PointSet claimed(n);
    std::size_t covered = 0;
    std::vector<std::uint32_t> slice(g.size());
    for (std::uint32_t x = 0; x < n; ++x) {
        bool free = true;
        for (std::size_t k = 0; k < g.size() && free; ++k) {
            slice[k] = images[k][x];
            free = !claimed.contains(slice[k]);
        }
        if (!free) continue;
        std::vector<std::uint32_t> sorted = slice;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
        for (auto y : slice) claimed.insert(y);
        tower.base.insert(x);
        covered += g.size();
    }
    for (const auto& p : images) tower.levels.push_back(tower.base.image(p));
    tower.remainder = claimed.complement();
    tower.reached = tower.remainder_mass() <= epsilon;
    return tower;
}

TowerCheck check_tower(const Action& q, const RokhlinTower& tower) {
    const auto& pq = require_permutation(q, "tower action");
    TowerCheck check;
    auto fail = [&check](bool& flag, std::string why) {
        if (flag && check.failure.empty()) check.failure = std::move(why);
        flag = false;
    };
    const std::uint32_t n = pq.ground_size();
    if (tower.levels.size() != tower.tile.size()) {
        fail(check.levels_match, "level count differs from #G");
        return check;
    }
    PointSet covered(n);
    std::size_t total = 0;
    const std::size_t base = tower.base.count();
    for (std::size_t l = 0; l < tower.levels.size(); ++l) {
        const PointSet expect = std::get<PointSet>(act(q, tower.tile[l], MeasurableSet(tower.base)));
        if (expect != tower.levels[l]) fail(check.levels_match, "level " + to_string(tower.tile[l]) + " is not Q^g E");
        if (intersection_count(covered, tower.levels[l]) != 0) {
            fail(check.disjoint, "level " + to_string(tower.tile[l]) + " meets an earlier level");
        }
        if (tower.levels[l].count() != base) fail(check.equal_mass, "level " + to_string(tower.tile[l]) + " has wrong mass");
        covered = covered | tower.levels[l];
        total += tower.levels[l].count();
    }
    if (total != tower.tile.size() * base || covered.count() != total) fail(check.equal_mass, "union mass is not #G mu(E)");
    if (tower.remainder != covered.complement()) fail(check.remainder_complement, "remainder is not the complement");
    if (!(tower.remainder_mass() <= tower.epsilon)) {
        fail(check.small_remainder, "remainder mass " + to_string(tower.remainder_mass()) + " exceeds " +
                                        to_string(tower.epsilon));
    }
    return check;
}

RefinedTower refine_with_tower(const Action& q, const Tile& f, const FiniteSubset& c, const Rational& epsilon,
                         RefineStrategy strategy) {
    if (q.model() != f.model) throw ModelMismatch("tile and tower action use different groups");
    RefinedTower out;
    out.refined = refine_tile(c, epsilon, f, strategy);
    out.conditions = check_refined(c, epsilon, f, out.refined);
    out.tower = build_tower(q, out.refined.set, epsilon);
    out.tower_check = check_tower(q, out.tower);
    return out;
}

ElementSelection select_elements(const Action& s, const FiniteSubset& f, const std::vector<MeasurableSet>& r,
                              const Rational& epsilon, std::size_t count, const SelectionOptions& options) {
    const auto& model = s.model();
    if (f.empty()) throw DomainError("F must be nonempty");
    if (!(epsilon > 0)) throw DomainError("selection epsilon must be positive");
    for (const auto& a : r) check_set(s, a);

    ElementSelection sel;
    sel.epsilon = epsilon;
    const Deviations dev = deviating_elements(s, r, epsilon, options.mixing_radius);
    sel.mixing_certified = dev.exhaustive;
    if (!dev.exhaustive) sel.mixing_radius = options.mixing_radius;
    for (const auto& list : dev.bad) {
        for (const auto& y : list) sel.factor_radius = std::max(sel.factor_radius, to_u64(model.word_length(y)));
    }
    sel.max_f = to_u64(max_word_length(model, f));
    sel.c_radius = sel.factor_radius + 4 * sel.max_f;
    sel.h = set_product(model, set_product(model, set_inverse(model, f), model.ball(sel.factor_radius)), f);

    const FiniteSubset h5 = set_power(model, sel.h, 5);
    Integer rho = max_word_length(model, h5);
    sel.envelope_radii.push_back(rho);
    if (count == 0) return sel;

    BallOrderStream stream(model, 0);
    std::uint64_t examined = 0;
    std::optional<GroupElement> first;
    while (examined < options.budget) {
        auto cand = stream.next();
        if (!cand) break;
        ++examined;
        if (!h5.contains(*cand)) {
            first = std::move(cand);
            break;
        }
    }
    if (!first) {
        sel.complete = false;
        return sel;
    }
    rho = std::max(rho, model.word_length(*first));
    sel.elements.push_back(*first);
    sel.envelope_radii.push_back(rho);

    while (sel.elements.size() < count) {
        const FiniteSubset i_n = conjugates(model, sel.elements, sel.h);
        auto found = conjugator_search(model, i_n, sel.h, 1, options.budget, 5 * rho + 1);
        if (!found.complete) {
            sel.complete = false;
            break;
        }
        const GroupElement& g = found.elements.front();
        rho = model.word_length(g);
        sel.elements.push_back(g);
        sel.envelope_radii.push_back(rho);
    }
    return sel;
}

SeparationCheck check_separation(const GroupModel& model, const ElementSelection& sel) {
    SeparationCheck out;
    auto fail = [&out](std::string why) {
        if (out.ok) out.failure = std::move(why);
        out.ok = false;
    };
    if (sel.envelope_radii.size() != sel.elements.size() + 1) {
        fail("envelope count does not match the prefix");
        return out;
    }
    const FiniteSubset h5 = set_power(model, sel.h, 5);
    if (max_word_length(model, h5) != sel.envelope_radii[0]) fail("rho_0 is not the radius of H^5");
    for (std::size_t n = 0; n < sel.elements.size(); ++n) {
        const GroupElement& g = sel.elements[n];
        const Integer len = model.word_length(g);
        const std::string tag = "g_" + std::to_string(n + 1) + " = " + to_string(g);
        if (n == 0) {
            if (h5.contains(g)) fail(tag + " lies in H^5");
        } else {
            if (len <= 5 * sel.envelope_radii[n]) fail(tag + " lies in C_" + std::to_string(n) + "^5");
            const FiniteSubset i_n = conjugates(model, {sel.elements.begin(), sel.elements.begin() + static_cast<std::ptrdiff_t>(n)},
                                                sel.h);
            if (!conjugation_excludes(model, i_n, sel.h, g)) fail(tag + " conjugates I_n into H");
        }
        if (len > sel.envelope_radii[n + 1]) fail(tag + " lies outside C_" + std::to_string(n + 1));
        if (sel.envelope_radii[n + 1] < (n == 0 ? sel.envelope_radii[0] : 5 * sel.envelope_radii[n])) {
            fail("C_" + std::to_string(n + 1) + " does not contain the previous fifth power");
        }
    }
    return out;
}

ExceptionReport count_exceptions(const Action& s, const FiniteSubset& f, const std::vector<MeasurableSet>& r,
                           const ElementSelection& selection) {
    const auto& model = s.model();
    const std::size_t m = r.size();
    const Deviations dev = deviating_elements(s, r, selection.epsilon, selection.mixing_radius);
    std::vector<std::unordered_set<GroupElement, GroupElementHash>> bad(m * m);
    for (std::size_t k = 0; k < m * m; ++k) bad[k].insert(dev.bad[k].begin(), dev.bad[k].end());

    const auto& fs = f.elements();
    const auto& gs = selection.elements;
    const std::size_t n = gs.size();
    std::vector<GroupElement> finv, ginv;
    for (const auto& x : fs) finv.push_back(model.invert(x));
    for (const auto& x : gs) ginv.push_back(model.invert(x));
    // y = left[f][j] · k · right[i][h] with k = f^{-1} g h
    std::vector<std::vector<GroupElement>> left(fs.size()), right(n);
    for (std::size_t a = 0; a < fs.size(); ++a) {
        for (std::size_t j = 0; j < n; ++j) left[a].push_back(model.compose(fs[a], ginv[j]));
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t b = 0; b < fs.size(); ++b) right[i].push_back(model.compose(gs[i], finv[b]));
    }

    std::vector<GroupElement> candidates;
    {
        std::unordered_set<GroupElement, GroupElementHash> seen;
        for (std::size_t a = 0; a < fs.size(); ++a) {
            for (std::size_t b = 0; b < fs.size(); ++b) {
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        // g = f g_j f^{-1} y h g_i^{-1} h^{-1}
                        const GroupElement pre = model.compose(model.compose(fs[a], gs[j]), finv[a]);
                        const GroupElement post = model.compose(model.compose(fs[b], ginv[i]), finv[b]);
                        for (const auto& set : bad) {
                            for (const auto& y : set) {
                                GroupElement g = model.compose(model.compose(pre, y), post);
                                if (seen.insert(g).second) candidates.push_back(std::move(g));
                            }
                        }
                    }
                }
            }
        }
    }
    std::sort(candidates.begin(), candidates.end());

    struct Counts {
        std::size_t pairs = 0;
        std::size_t diagonal = 0;
    };
    std::vector<Counts> counts(candidates.size());
    std::vector<std::exception_ptr> errors(candidates.size());
    const auto total = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < total; ++c) {
        try {
            const GroupElement& g = candidates[c];
            const bool outside_c = !model.in_ball(g, selection.c_radius);
            Counts best;
            for (std::size_t a = 0; a < fs.size(); ++a) {
                for (std::size_t b = 0; b < fs.size(); ++b) {
                    const GroupElement k = model.compose(model.compose(finv[a], g), fs[b]);
                    for (std::size_t ab = 0; ab < m * m; ++ab) {
                        if (bad[ab].empty()) continue;
                        std::size_t pairs = 0, diagonal = 0;
                        for (std::size_t i = 0; i < n; ++i) {
                            const GroupElement kr = model.compose(k, right[i][b]);
                            for (std::size_t j = 0; j < n; ++j) {
                                if (!bad[ab].contains(model.compose(left[a][j], kr))) continue;
                                if (i == j) {
                                    diagonal += outside_c ? 1 : 0;
                                } else {
                                    ++pairs;
                                }
                            }
                        }
                        best.pairs = std::max(best.pairs, pairs);
                        best.diagonal = std::max(best.diagonal, diagonal);
                    }
                }
            }
            counts[c] = best;
        } catch (...) {
            errors[c] = std::current_exception();
        }
    }
    rethrow_first(errors);

    ExceptionReport report;
    report.scanned = candidates.size();
    report.exhaustive = dev.exhaustive;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (counts[c].pairs > report.max_pairs) {
            report.max_pairs = counts[c].pairs;
            report.pair_witness = candidates[c];
        }
        if (counts[c].diagonal > report.max_diagonal_outside_c) {
            report.max_diagonal_outside_c = counts[c].diagonal;
            report.diagonal_witness = candidates[c];
        }
    }
    return report;
}

Permutation transfer_bijection(std::uint32_t n, const std::vector<PointSet>& source, const std::vector<PointSet>& target,
                               bool strict) {
    if (source.size() != target.size()) throw DomainError("source and target set systems differ in length");
    if (source.size() > 64) throw ResourceLimit("at most 64 sets can be transferred");
    for (std::size_t i = 0; i < source.size(); ++i) {
        if (source[i].ground_size() != n || target[i].ground_size() != n) {
            throw BackendMismatch("set " + std::to_string(i + 1) + " is not on the " + std::to_string(n) + "-point space");
        }
        if (strict && source[i].count() != target[i].count()) {
            throw DomainError("set " + std::to_string(i + 1) + " has " + std::to_string(source[i].count()) +
                              " points but its image needs " + std::to_string(target[i].count()));
        }
    }
    std::map<std::uint64_t, std::vector<std::uint32_t>> from, to;
    for (std::uint32_t x = 0; x < n; ++x) {
        from[signature(source, x)].push_back(x);
        to[signature(target, x)].push_back(x);
    }
    Permutation u(n, n);
    std::vector<std::uint32_t> spare_from, spare_to;
    for (auto& [sig, pts] : from) {
        auto& dest = to[sig];
        if (strict && dest.size() != pts.size()) {
            std::string names;
            for (std::size_t i = 0; i < source.size(); ++i) {
                if ((sig >> i) & 1u) names += (names.empty() ? "" : ",") + std::to_string(i + 1);
            }
            throw DomainError("atom inside sets {" + names + "} has " + std::to_string(pts.size()) +
                              " points but its image needs " + std::to_string(dest.size()));
        }
        const std::size_t common = std::min(pts.size(), dest.size());
        for (std::size_t k = 0; k < common; ++k) u[pts[k]] = dest[k];
        spare_from.insert(spare_from.end(), pts.begin() + static_cast<std::ptrdiff_t>(common), pts.end());
    }
    for (auto& [sig, pts] : to) {
        const std::size_t used = from.count(sig) ? std::min(from[sig].size(), pts.size()) : 0;
        spare_to.insert(spare_to.end(), pts.begin() + static_cast<std::ptrdiff_t>(used), pts.end());
    }
    std::sort(spare_from.begin(), spare_from.end());
    std::sort(spare_to.begin(), spare_to.end());
    for (std::size_t k = 0; k < spare_from.size(); ++k) u[spare_from[k]] = spare_to[k];
    return u;
}

SpecialAction build_special_action(const SpecialActionParams& p) {
    const auto& ps = require_permutation(p.s, "S");
    const auto& pq = require_permutation(p.q, "Q");
    const GroupModel& model = p.s.model();
    if (p.q.model() != model) throw ModelMismatch("S and Q act by different groups");
    const std::uint32_t nx = ps.ground_size(), ny = pq.ground_size();
    const std::uint64_t total = std::uint64_t{nx} * ny;
    if (total > caps().max_ground_size) throw ResourceLimit("special action needs " + std::to_string(total) + " points");
    const std::uint32_t n = static_cast<std::uint32_t>(total);
    if (p.tower.remainder.ground_size() != ny) throw BackendMismatch("tower is not on Q's space");
    for (std::size_t i = 0; i < p.r.size(); ++i) {
        if (p.r[i].ground_size() != nx) throw BackendMismatch("set " + std::to_string(i + 1) + " is not on S's space");
    }
    if (p.g_list.size() < p.centers.size()) throw DomainError("fewer elements g_i than centers c_i");

    SpecialAction out{p.s, {}, {}, {}, {}};
    const FiniteSubset& tile = p.tower.tile;
    out.level_word.assign(tile.size(), {p.f.size(), p.centers.size()});
    for (std::size_t a = 0; a < p.f.size(); ++a) {
        for (std::size_t i = 0; i < p.centers.size(); ++i) {
            const GroupElement fc = model.compose(p.f[a], p.centers[i]);
            const std::size_t l = position_in(tile, fc);
            if (l == tile.size()) throw DomainError(to_string(fc) + " = f c_i is not in G");
            if (out.level_word[l].first != p.f.size()) throw DomainError(to_string(fc) + " = f c_i arises twice");
            out.level_word[l] = {a, i};
        }
    }
    for (std::size_t l = 0; l < tile.size(); ++l) {
        if (out.level_word[l].first == p.f.size()) throw DomainError(to_string(tile[l]) + " in G is no f c_i");
    }

    out.j = identity_permutation(n);
    for (std::size_t l = 0; l < tile.size(); ++l) {
        const auto [a, i] = out.level_word[l];
        const GroupElement word = model.compose(model.compose(p.f[a], p.g_list[i]), model.invert(p.f[a]));
        const Permutation sx = ps.element(word);
        for (auto y : p.tower.levels[l].points()) {
            for (std::uint32_t x = 0; x < nx; ++x) out.j[x * ny + y] = sx[x] * ny + y;
        }
    }

    std::vector<PointSet> target;
    for (const auto& a : p.r) {
        PointSet t(n);
        for (auto x : a.points()) {
            for (std::uint32_t y = 0; y < ny; ++y) t.insert(x * ny + y);
        }
        target.push_back(std::move(t));
    }
    out.r_z = p.v_source ? *p.v_source : target;
    out.v = transfer_bijection(n, out.r_z, target, true);

    const Action product = product_action(p.s, p.q);
    const Permutation vinv = inverse(out.v), jinv = inverse(out.j);
    std::vector<Permutation> images;
    for (const auto& step : product.permutation().generator_images()) {
        images.push_back(compose(vinv, compose(jinv, compose(step, compose(out.j, out.v)))));
    }
    out.z = PermutationAction(model, n, std::move(images));
    return out;
}

std::string case_name(ProofCase c) {
    switch (c) {
        case ProofCase::InH: return "g in H";
        case ProofCase::InCOutsideH: return "g in C minus H";
        case ProofCase::OutsideC: return "g outside C";
    }
    return "?";
}

MixtureDecomposition mixture_decomposition(const Action& t, const std::vector<MeasurableSet>& t_sets,
                                const SpecialActionParams& p, const SpecialAction& special, const GroupElement& g,
                                std::size_t a, std::size_t b, const FiniteSubset& h_t, std::uint64_t c_radius,
                                const Rational& epsilon) {
    if (a >= p.r.size() || b >= p.r.size() || t_sets.size() != p.r.size()) {
        throw DomainError("decomposition is only valid for sets of r");
    }
    const GroupModel& model = p.s.model();
    const std::uint32_t ny = p.q.permutation().ground_size();
    MixtureDecomposition out;
    out.t_value = correlation(t, g, t_sets[a], t_sets[b]);
    out.z_value = correlation(special.z, g, special.r_z[a], special.r_z[b]);
    out.lhs = abs(out.t_value - out.z_value);
    out.remainder_term = 2 * p.tower.remainder_mass();
    if (h_t.contains(g)) {
        out.proof_case = ProofCase::InH;
    } else if (model.in_ball(g, c_radius)) {
        out.proof_case = ProofCase::InCOutsideH;
    } else {
        out.proof_case = ProofCase::OutsideC;
    }

    const auto& fs = p.f.elements();
    const auto& cs = p.centers.elements();
    const MeasurableSet base(p.tower.base);
    std::vector<std::size_t> target_level(fs.size() * cs.size());
    for (std::size_t fi = 0; fi < fs.size(); ++fi) {
        for (std::size_t j = 0; j < cs.size(); ++j) {
            target_level[fi * cs.size() + j] = position_in(p.tower.tile, model.compose(fs[fi], cs[j]));
        }
    }
    std::vector<MeasurableSet> a_tilde, b_tilde;
    for (const auto& f : fs) {
        a_tilde.push_back(act(p.s, model.invert(f), MeasurableSet(p.r[a])));
        b_tilde.push_back(act(p.s, model.invert(f), MeasurableSet(p.r[b])));
    }
    Rational sum = 0;
    for (std::size_t hi = 0; hi < fs.size(); ++hi) {
        const GroupElement gh = model.compose(g, fs[hi]);
        for (std::size_t i = 0; i < cs.size(); ++i) {
            const PointSet source = std::get<PointSet>(act(p.q, model.compose(gh, cs[i]), base));
            for (std::size_t fi = 0; fi < fs.size(); ++fi) {
                const GroupElement k = model.compose(model.invert(fs[fi]), gh);
                for (std::size_t j = 0; j < cs.size(); ++j) {
                    const auto& level = p.tower.levels[target_level[fi * cs.size() + j]];
                    const std::size_t overlap = intersection_count(source, level);
                    if (overlap == 0) continue;
                    QuadrupleTerm term;
                    term.f = fi;
                    term.h = hi;
                    term.i = i;
                    term.j = j;
                    term.k = k;
                    term.weight = point_mass(overlap, ny);
                    const GroupElement x = model.compose(model.compose(model.invert(p.g_list[j]), k), p.g_list[i]);
                    term.s_value = correlation(p.s, x, a_tilde[hi], b_tilde[fi]);
                    term.difference = abs(out.t_value - term.s_value);
                    sum += term.difference * term.weight;
                    if (term.difference > 2 * epsilon) {
                        out.bad_mass += term.weight;
                        ++out.bad_quadruples;
                    }
                    out.terms.push_back(std::move(term));
                }
            }
        }
    }
    out.rhs = sum + out.remainder_term;
    return out;
}

FactorWitness factor_conjugacy_witness(const Action& t, const Action& s, const FactorMap& v,
                                       const std::vector<PointSet>& q, const std::vector<PointSet>& shared) {
    const auto& pt = require_permutation(t, "T");
    require_permutation(s, "S");
    if (q.size() != shared.size()) throw DomainError("q and its shared representatives differ in length");
    if (v.map.size() != pt.ground_size()) throw DomainError("factor map is not defined on T's space");
    const FactorReport report = factor_check(v, t, s, 1, q);
    if (!report.ok()) throw DomainError("not a factor map: " + report.witness);
    std::vector<PointSet> targets;
    for (const auto& a : q) targets.push_back(preimage(v, pt.ground_size(), a));
    FactorWitness out{transfer_bijection(pt.ground_size(), shared, targets, true), t, 0, 0, true};
    out.conjugate = conjugate_action(t, out.u);
    auto reps = image_representatives({t});
    if (!reps) throw ResourceLimit("image closure of T exceeds the cap");
    for (const auto& g : *reps) {
        for (std::size_t a = 0; a < q.size(); ++a) {
            for (std::size_t b = 0; b < q.size(); ++b) {
                const Rational lhs = correlation(s, g, MeasurableSet(q[a]), MeasurableSet(q[b]));
                const Rational rhs = correlation(out.conjugate, g, MeasurableSet(shared[a]), MeasurableSet(shared[b]));
                out.max_difference = max(out.max_difference, abs(lhs - rhs));
                ++out.checked;
            }
        }
    }
    out.exact = out.max_difference == 0;
    return out;
}

bool DensityReport::ok() const {
    return std::all_of(entries.begin(), entries.end(), [](const DensityEntry& e) { return e.within; });
}

DensityReport density_demo(const std::vector<Action>& actions, const std::vector<std::size_t>& q,
                           const Rational& epsilon) {
    if (actions.empty()) throw DomainError("density demo needs at least one action");
    if (q.empty()) throw DomainError("index set q must be nonempty");
    for (const auto& a : actions) require_permutation(a, "listed action");
    Action product = actions.front();
    for (std::size_t i = 1; i < actions.size(); ++i) product = product_action(product, actions[i]);
    const std::uint32_t n = product.permutation().ground_size();

    auto pick = [&q](const GeneratingFamily& fam, const std::string& who) {
        std::vector<PointSet> out;
        for (auto i : q) {
            if (i == 0 || i > fam.size()) throw DomainError("index " + std::to_string(i) + " outside the family of " + who);
            out.push_back(std::get<PointSet>(fam.at(i)));
        }
        return out;
    };
    const std::size_t need = *std::max_element(q.begin(), q.end());
    const std::vector<PointSet> shared = pick(default_family(product, need), "the product");

    DensityReport report;
    report.product_size = n;
    report.epsilon = epsilon;
    auto reps = image_representatives({product});
    if (!reps) throw ResourceLimit("image closure of the product exceeds the cap");

    std::uint64_t stride = n;
    for (std::size_t idx = 0; idx < actions.size(); ++idx) {
        const auto& ti = actions[idx];
        const std::uint32_t ni = ti.permutation().ground_size();
        stride /= ni;
        FactorMap v;
        v.map.resize(n);
        for (std::uint32_t x = 0; x < n; ++x) v.map[x] = static_cast<std::uint32_t>((x / stride) % ni);
        const std::vector<PointSet> own = pick(default_family(ti, need), "action " + std::to_string(idx + 1));
        std::vector<PointSet> targets;
        for (const auto& a : own) targets.push_back(preimage(v, n, a));

        DensityEntry entry;
        entry.index = idx + 1;
        Permutation u;
        try {
            u = transfer_bijection(n, shared, targets, true);
        } catch (const DomainError&) {
            entry.cardinalities_match = false;
            u = transfer_bijection(n, shared, targets, false);
        }
        const Action conj = conjugate_action(product, u);
        for (const auto& g : *reps) {
            for (std::size_t a = 0; a < own.size(); ++a) {
                for (std::size_t b = 0; b < own.size(); ++b) {
                    const Rational x = correlation(ti, g, MeasurableSet(own[a]), MeasurableSet(own[b]));
                    const Rational y = correlation(conj, g, MeasurableSet(shared[a]), MeasurableSet(shared[b]));
                    entry.distance = max(entry.distance, abs(x - y));
                }
            }
        }
        entry.within = entry.distance < epsilon;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace leadmetric
