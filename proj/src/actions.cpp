#include "leadmetric/actions.hpp"

#include "leadmetric/caps.hpp"
#include "leadmetric/errors.hpp"

#include <algorithm>

namespace leadmetric {

namespace {

Rational point_mass(std::size_t count, std::uint32_t n) {
    return ratio(mpz_class(static_cast<unsigned long>(count)), mpz_class(static_cast<unsigned long>(n)));
}

const PointSet& as_points(const MeasurableSet& a) {
    if (const auto* p = std::get_if<PointSet>(&a)) return *p;
    throw BackendMismatch("expected a point set, got a cylinder set");
}

const CylinderUnion& as_cylinders(const MeasurableSet& a) {
    if (const auto* c = std::get_if<CylinderUnion>(&a)) return *c;
    throw BackendMismatch("expected a cylinder set, got a point set");
}

}  // namespace

PermutationAction::PermutationAction(GroupModel model, std::uint32_t ground_size,
                                     std::vector<Permutation> generator_images)
    : model_(std::move(model)), n_(ground_size), images_(std::move(generator_images)) {
    if (n_ == 0) throw ValidationError("ground set must be nonempty");
    if (n_ > caps().max_ground_size) {
        throw ResourceLimit("ground size " + std::to_string(n_) + " exceeds cap " +
                            std::to_string(caps().max_ground_size));
    }
    if (images_.size() != model_.rank()) {
        throw ValidationError(model_.descriptor() + " needs " + std::to_string(model_.rank()) +
                              " generator images, got " + std::to_string(images_.size()));
    }
    for (std::size_t i = 0; i < images_.size(); ++i) {
        if (!is_bijection(images_[i], n_)) {
            throw ValidationError("generator image " + std::to_string(i) + " is not a bijection of {0.." +
                                  std::to_string(n_ - 1) + "}");
        }
        cycles_.emplace_back(images_[i]);
    }
    if (model_.kind() == GroupKind::Heisenberg3) {
        const Permutation& x = images_[0];
        const Permutation& y = images_[1];
        center_ = CycleForm(compose(compose(x, y), compose(inverse(x), inverse(y))));
    }
}

Permutation PermutationAction::element(const GroupElement& g) const {
    if (!model_.owns(g)) throw ModelMismatch("element " + to_string(g) + " not in " + model_.descriptor());
    if (model_.kind() == GroupKind::Zd) {
        Permutation r = cycles_[0].power(g[0]);
        for (unsigned i = 1; i < model_.coordinates(); ++i) r = compose(r, cycles_[i].power(g[i]));
        return r;
    }
    const Integer m = g[2] - g[0] * g[1];
    return compose(center_.power(m), compose(cycles_[0].power(g[0]), cycles_[1].power(g[1])));
}

BernoulliAction::BernoulliAction(GroupModel model, std::vector<Rational> weights)
    : model_(std::move(model)), weights_(std::move(weights)) {
    if (weights_.size() < 2) throw ValidationError("Bernoulli alphabet needs at least two symbols");
    Rational sum = 0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (!(weights_[i] > 0)) throw ValidationError("weight " + std::to_string(i) + " is not positive");
        sum += weights_[i];
    }
    if (sum != 1) throw ValidationError("weights sum to " + to_string(sum) + ", expected 1/1");
}

const GroupModel& Action::model() const {
    return std::visit([](const auto& a) -> const GroupModel& { return a.model(); }, impl_);
}

const PermutationAction& Action::permutation() const {
    if (const auto* p = std::get_if<PermutationAction>(&impl_)) return *p;
    throw BackendMismatch("operation needs a permutation action");
}

const BernoulliAction& Action::bernoulli() const {
    if (const auto* b = std::get_if<BernoulliAction>(&impl_)) return *b;
    throw BackendMismatch("operation needs a Bernoulli action");
}

std::string backend_name(Backend b) { return b == Backend::Permutation ? "permutation" : "bernoulli"; }

void check_set(const Action& t, const MeasurableSet& a) {
    if (t.backend() == Backend::Permutation) {
        const auto& p = as_points(a);
        if (p.ground_size() != t.permutation().ground_size()) {
            throw BackendMismatch("point set over " + std::to_string(p.ground_size()) + " points, action over " +
                                  std::to_string(t.permutation().ground_size()));
        }
        return;
    }
    const auto& c = as_cylinders(a);
    if (c.alphabet() != t.bernoulli().alphabet()) throw BackendMismatch("cylinder alphabet differs from the action's");
    for (const auto& s : c.support()) {
        if (!t.model().owns(s)) throw ModelMismatch("cylinder coordinate " + to_string(s) + " not in " + t.model().descriptor());
    }
}

bool same_space(const Action& t, const Action& s) {
    if (t.backend() != s.backend() || t.model() != s.model()) return false;
    if (t.backend() == Backend::Permutation) return t.permutation().ground_size() == s.permutation().ground_size();
    return t.bernoulli().weights() == s.bernoulli().weights();
}

MeasurableSet full_set(const Action& t) {
    if (t.backend() == Backend::Permutation) return PointSet::full(t.permutation().ground_size());
    return CylinderUnion::full(t.bernoulli().alphabet());
}

MeasurableSet empty_set(const Action& t) {
    if (t.backend() == Backend::Permutation) return PointSet(t.permutation().ground_size());
    return CylinderUnion::empty(t.bernoulli().alphabet());
}

MeasurableSet act(const Action& t, const GroupElement& g, const MeasurableSet& a) {
    check_set(t, a);
    if (t.backend() == Backend::Permutation) return as_points(a).image(t.permutation().element(g));
    return shift(t.model(), g, as_cylinders(a));
}

Rational measure(const Action& t, const MeasurableSet& a) {
    check_set(t, a);
    if (t.backend() == Backend::Permutation) return point_mass(as_points(a).count(), t.permutation().ground_size());
    return cylinder_measure(t.bernoulli().weights(), as_cylinders(a));
}

Rational intersection_measure(const Action& t, const MeasurableSet& a, const MeasurableSet& b) {
    check_set(t, a);
    check_set(t, b);
    if (t.backend() == Backend::Permutation) {
        return point_mass(intersection_count(as_points(a), as_points(b)), t.permutation().ground_size());
    }
    return cylinder_intersection_measure(t.bernoulli().weights(), as_cylinders(a), as_cylinders(b));
}

Rational symmetric_difference_measure(const Action& t, const MeasurableSet& a, const MeasurableSet& b) {
    return measure(t, a) + measure(t, b) - 2 * intersection_measure(t, a, b);
}

Rational correlation(const Action& t, const GroupElement& g, const MeasurableSet& a, const MeasurableSet& b) {
    check_set(t, a);
    check_set(t, b);
    if (t.backend() == Backend::Permutation) {
        const Permutation p = t.permutation().element(g);
        const PointSet& sa = as_points(a);
        const PointSet& sb = as_points(b);
        std::size_t count = 0;
        for (auto x : sa.points()) count += sb.contains(p[x]) ? 1 : 0;
        return point_mass(count, t.permutation().ground_size());
    }
    return cylinder_intersection_measure(t.bernoulli().weights(), shift(t.model(), g, as_cylinders(a)),
                                         as_cylinders(b));
}

MeasurableSet set_intersection(const MeasurableSet& a, const MeasurableSet& b) {
    if (a.index() != b.index()) throw BackendMismatch("sets from different backends");
    if (a.index() == 0) return as_points(a) & as_points(b);
    return cylinder_intersection(as_cylinders(a), as_cylinders(b));
}

MeasurableSet set_union(const MeasurableSet& a, const MeasurableSet& b) {
    if (a.index() != b.index()) throw BackendMismatch("sets from different backends");
    if (a.index() == 0) return as_points(a) | as_points(b);
    return cylinder_union(as_cylinders(a), as_cylinders(b));
}

MeasurableSet set_complement(const MeasurableSet& a) {
    if (a.index() == 0) return as_points(a).complement();
    return cylinder_complement(as_cylinders(a));
}

bool same_set(const MeasurableSet& a, const MeasurableSet& b) { return a == b; }

bool ActionReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const RelationCheck& c) { return c.pass; });
}

ActionReport verify_action(const Action& t) {
    ActionReport report;
    const GroupModel& model = t.model();
    const auto& gens = model.positive_generators();
    if (t.backend() == Backend::Permutation) {
        const auto& pa = t.permutation();
        const auto& im = pa.generator_images();
        for (std::size_t i = 0; i < im.size(); ++i) {
            RelationCheck c{"generator " + std::to_string(i + 1) + " is a bijection", is_bijection(im[i], pa.ground_size()), ""};
            report.checks.push_back(c);
        }
        auto commute = [&](const Permutation& a, const Permutation& b, const std::string& name) {
            RelationCheck c{name, true, ""};
            const Permutation ab = compose(a, b);
            const Permutation ba = compose(b, a);
            for (std::size_t x = 0; x < ab.size(); ++x) {
                if (ab[x] != ba[x]) {
                    c.pass = false;
                    c.witness = "point " + std::to_string(x) + ": " + std::to_string(ab[x]) + " vs " + std::to_string(ba[x]);
                    break;
                }
            }
            report.checks.push_back(c);
        };
        if (model.kind() == GroupKind::Zd) {
            for (std::size_t i = 0; i < im.size(); ++i) {
                for (std::size_t j = i + 1; j < im.size(); ++j) {
                    commute(im[i], im[j], "s" + std::to_string(i + 1) + " s" + std::to_string(j + 1) + " = s" +
                                              std::to_string(j + 1) + " s" + std::to_string(i + 1));
                }
            }
        } else {
            const Permutation z = compose(compose(im[0], im[1]), compose(inverse(im[0]), inverse(im[1])));
            commute(z, im[0], "[x,y] commutes with x");
            commute(z, im[1], "[x,y] commutes with y");
        }
        return report;
    }
    // Shift: the group law on a sample family of cylinders.
    const auto& ba = t.bernoulli();
    std::vector<CylinderUnion> samples;
    const auto ball = model.ball_sequence(1);
    samples.push_back(CylinderUnion::coordinate(ba.alphabet(), model.identity(), 0));
    samples.push_back(CylinderUnion::make(ba.alphabet(), {ball[0], ball[1]}, {Pattern{0, 1}, Pattern{1, 0}}));
    std::vector<GroupElement> words = ball;
    for (const auto& g : gens) words.push_back(model.compose(g, g));
    for (std::size_t i = 0; i < words.size(); ++i) {
        for (std::size_t j = 0; j < words.size(); ++j) {
            const auto& g = words[i];
            const auto& h = words[j];
            for (const auto& a : samples) {
                const auto lhs = shift(model, model.compose(g, h), a);
                const auto rhs = shift(model, g, shift(model, h, a));
                if (lhs != rhs) {
                    report.checks.push_back({"shift group law", false, "g=" + to_string(g) + " h=" + to_string(h)});
                    return report;
                }
                if (cylinder_measure(ba.weights(), lhs) != cylinder_measure(ba.weights(), a)) {
                    report.checks.push_back({"shift preserves measure", false, "g=" + to_string(g)});
                    return report;
                }
            }
        }
    }
    report.checks.push_back({"shift group law on sample cylinders", true, ""});
    report.checks.push_back({"shift preserves measure on sample cylinders", true, ""});
    return report;
}

Action product_action(const Action& s, const Action& q) {
    if (s.model() != q.model()) throw ModelMismatch("product of actions of different groups");
    if (s.backend() != q.backend()) throw BackendMismatch("product of actions with different backends");
    if (s.backend() == Backend::Permutation) {
        const auto& ps = s.permutation();
        const auto& pq = q.permutation();
        const std::uint64_t n = std::uint64_t{ps.ground_size()} * pq.ground_size();
        if (n > caps().max_ground_size) throw ResourceLimit("product ground size " + std::to_string(n) + " exceeds cap");
        std::vector<Permutation> images;
        for (std::size_t i = 0; i < ps.generator_images().size(); ++i) {
            const auto& a = ps.generator_images()[i];
            const auto& b = pq.generator_images()[i];
            Permutation p(n);
            for (std::uint32_t x = 0; x < ps.ground_size(); ++x) {
                for (std::uint32_t y = 0; y < pq.ground_size(); ++y) p[x * pq.ground_size() + y] = a[x] * pq.ground_size() + b[y];
            }
            images.push_back(std::move(p));
        }
        return PermutationAction(s.model(), static_cast<std::uint32_t>(n), std::move(images));
    }
    std::vector<Rational> w;
    for (const auto& a : s.bernoulli().weights()) {
        for (const auto& b : q.bernoulli().weights()) w.push_back(a * b);
    }
    return BernoulliAction(s.model(), std::move(w));
}

MeasurableSet product_set(const Action& s, const Action& q, const MeasurableSet& a, const MeasurableSet& b) {
    check_set(s, a);
    check_set(q, b);
    if (s.backend() == Backend::Permutation) {
        const std::uint32_t nq = q.permutation().ground_size();
        PointSet r(s.permutation().ground_size() * nq);
        const auto ys = as_points(b).points();
        for (auto x : as_points(a).points()) {
            for (auto y : ys) r.insert(x * nq + y);
        }
        return r;
    }
    return cylinder_intersection(lift_first(as_cylinders(a), q.bernoulli().alphabet()),
                                 lift_second(as_cylinders(b), s.bernoulli().alphabet()));
}

Action conjugate_action(const Action& t, const Permutation& u) {
    const auto& pt = t.permutation();
    if (!is_bijection(u, pt.ground_size())) throw DomainError("conjugator is not a bijection of the ground set");
    const Permutation uinv = inverse(u);
    std::vector<Permutation> images;
    for (const auto& p : pt.generator_images()) images.push_back(compose(uinv, compose(p, u)));
    return PermutationAction(pt.model(), pt.ground_size(), std::move(images));
}

PointSet preimage(const FactorMap& v, std::uint32_t source_size, const PointSet& a) {
    PointSet r(source_size);
    for (std::uint32_t x = 0; x < source_size; ++x) {
        if (a.contains(v.map[x])) r.insert(x);
    }
    return r;
}

FactorReport factor_check(const FactorMap& v, const Action& t, const Action& s, std::uint64_t radius,
                          const std::vector<PointSet>& test_sets) {
    FactorReport report;
    const auto& pt = t.permutation();
    const auto& ps = s.permutation();
    if (t.model() != s.model()) throw ModelMismatch("factor between actions of different groups");
    if (v.map.size() != pt.ground_size()) throw DomainError("factor map size differs from the source ground set");
    for (auto y : v.map) {
        if (y >= ps.ground_size()) throw DomainError("factor map leaves the target ground set");
    }
    // Fibres of equal size is measure preservation for every target set.
    std::vector<std::uint64_t> fibre(ps.ground_size(), 0);
    for (auto y : v.map) ++fibre[y];
    for (std::uint32_t y = 0; y < ps.ground_size(); ++y) {
        if (fibre[y] * ps.ground_size() != pt.ground_size()) {
            report.measure_preserving = false;
            report.witness = "fibre over " + std::to_string(y) + " has " + std::to_string(fibre[y]) + " points";
            break;
        }
    }
    for (const auto& a : test_sets) {
        const Rational lhs = point_mass(preimage(v, pt.ground_size(), a).count(), pt.ground_size());
        const Rational rhs = point_mass(a.count(), ps.ground_size());
        if (lhs != rhs && report.measure_preserving) {
            report.measure_preserving = false;
            report.witness = "test set of measure " + to_string(rhs) + " pulls back to " + to_string(lhs);
        }
    }
    for (const auto& g : t.model().ball_sequence(radius)) {
        const Permutation tg = pt.element(g);
        const Permutation sg = ps.element(g);
        for (std::uint32_t x = 0; x < pt.ground_size(); ++x) {
            if (v.map[tg[x]] != sg[v.map[x]]) {
                report.equivariant = false;
                if (report.witness.empty()) report.witness = "g=" + to_string(g) + " point " + std::to_string(x);
                return report;
            }
        }
    }
    return report;
}

FreenessReport freeness_report(const Action& t, std::uint64_t radius) {
    const auto& pt = t.permutation();
    FreenessReport report;
    report.radius = radius;
    for (const auto& g : t.model().ball_sequence(radius)) {
        if (g == t.model().identity()) continue;
        const Permutation p = pt.element(g);
        std::size_t fixed = 0;
        for (std::uint32_t x = 0; x < p.size(); ++x) fixed += p[x] == x ? 1 : 0;
        Rational mass = point_mass(fixed, pt.ground_size());
        if (fixed != 0) report.free_at_radius = false;
        report.fixed_mass.emplace_back(g, mass);
    }
    return report;
}

const MeasurableSet& GeneratingFamily::at(std::size_t index) const {
    if (index == 0 || index > sets.size()) throw DomainError("family index " + std::to_string(index) + " out of range");
    return sets[index - 1];
}

Rational GeneratingFamily::tail(std::size_t prefix) const {
    if (complete) {
        if (prefix >= sets.size()) return 0;
        return pow2_inverse(prefix) - pow2_inverse(sets.size());
    }
    return pow2_inverse(prefix);
}

GeneratingFamily default_family(const Action& t, std::size_t count) {
    GeneratingFamily fam;
    if (t.backend() == Backend::Permutation) {
        const std::uint32_t n = t.permutation().ground_size();
        std::uint32_t bits = 0;
        while ((std::uint64_t{1} << bits) < n) ++bits;
        for (std::uint32_t b = 0; b < bits; ++b) {
            PointSet s(n);
            for (std::uint32_t x = 0; x < n; ++x) {
                if ((x >> b) & 1u) s.insert(x);
            }
            fam.sets.push_back(s);
        }
        if (fam.sets.empty()) fam.sets.push_back(PointSet::full(n));
        fam.complete = true;
        return fam;
    }
    const std::uint32_t alphabet = t.bernoulli().alphabet();
    BallOrderStream stream(t.model(), 0);
    while (fam.sets.size() < count) {
        const GroupElement s = *stream.next();
        for (std::uint32_t a = 0; a + 1 < alphabet && fam.sets.size() < count; ++a) {
            fam.sets.push_back(CylinderUnion::coordinate(alphabet, s, a));
        }
    }
    fam.complete = false;
    return fam;
}

Action rotation_action(std::uint32_t n, std::uint32_t step) {
    Permutation p(n);
    for (std::uint32_t x = 0; x < n; ++x) p[x] = static_cast<std::uint32_t>((std::uint64_t{x} + step) % n);
    return PermutationAction(GroupModel::zd(1), n, {p});
}

Action torus_action(const std::vector<std::uint32_t>& sides) {
    if (sides.empty() || sides.size() > 3) throw DomainError("torus actions need 1 to 3 sides");
    std::uint64_t n = 1;
    for (auto s : sides) {
        if (s == 0) throw DomainError("torus side must be positive");
        n *= s;
    }
    if (n > caps().max_ground_size) throw ResourceLimit("torus of " + std::to_string(n) + " points exceeds cap");
    const auto d = sides.size();
    std::vector<Permutation> images(d, Permutation(n));
    for (std::uint64_t idx = 0; idx < n; ++idx) {
        std::vector<std::uint32_t> c(d);
        std::uint64_t rest = idx;
        for (std::size_t i = d; i-- > 0;) {
            c[i] = static_cast<std::uint32_t>(rest % sides[i]);
            rest /= sides[i];
        }
        for (std::size_t k = 0; k < d; ++k) {
            auto moved = c;
            moved[k] = (moved[k] + 1) % sides[k];
            std::uint64_t j = 0;
            for (std::size_t i = 0; i < d; ++i) j = j * sides[i] + moved[i];
            images[k][idx] = static_cast<std::uint32_t>(j);
        }
    }
    return PermutationAction(GroupModel::zd(static_cast<unsigned>(d)), static_cast<std::uint32_t>(n), std::move(images));
}

Action heisenberg_mod_action(std::uint32_t n) {
    if (n < 2) throw DomainError("Heisenberg quotient needs n >= 2");
    const std::uint64_t size = std::uint64_t{n} * n * n;
    if (size > caps().max_ground_size) throw ResourceLimit("Heisenberg quotient too large");
    Permutation x(size), y(size);
    for (std::uint32_t a = 0; a < n; ++a) {
        for (std::uint32_t b = 0; b < n; ++b) {
            for (std::uint32_t c = 0; c < n; ++c) {
                const std::uint32_t idx = (a * n + b) * n + c;
                // (1,0,0)(a,b,c) = (a+1, b, c+b);  (0,1,0)(a,b,c) = (a, b+1, c)
                x[idx] = (((a + 1) % n) * n + b) * n + (c + b) % n;
                y[idx] = (a * n + (b + 1) % n) * n + c;
            }
        }
    }
    return PermutationAction(GroupModel::heisenberg(), static_cast<std::uint32_t>(size), {x, y});
}

}  // namespace leadmetric
