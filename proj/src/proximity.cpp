#include "leadmetric/proximity.hpp"

#include "leadmetric/caps.hpp"
#include "leadmetric/errors.hpp"
#include "leadmetric/kernels.hpp"
#include "leadmetric/metrics.hpp"

#include <algorithm>
#include <exception>
#include <functional>

namespace leadmetric {

namespace {

constexpr const char* kCertificateFormat = "leadmetric-proximity/1";

const std::vector<std::string> kStages = {"parameters", "mixing-T", "tile",   "conjugation", "selection",
                                          "refined-tower",     "special",  "sweep",  "global",      "final"};

Rational from_count(std::uint64_t n) { return Rational(mpz_class(static_cast<unsigned long>(n))); }

Rational truth(bool b) { return b ? 1 : 0; }

std::vector<MeasurableSet> as_sets(const std::vector<PointSet>& sets) { return {sets.begin(), sets.end()}; }

std::vector<PointSet> s_prefix(const ProximityInputs& in, std::size_t m) {
    if (in.s_sets.size() < m) {
        throw DomainError("S has " + std::to_string(in.s_sets.size()) + " sets but r needs " + std::to_string(m));
    }
    return {in.s_sets.begin(), in.s_sets.begin() + static_cast<std::ptrdiff_t>(m)};
}

// Elements whose correlations on `sets` differ from the product by at least
// ε, and whether the scan covered the whole group.
std::pair<FiniteSubset, bool> deviations(const Action& t, const std::vector<MeasurableSet>& sets, const Rational& epsilon,
                                         std::optional<std::uint64_t> horizon) {
    std::vector<GroupElement> elements;
    CorrelationTable table;
    bool exhaustive = false;
    if (t.backend() == Backend::Bernoulli) {
        auto sweep = correlation_sweep(t, t, sets);
        elements = sweep.elements;
        table = std::move(sweep.t);
        exhaustive = true;
    } else {
        if (!horizon) throw DomainError("a permutation-backend T needs a declared horizon");
        elements = t.model().ball_sequence(*horizon);
        table = correlation_table_parallel(t, elements, sets);
    }
    std::vector<Rational> mu;
    for (const auto& a : sets) mu.push_back(measure(t, a));
    std::vector<GroupElement> bad;
    for (std::size_t k = 0; k < elements.size(); ++k) {
        bool deviates = false;
        for (std::size_t a = 0; a < sets.size() && !deviates; ++a) {
            for (std::size_t b = 0; b < sets.size() && !deviates; ++b) {
                deviates = abs(table.at(k, a, b) - mu[a] * mu[b]) >= epsilon;
            }
        }
        if (deviates) bad.push_back(elements[k]);
    }
    return {FiniteSubset(std::move(bad)), exhaustive};
}

Rational max_defect(const GroupModel& model, const FiniteSubset& elements, const FiniteSubset& f) {
    Rational worst = 0;
    for (const auto& h : elements) worst = max(worst, invariance_defect(model, h, f));
    return worst;
}

// max over g in F and pairs of |μ(T^g A ∩ B) − μ(S^g A' ∩ B')|
Rational conjugation_gap(const Action& t, const std::vector<MeasurableSet>& t_sets, const Action& s,
                         const std::vector<MeasurableSet>& s_sets, const FiniteSubset& f, std::string* where) {
    Rational worst = -1;
    for (const auto& g : f) {
        for (std::size_t a = 0; a < t_sets.size(); ++a) {
            for (std::size_t b = 0; b < t_sets.size(); ++b) {
                const Rational d = abs(correlation(t, g, t_sets[a], t_sets[b]) - correlation(s, g, s_sets[a], s_sets[b]));
                if (d > worst) {
                    worst = d;
                    if (where) *where = "g=" + to_string(g) + " A_" + std::to_string(a + 1) + " B_" + std::to_string(b + 1);
                }
            }
        }
    }
    return worst < 0 ? Rational(0) : worst;
}

RokhlinTower tower_from_base(const Action& q, const FiniteSubset& g, const PointSet& base, const Rational& epsilon) {
    RokhlinTower tower;
    tower.base = base;
    tower.tile = g;
    tower.epsilon = epsilon;
    PointSet covered(base.ground_size());
    for (const auto& x : g) {
        tower.levels.push_back(std::get<PointSet>(act(q, x, MeasurableSet(base))));
        covered = covered | tower.levels.back();
    }
    tower.remainder = covered.complement();
    tower.reached = tower.remainder_mass() <= epsilon;
    return tower;
}

std::uint64_t sweep_radius_for(const GroupModel& model, const ElementSelection& selection, const FiniteSubset& g,
                               std::uint64_t margin) {
    const Integer diam = diameter(model, g);
    return selection.c_radius + 2 * selection.max_f + diam.convert_to<std::uint64_t>() + margin;
}

class Recorder {
public:
    explicit Recorder(std::vector<InequalityRecord>& out) : out_(out) {}
    void stage(std::string name) { stage_ = std::move(name); }
    void add(std::string name, Rational lhs, std::string relation, Rational rhs, std::string note = {}) {
        InequalityRecord r{stage_, std::move(name), std::move(lhs), std::move(relation), std::move(rhs), false,
                           std::move(note)};
        r.holds = relation_holds(r.lhs, r.relation, r.rhs);
        out_.push_back(std::move(r));
    }
    void check(std::string name, bool ok, std::string note = {}) {
        add(std::move(name), truth(ok), "==", 1, ok ? std::string{} : std::move(note));
    }
    void error(const std::string& what) { add("stage could not be evaluated", 0, "==", 1, what); }

private:
    std::vector<InequalityRecord>& out_;
    std::string stage_;
};

std::string strategy_name(RefineStrategy s) { return s == RefineStrategy::Minimal ? "minimal" : "proof-thresholds"; }

RefineStrategy parse_strategy(const JsonReader& r) {
    const std::string s = r.string();
    if (s == "minimal") return RefineStrategy::Minimal;
    if (s == "proof-thresholds") return RefineStrategy::ProofThresholds;
    r.fail("unknown strategy \"" + s + "\"");
}

Json encode_optional_u64(const std::optional<std::uint64_t>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<std::uint64_t> decode_optional_u64(const JsonReader& r) {
    if (r.value().is_null()) return std::nullopt;
    return r.uint();
}

Json encode_u64s(const std::vector<std::uint64_t>& v) { return Json(v); }

std::vector<std::uint64_t> decode_u64s(const JsonReader& r) {
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < r.size(); ++i) out.push_back(r.at(i).uint());
    return out;
}

}  // namespace

bool relation_holds(const Rational& lhs, const std::string& relation, const Rational& rhs) {
    if (relation == "<") return lhs < rhs;
    if (relation == "<=") return lhs <= rhs;
    if (relation == "==") return lhs == rhs;
    throw DomainError("unknown relation \"" + relation + "\"");
}

bool ProximityEvaluation::passed() const { return !records.empty() && first_failure() == nullptr; }

const InequalityRecord* ProximityEvaluation::first_failure() const {
    for (const auto& r : records) {
        if (!r.holds) return &r;
    }
    return nullptr;
}

std::string ProximityCertificate::failed_stage() const {
    const auto* f = evaluation.first_failure();
    return f ? f->stage : std::string{};
}

ProximityEvaluation evaluate(const ProximityPack& pack) {
    ProximityEvaluation ev;
    Recorder rec(ev.records);
    const ProximityInputs& in = pack.inputs;
    const GroupModel& model = in.t.model();
    const Rational six_eps = 6 * pack.epsilon;

    // State shared by the later stages.
    std::vector<MeasurableSet> r_t, r_s;
    std::vector<PointSet> r_points;
    Rational head_weight2 = 0, tail = 0;
    std::optional<Action> s_conj;
    Tile tile;
    RokhlinTower tower;
    std::optional<SpecialActionParams> params;
    std::optional<SpecialAction> special;

    using Stage = std::function<bool()>;
    const std::vector<std::pair<std::string, Stage>> stages = {
        {"parameters",
         [&] {
             tail = pair_tail(in.t_family, pack.prefix);
             if (pack.trivial()) {
                 rec.add("w <= pair_tail(0) < delta (vacuous)", tail, "<", in.delta);
                 ev.w_upper = tail;
                 return false;
             }
             if (in.s.model() != model || in.q.model() != model) throw ModelMismatch("T, S and Q act by different groups");
             if (pack.prefix > in.t_family.size()) throw DomainError("family has fewer than M sets");
             const Rational head = family_weight(in.t_family, pack.prefix);
             head_weight2 = head * head;
             r_t = family_prefix(in.t_family, pack.prefix);
             r_points = s_prefix(in, r_t.size());
             r_s = as_sets(r_points);
             rec.add("pair_tail(M) < delta", tail, "<", in.delta);
             rec.add("M minimal: delta <= pair_tail(M-1)", in.delta, "<=", pair_tail(in.t_family, pack.prefix - 1));
             rec.add("eps > 0", 0, "<", pack.epsilon);
             rec.add("6 eps W_M^2 + pair_tail(M) < delta", six_eps * head_weight2 + tail, "<", in.delta);
             return true;
         }},
        {"mixing-T",
         [&] {
             const auto [bad, exhaustive] = deviations(in.t, r_t, pack.epsilon, pack.config.t_horizon);
             rec.check("e in H_T", pack.h_t.contains(model.identity()));
             const FiniteSubset outside = set_difference(bad, pack.h_t);
             rec.add("deviating elements outside H_T", from_count(outside.size()), "==", 0,
                     exhaustive ? std::string{} : "scan limited to the declared horizon");
             return true;
         }},
        {"tile",
         [&] {
             if (!model.is_abelian()) throw DomainError("the tile stage needs Z^d");
             tile = box_tile(model, pack.tile_sides);
             rec.add("max defect of F on H_T < eps", max_defect(model, pack.h_t, tile.shape), "<", pack.epsilon);
             const std::uint64_t side = pack.tile_sides.empty() ? 0 : pack.tile_sides.front();
             const bool cube = std::all_of(pack.tile_sides.begin(), pack.tile_sides.end(),
                                           [side](std::uint64_t s) { return s == side; });
             rec.check("F is a cube", cube && side >= 1);
             if (side > 1) {
                 const Tile smaller = box_tile(model, std::vector<std::uint64_t>(pack.tile_sides.size(), side - 1));
                 rec.add("side minimal: eps <= defect of the smaller cube", pack.epsilon, "<=",
                         max_defect(model, pack.h_t, smaller.shape));
             }
             return true;
         }},
        {"conjugation",
         [&] {
             const std::uint32_t nx = in.s.permutation().ground_size();
             rec.check("U is a bijection of S's space", is_bijection(pack.u, nx));
             if (!is_bijection(pack.u, nx)) return false;
             s_conj = conjugate_action(in.s, pack.u);
             std::string where;
             const Rational gap = conjugation_gap(in.t, r_t, *s_conj, r_s, tile.shape, &where);
             rec.add("max over F of |T - U^-1 S U| < eps/2", gap, "<", pack.epsilon / 2, where);
             return true;
         }},
        {"selection",
         [&] {
             const SelectionOptions opts{pack.config.selection_budget, pack.config.s_mixing_radius};
             const ElementSelection fresh = select_elements(*s_conj, tile.shape, r_s, pack.epsilon, 0, opts);
             const ElementSelection& sel = pack.selection;
             rec.add("factorization radius N0", from_count(sel.factor_radius), "==", from_count(fresh.factor_radius));
             rec.add("max |f|", from_count(sel.max_f), "==", from_count(fresh.max_f));
             rec.add("radius of C", from_count(sel.c_radius), "==", from_count(fresh.c_radius));
             rec.check("H matches F^-1 ball(N0) F", sel.h == fresh.h);
             rec.check("epsilon matches", sel.epsilon == pack.epsilon);
             const SeparationCheck sep = check_separation(model, sel);
             rec.check("g_n separated by the envelopes", sep.ok, sep.failure);
             rec.add("prefix covers the centers", from_count(pack.refined.centers.size()), "<=",
                     from_count(sel.elements.size()));
             const ExceptionReport report = count_exceptions(*s_conj, tile.shape, r_s, sel);
             rec.add("exceptional pairs (i != j)", from_count(report.max_pairs), "<=", 2,
                     report.pair_witness ? "g=" + to_string(*report.pair_witness) : std::string{});
             rec.add("exceptional diagonal indices outside C", from_count(report.max_diagonal_outside_c), "<=", 1,
                     report.diagonal_witness ? "g=" + to_string(*report.diagonal_witness) : std::string{});
             return true;
         }},
        {"refined-tower",
         [&] {
             const FiniteSubset c = model.ball(pack.selection.c_radius);
             const RefineConditions cond = check_refined(c, pack.epsilon, tile, pack.refined);
             rec.check("G is the disjoint union of F c_i", cond.disjoint_union, cond.failure);
             rec.add("max defect of G on C < eps", max_defect(model, c, pack.refined.set), "<", pack.epsilon);
             const Rational nf = from_count(tile.shape.size());
             rec.add("3 (#F)^2 / #G < eps", 3 * nf * nf / from_count(std::max<std::size_t>(pack.refined.set.size(), 1)),
                     "<", pack.epsilon);
             if (pack.tower_base.ground_size() != in.q.permutation().ground_size()) {
                 throw DomainError("tower base is not on Q's space");
             }
             tower = tower_from_base(in.q, pack.refined.set, pack.tower_base, pack.epsilon);
             const TowerCheck tc = check_tower(in.q, tower);
             rec.check("tower levels pairwise disjoint", tc.disjoint, tc.failure);
             rec.check("tower levels of equal mass", tc.equal_mass, tc.failure);
             rec.add("remainder mass <= eps", tower.remainder_mass(), "<=", pack.epsilon);
             return cond.disjoint_union && tc.disjoint;
         }},
        {"special",
         [&] {
             const std::size_t n = pack.refined.centers.size();
             if (pack.selection.elements.size() < n) throw DomainError("fewer elements g_i than centers");
             params = SpecialActionParams{*s_conj,
                                          in.q,
                                          r_points,
                                          tile.shape,
                                          pack.refined.centers,
                                          {pack.selection.elements.begin(), pack.selection.elements.begin() + static_cast<std::ptrdiff_t>(n)},
                                          tower,
                                          std::nullopt};
             special = build_special_action(*params);
             ev.z_ground_size = special->z.permutation().ground_size();
             rec.check("Z satisfies the group relations", verify_action(special->z).ok());
             bool lifted = true;
             for (std::size_t i = 0; i < r_points.size(); ++i) {
                 lifted = lifted && special->r_z[i].image(special->v).count() == r_points[i].count() *
                                                                                       in.q.permutation().ground_size();
             }
             rec.check("V maps each set onto A x Y", lifted);
             return true;
         }},
        {"sweep",
         [&] {
             const std::uint64_t want = sweep_radius_for(model, pack.selection, pack.refined.set, pack.config.sweep_margin);
             rec.add("sweep radius = radius(C) + 2 max|f| + diam(G) + margin", from_count(pack.sweep_radius), "==",
                     from_count(want));
             const auto elements = model.ball_sequence(pack.sweep_radius);
             const std::size_t m = r_t.size();
             std::vector<MixtureDecomposition> results(elements.size() * m * m);
             std::vector<std::exception_ptr> errors(elements.size());
             const auto total = static_cast<std::ptrdiff_t>(elements.size());
#pragma omp parallel for schedule(dynamic)
             for (std::ptrdiff_t k = 0; k < total; ++k) {
                 try {
                     for (std::size_t a = 0; a < m; ++a) {
                         for (std::size_t b = 0; b < m; ++b) {
                             results[(k * m + a) * m + b] = mixture_decomposition(
                                 in.t, r_t, *params, *special, elements[k], a, b, pack.h_t, pack.selection.c_radius, pack.epsilon);
                         }
                     }
                 } catch (...) {
                     errors[k] = std::current_exception();
                 }
             }
             for (const auto& e : errors) {
                 if (e) std::rethrow_exception(e);
             }
             ev.cases = {{ProofCase::InH, 0, 0, pack.epsilon, true},
                         {ProofCase::InCOutsideH, 0, 0, 2 * pack.epsilon, true},
                         {ProofCase::OutsideC, 0, 0, pack.epsilon, true}};
             std::string where;
             for (std::size_t k = 0; k < elements.size(); ++k) {
                 Rational bad = 0;
                 ProofCase pc = ProofCase::InH;
                 for (std::size_t a = 0; a < m; ++a) {
                     for (std::size_t b = 0; b < m; ++b) {
                         const MixtureDecomposition& g = results[(k * m + a) * m + b];
                         rec.add("mixture g=" + to_string(elements[k]) + " A_" + std::to_string(a + 1) + " B_" +
                                     std::to_string(b + 1) + ": LHS <= RHS",
                                 g.lhs, "<=", g.rhs);
                         if (g.lhs > ev.sweep_sup || where.empty()) {
                             ev.sweep_sup = max(ev.sweep_sup, g.lhs);
                             where = "g=" + to_string(elements[k]);
                         }
                         bad = max(bad, g.bad_mass);
                         pc = g.proof_case;
                     }
                 }
                 auto& acc = ev.cases[static_cast<std::size_t>(pc)];
                 ++acc.elements;
                 acc.max_bad_mass = max(acc.max_bad_mass, bad);
                 acc.within = acc.max_bad_mass <= acc.bound;
             }
             rec.add("swept sup |T - Z| <= 6 eps", ev.sweep_sup, "<=", six_eps, where);
             return true;
         }},
        {"global",
         [&] {
             const std::size_t m = r_t.size();
             const Action& z = special->z;
             const std::vector<MeasurableSet> r_z = as_sets(special->r_z);
             Rational sup = 0;
             std::string method;
             if (in.t.backend() == Backend::Bernoulli) {
                 const auto sweep = correlation_sweep(in.t, in.t, r_t);
                 const auto zt = correlation_table_parallel(z, sweep.elements, r_z);
                 for (std::size_t k = 0; k < sweep.elements.size(); ++k) {
                     for (std::size_t ab = 0; ab < m * m; ++ab) {
                         sup = max(sup, abs(sweep.t.at(k, ab / m, ab % m) - zt.at(k, ab / m, ab % m)));
                     }
                 }
                 const auto reps = image_representatives({z});
                 if (!reps) throw ResourceLimit("image closure of Z exceeds the cap");
                 const auto zr = correlation_table_parallel(z, *reps, r_z);
                 for (std::size_t k = 0; k < reps->size(); ++k) {
                     for (std::size_t ab = 0; ab < m * m; ++ab) {
                         sup = max(sup, abs(sweep.beyond_t[ab] - zr.at(k, ab / m, ab % m)));
                     }
                 }
                 method = "T interactions (" + std::to_string(sweep.elements.size()) + ") and Z image classes (" +
                          std::to_string(reps->size()) + ")";
             } else {
                 const auto reps = image_representatives({in.t, z});
                 if (!reps) throw ResourceLimit("joint image closure of T and Z exceeds the cap");
                 const auto tt = correlation_table_parallel(in.t, *reps, r_t);
                 const auto zt = correlation_table_parallel(z, *reps, r_z);
                 for (std::size_t k = 0; k < reps->size(); ++k) {
                     for (std::size_t ab = 0; ab < m * m; ++ab) {
                         sup = max(sup, abs(tt.at(k, ab / m, ab % m) - zt.at(k, ab / m, ab % m)));
                     }
                 }
                 method = "joint image classes (" + std::to_string(reps->size()) + ")";
             }
             ev.global_sup = sup;
             rec.add("sup over the group of |T - Z| <= 6 eps", sup, "<=", six_eps, method);
             return true;
         }},
        {"final",
         [&] {
             ev.w_upper = ev.global_sup * head_weight2 + tail;
             rec.add("w(T, Z) <= sup W_M^2 + pair_tail(M) < delta", ev.w_upper, "<", in.delta);
             return true;
         }},
    };

    for (const auto& [name, run] : stages) {
        rec.stage(name);
        if (pack.search_stage == name) {
            rec.add("search", 0, "==", 1, pack.search_failure);
            break;
        }
        try {
            if (!run()) break;
        } catch (const Error& e) {
            rec.error(e.what());
            break;
        }
    }
    if (!pack.search_stage.empty() &&
        std::find(kStages.begin(), kStages.end(), pack.search_stage) == kStages.end()) {
        rec.stage(pack.search_stage);
        rec.add("search", 0, "==", 1, pack.search_failure);
    }
    return ev;
}

ProximityCertificate certify_proximity(const ProximityInputs& inputs, const ProximityConfig& config) {
    ProximityPack pack(inputs, config);
    const GroupModel& model = inputs.t.model();
    auto finish = [&pack]() { return ProximityCertificate{pack, evaluate(pack)}; };
    auto give_up = [&](const std::string& stage, const std::string& why) {
        pack.search_stage = stage;
        pack.search_failure = why;
        return finish();
    };

    // parameters
    const std::size_t limit = inputs.t_family.size();
    std::size_t m = 0;
    while (m <= limit && !(pair_tail(inputs.t_family, m) < inputs.delta)) ++m;
    if (m > limit) return give_up("parameters", "no prefix of the family has pair tail below delta");
    pack.prefix = m;
    if (m == 0) return finish();
    if (inputs.s_sets.size() < m) return give_up("parameters", "S provides fewer than M sets");
    const Rational head = family_weight(inputs.t_family, m);
    pack.epsilon = (inputs.delta - pair_tail(inputs.t_family, m)) / (12 * head * head);
    if (config.epsilon && *config.epsilon < pack.epsilon) pack.epsilon = *config.epsilon;
    const auto r_t = family_prefix(inputs.t_family, m);
    const auto r_points = s_prefix(inputs, m);
    const auto r_s = as_sets(r_points);

    try {
        // mixing-T
        pack.h_t = set_union(deviations(inputs.t, r_t, pack.epsilon, config.t_horizon).first,
                             FiniteSubset{model.identity()});

        // tile
        if (!model.is_abelian()) return give_up("tile", "the tile stage needs Z^d");
        bool found = false;
        for (std::uint64_t side = 1; side <= config.max_tile_side && !found; ++side) {
            const Tile cube = box_tile(model, std::vector<std::uint64_t>(model.coordinates(), side));
            if (max_defect(model, pack.h_t, cube.shape) < pack.epsilon) {
                pack.tile_sides = cube.sides;
                found = true;
            }
        }
        if (!found) return give_up("tile", "no cube up to the side cap has defect below eps on H_T");
        const Tile tile = box_tile(model, pack.tile_sides);

        // conjugation: identity first, then transpositions in lexicographic order
        const std::uint32_t nx = inputs.s.permutation().ground_size();
        const Rational half = pack.epsilon / 2;
        auto fits = [&](const Permutation& u) {
            return conjugation_gap(inputs.t, r_t, conjugate_action(inputs.s, u), r_s, tile.shape, nullptr) < half;
        };
        Permutation u = identity_permutation(nx);
        found = fits(u);
        std::uint64_t tried = 0;
        for (std::uint32_t x = 0; x < nx && !found && tried < config.conjugator_budget; ++x) {
            for (std::uint32_t y = x + 1; y < nx && !found && tried < config.conjugator_budget; ++y, ++tried) {
                std::swap(u[x], u[y]);
                found = fits(u);
                if (!found) std::swap(u[x], u[y]);
            }
        }
        if (!found) return give_up("conjugation", "no conjugator within budget brings S within eps/2 of T on F");
        pack.u = u;
        const Action s_conj = conjugate_action(inputs.s, u);

        // selection (radius of C), refined tower, selection (full prefix)
        const SelectionOptions opts{config.selection_budget, config.s_mixing_radius};
        pack.selection = select_elements(s_conj, tile.shape, r_s, pack.epsilon, 0, opts);
        try {
            pack.refined = refine_tile(model.ball(pack.selection.c_radius), pack.epsilon, tile, config.strategy);
        } catch (const Error& e) {
            return give_up("refined-tower", e.what());
        }
        const RokhlinTower tower = build_tower(inputs.q, pack.refined.set, pack.epsilon);
        pack.tower_base = tower.base;
        pack.selection = select_elements(s_conj, tile.shape, r_s, pack.epsilon, pack.refined.centers.size(), opts);
        if (!pack.selection.complete) return give_up("selection", "element search ran out of budget");
        pack.sweep_radius = sweep_radius_for(model, pack.selection, pack.refined.set, config.sweep_margin);
    } catch (const Error& e) {
        // The failing stage is re-detected by the evaluation of the partial pack.
        return give_up("search", e.what());
    }
    return finish();
}

Json encode(const InequalityRecord& r) {
    Json out{{"stage", r.stage}, {"name", r.name}, {"lhs", encode(r.lhs)}, {"relation", r.relation},
             {"rhs", encode(r.rhs)}, {"holds", r.holds}};
    if (!r.note.empty()) out["note"] = r.note;
    return out;
}

InequalityRecord decode_record(const JsonReader& r) {
    r.only_keys({"stage", "name", "lhs", "relation", "rhs", "holds", "note"});
    InequalityRecord out;
    out.stage = r.field("stage").string();
    out.name = r.field("name").string();
    out.lhs = r.field("lhs").rational();
    out.relation = r.field("relation").string();
    out.rhs = r.field("rhs").rational();
    out.holds = r.field("holds").boolean();
    if (r.has("note")) out.note = r.field("note").string();
    return out;
}

Json encode(const ProximityPack& p) {
    const ProximityInputs& in = p.inputs;
    Json s_sets = Json::array();
    for (const auto& a : in.s_sets) s_sets.push_back(encode(a));
    Json inputs{{"t", encode(in.t)}, {"t_family", encode(in.t_family)}, {"s", encode(in.s)},
                {"s_sets", s_sets},  {"q", encode(in.q)},                {"delta", encode(in.delta)}};
    const ProximityConfig& c = p.config;
    Json config{{"conjugator_budget", c.conjugator_budget},
                {"selection_budget", c.selection_budget},
                {"s_mixing_radius", c.s_mixing_radius},
                {"t_horizon", encode_optional_u64(c.t_horizon)},
                {"sweep_margin", c.sweep_margin},
                {"max_tile_side", c.max_tile_side},
                {"strategy", strategy_name(c.strategy)},
                {"epsilon", c.epsilon ? encode(*c.epsilon) : Json(nullptr)}};
    Json radii = Json::array();
    for (const auto& x : p.selection.envelope_radii) radii.push_back(encode_integer(x));
    Json elements = Json::array();
    for (const auto& g : p.selection.elements) elements.push_back(encode(g));
    Json selection{{"epsilon", encode(p.selection.epsilon)},
               {"factor_radius", p.selection.factor_radius},
               {"max_f", p.selection.max_f},
               {"c_radius", p.selection.c_radius},
               {"h", encode(p.selection.h)},
               {"elements", elements},
               {"envelope_radii", radii},
               {"complete", p.selection.complete},
               {"mixing_certified", p.selection.mixing_certified},
               {"mixing_radius", encode_optional_u64(p.selection.mixing_radius)}};
    Json construction{{"prefix", p.prefix},
                      {"epsilon", encode(p.epsilon)},
                      {"h_t", encode(p.h_t)},
                      {"tile_sides", encode_u64s(p.tile_sides)},
                      {"u", encode_permutation(p.u)},
                      {"selection", selection},
                      {"refined",
                       {{"set", encode(p.refined.set)},
                        {"centers", encode(p.refined.centers)},
                        {"multiplicities", encode_u64s(p.refined.multiplicities)}}},
                      {"tower_base", p.tower_base.ground_size() ? encode(p.tower_base) : Json(nullptr)},
                      {"sweep_radius", p.sweep_radius}};
    return Json{{"inputs", inputs},
                {"config", config},
                {"construction", construction},
                {"search", {{"stage", p.search_stage}, {"failure", p.search_failure}}}};
}

ProximityPack decode_pack(const JsonReader& r) {
    r.only_keys({"inputs", "config", "construction", "search"});
    const auto in = r.field("inputs");
    in.only_keys({"t", "t_family", "s", "s_sets", "q", "delta"});
    Action t = decode_action(in.field("t"));
    const GroupModel model = t.model();
    GeneratingFamily family = decode_family(model, in.field("t_family"));
    Action s = decode_action(in.field("s"));
    std::vector<PointSet> s_sets;
    const auto ss = in.field("s_sets");
    for (std::size_t i = 0; i < ss.size(); ++i) {
        ss.at(i).only_keys({"ground", "points"});
        s_sets.push_back(decode_pointset(ss.at(i)));
    }
    Action q = decode_action(in.field("q"));
    ProximityPack p(ProximityInputs{t, family, s, s_sets, q, in.field("delta").rational()});

    const auto c = r.field("config");
    c.only_keys({"conjugator_budget", "selection_budget", "s_mixing_radius", "t_horizon", "sweep_margin", "max_tile_side",
                 "strategy", "epsilon"});
    p.config.conjugator_budget = c.field("conjugator_budget").uint();
    p.config.selection_budget = c.field("selection_budget").uint();
    p.config.s_mixing_radius = c.field("s_mixing_radius").uint();
    p.config.t_horizon = decode_optional_u64(c.field("t_horizon"));
    p.config.sweep_margin = c.field("sweep_margin").uint();
    p.config.max_tile_side = c.field("max_tile_side").uint();
    p.config.strategy = parse_strategy(c.field("strategy"));
    if (!c.field("epsilon").value().is_null()) p.config.epsilon = c.field("epsilon").rational();

    const auto k = r.field("construction");
    k.only_keys({"prefix", "epsilon", "h_t", "tile_sides", "u", "selection", "refined", "tower_base", "sweep_radius"});
    p.prefix = k.field("prefix").uint();
    p.epsilon = k.field("epsilon").rational();
    p.h_t = decode_subset(model, k.field("h_t"));
    p.tile_sides = decode_u64s(k.field("tile_sides"));
    p.u = decode_permutation(k.field("u"));
    const auto cl = k.field("selection");
    cl.only_keys({"epsilon", "factor_radius", "max_f", "c_radius", "h", "elements", "envelope_radii", "complete",
                  "mixing_certified", "mixing_radius"});
    p.selection.epsilon = cl.field("epsilon").rational();
    p.selection.factor_radius = cl.field("factor_radius").uint();
    p.selection.max_f = cl.field("max_f").uint();
    p.selection.c_radius = cl.field("c_radius").uint();
    p.selection.h = decode_subset(model, cl.field("h"));
    const auto els = cl.field("elements");
    for (std::size_t i = 0; i < els.size(); ++i) p.selection.elements.push_back(decode_element(model, els.at(i)));
    const auto radii = cl.field("envelope_radii");
    for (std::size_t i = 0; i < radii.size(); ++i) p.selection.envelope_radii.push_back(radii.at(i).integer());
    p.selection.complete = cl.field("complete").boolean();
    p.selection.mixing_certified = cl.field("mixing_certified").boolean();
    p.selection.mixing_radius = decode_optional_u64(cl.field("mixing_radius"));
    const auto rf = k.field("refined");
    rf.only_keys({"set", "centers", "multiplicities"});
    p.refined.set = decode_subset(model, rf.field("set"));
    p.refined.centers = decode_subset(model, rf.field("centers"));
    p.refined.multiplicities = decode_u64s(rf.field("multiplicities"));
    if (!k.field("tower_base").value().is_null()) {
        k.field("tower_base").only_keys({"ground", "points"});
        p.tower_base = decode_pointset(k.field("tower_base"));
    }
    p.sweep_radius = k.field("sweep_radius").uint();
    const auto se = r.field("search");
    se.only_keys({"stage", "failure"});
    p.search_stage = se.field("stage").string();
    p.search_failure = se.field("failure").string();
    return p;
}

Json encode(const ProximityCertificate& cert) {
    const auto& ev = cert.evaluation;
    Json records = Json::array();
    for (const auto& r : ev.records) records.push_back(encode(r));
    Json cases = Json::array();
    for (const auto& c : ev.cases) {
        cases.push_back({{"case", case_name(c.proof_case)},
                         {"elements", c.elements},
                         {"max_bad_mass", encode(c.max_bad_mass)},
                         {"bound", encode(c.bound)},
                         {"within", c.within}});
    }
    const auto* fail = ev.first_failure();
    Json summary{{"passed", cert.passed()},
                 {"failed_stage", cert.failed_stage()},
                 {"first_failure", fail ? encode(*fail) : Json(nullptr)},
                 {"epsilon", encode(cert.pack.epsilon)},
                 {"six_epsilon", encode(6 * cert.pack.epsilon)},
                 {"sweep_sup", encode(ev.sweep_sup)},
                 {"global_sup", encode(ev.global_sup)},
                 {"w_upper", encode(ev.w_upper)},
                 {"delta", encode(cert.pack.inputs.delta)},
                 {"z_ground_size", ev.z_ground_size}};
    return Json{{"format", kCertificateFormat},
                {"pack", encode(cert.pack)},
                {"records", records},
                {"advisory", {{"bad_mass_by_case", cases}}},
                {"summary", summary}};
}

ReplayResult replay(const Json& certificate) {
    const JsonReader root(certificate, "");
    const std::string format = root.field("format").string();
    if (format != kCertificateFormat) root.field("format").fail("unsupported format \"" + format + "\"");
    const ProximityPack pack = decode_pack(root.field("pack"));
    std::vector<InequalityRecord> stored;
    const auto recs = root.field("records");
    for (std::size_t i = 0; i < recs.size(); ++i) stored.push_back(decode_record(recs.at(i)));

    ReplayResult out;
    out.stored_verdict = root.field("summary").field("passed").boolean();
    const ProximityEvaluation ev = evaluate(pack);
    out.checked = ev.records.size();
    if (const auto* f = ev.first_failure()) out.first_failure = *f;
    const std::size_t common = std::min(stored.size(), ev.records.size());
    for (std::size_t i = 0; i < common && out.mismatch.empty(); ++i) {
        if (!(stored[i] == ev.records[i])) {
            out.mismatch = "record " + std::to_string(i) + " (" + ev.records[i].stage + ": " + ev.records[i].name +
                           ") stored " + to_string(stored[i].lhs) + " " + stored[i].relation + " " +
                           to_string(stored[i].rhs) + ", recomputed " + to_string(ev.records[i].lhs) + " " +
                           ev.records[i].relation + " " + to_string(ev.records[i].rhs);
        }
    }
    if (out.mismatch.empty() && stored.size() != ev.records.size()) {
        out.mismatch = "stored " + std::to_string(stored.size()) + " records, recomputed " +
                       std::to_string(ev.records.size());
    }
    out.verdict = ev.passed() && out.mismatch.empty() && out.stored_verdict;
    return out;
}

ProximityInputs desk_inputs(const Rational& delta) {
    const GroupModel z = GroupModel::zd(1);
    Action t = BernoulliAction(z, {ratio(1, 2), ratio(1, 2)});
    GeneratingFamily family = default_family(t, 4);
    const std::uint32_t p = 43;
    std::vector<std::uint32_t> residues;
    for (std::uint32_t x = 1; x < p; ++x) residues.push_back(x * x % p);
    std::sort(residues.begin(), residues.end());
    residues.erase(std::unique(residues.begin(), residues.end()), residues.end());
    return ProximityInputs{t, family, rotation_action(p), {PointSet::from_points(p, residues)}, rotation_action(64),
                          delta};
}

}  // namespace leadmetric
