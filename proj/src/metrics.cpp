#include "leadmetric/metrics.hpp"

#include "leadmetric/caps.hpp"
#include "leadmetric/errors.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace leadmetric {

namespace {

std::uint64_t length_of(const GroupModel& m, const GroupElement& g) { return m.word_length(g).convert_to<std::uint64_t>(); }

void sort_ball_order(const GroupModel& m, std::vector<GroupElement>& v) {
    std::vector<std::pair<std::uint64_t, GroupElement>> keyed;
    keyed.reserve(v.size());
    for (auto& g : v) keyed.emplace_back(length_of(m, g), std::move(g));
    std::sort(keyed.begin(), keyed.end());
    keyed.erase(std::unique(keyed.begin(), keyed.end()), keyed.end());
    v.clear();
    for (auto& [len, g] : keyed) v.push_back(std::move(g));
}

void check_comparable(const Action& t, const Action& s) {
    if (t.model() != s.model()) throw ModelMismatch("actions of different groups");
    if (t.backend() != s.backend()) throw BackendMismatch("actions use different backends");
    if (t.backend() == Backend::Permutation && t.permutation().ground_size() != s.permutation().ground_size()) {
        throw BackendMismatch("permutation actions on different ground sets");
    }
    if (t.backend() == Backend::Bernoulli && t.bernoulli().alphabet() != s.bernoulli().alphabet()) {
        throw BackendMismatch("Bernoulli actions over different alphabets");
    }
}

// Elements g for which T^g A_i meets A_j on some coordinate: g = t^{-1} s with
// s in supp A_i and t in supp A_j. The identity is always included.
std::vector<GroupElement> interacting_elements(const GroupModel& m, const std::vector<MeasurableSet>& sets) {
    std::vector<GroupElement> out{m.identity()};
    for (const auto& a : sets) {
        for (const auto& b : sets) {
            for (const auto& s : std::get<CylinderUnion>(a).support()) {
                for (const auto& t : std::get<CylinderUnion>(b).support()) out.push_back(m.compose(m.invert(t), s));
            }
        }
    }
    sort_ball_order(m, out);
    return out;
}

std::vector<Rational> product_values(const Action& t, const std::vector<MeasurableSet>& sets) {
    std::vector<Rational> mu;
    for (const auto& a : sets) mu.push_back(measure(t, a));
    std::vector<Rational> out;
    out.reserve(sets.size() * sets.size());
    for (const auto& x : mu) {
        for (const auto& y : mu) out.push_back(x * y);
    }
    return out;
}

// sum_{i,j} 2^{-i-j} |x_ij − y_ij| over an M×M block (indices base 1).
Rational weighted_gap(const Rational* x, const Rational* y, std::size_t m) {
    Rational total = 0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) total += pow2_inverse(i + j + 2) * abs(x[i * m + j] - y[i * m + j]);
    }
    return total;
}

const Rational* block(const CorrelationTable& table, std::size_t k) {
    return table.values.data() + k * table.sets * table.sets;
}

std::vector<MeasurableSet> sets_at(const GeneratingFamily& family, const std::vector<std::size_t>& q) {
    if (q.empty()) throw DomainError("index set q must be nonempty");
    std::vector<MeasurableSet> out;
    for (auto i : q) out.push_back(family.at(i));
    return out;
}

GroupElement element_beyond(const GroupModel& m, std::uint64_t horizon) {
    BallOrderStream stream(m, Integer(horizon + 1));
    return *stream.next();
}

struct VectorHash {
    std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (auto x : v) h = (h ^ x) * 1099511628211ull;
        return h;
    }
};

}  // namespace

MetricInterval operator+(const MetricInterval& a, const MetricInterval& b) {
    MetricInterval out;
    out.lower = a.lower + b.lower;
    out.upper = a.upper + b.upper;
    out.family_prefix = std::min(a.family_prefix, b.family_prefix);
    out.radius = std::max(a.radius, b.radius);
    out.certified = a.certified && b.certified;
    return out;
}

Rational family_weight(const GeneratingFamily& family, std::size_t prefix) {
    const std::size_t m = family.complete ? std::min(prefix, family.size()) : prefix;
    return 1 - pow2_inverse(m);
}

Rational pair_tail(const GeneratingFamily& family, std::size_t prefix) {
    const Rational total = family.complete ? family_weight(family, family.size()) : Rational(1);
    const Rational head = family_weight(family, prefix);
    return total * total - head * head;
}

std::vector<MeasurableSet> family_prefix(const GeneratingFamily& family, std::size_t prefix) {
    const std::size_t m = std::min(prefix, family.size());
    return {family.sets.begin(), family.sets.begin() + static_cast<std::ptrdiff_t>(m)};
}

std::optional<std::vector<GroupElement>> image_representatives(const std::vector<Action>& actions) {
    if (actions.empty()) throw DomainError("image closure of an empty tuple");
    const auto& m = actions.front().model();
    std::vector<std::vector<Permutation>> steps(actions.size());
    std::vector<std::size_t> offset{0};
    for (std::size_t a = 0; a < actions.size(); ++a) {
        if (actions[a].model() != m) throw ModelMismatch("actions of different groups");
        if (actions[a].backend() != Backend::Permutation) throw BackendMismatch("image closure needs permutation actions");
        const auto& pa = actions[a].permutation();
        for (const auto& gen : m.generators()) steps[a].push_back(pa.element(gen));
        offset.push_back(offset.back() + pa.ground_size());
    }
    using State = std::vector<std::uint32_t>;  // concatenated images
    State start(offset.back());
    for (std::size_t a = 0; a < actions.size(); ++a) {
        for (std::size_t x = offset[a]; x < offset[a + 1]; ++x) start[x] = static_cast<std::uint32_t>(x - offset[a]);
    }
    std::unordered_map<State, std::size_t, VectorHash> seen;
    std::vector<GroupElement> reps{m.identity()};
    std::vector<State> states{start};
    seen.emplace(start, 0);
    for (std::size_t head = 0; head < states.size(); ++head) {
        for (std::size_t k = 0; k < m.generators().size(); ++k) {
            State next(offset.back());
            for (std::size_t a = 0; a < actions.size(); ++a) {
                const auto& step = steps[a][k];
                for (std::size_t x = offset[a]; x < offset[a + 1]; ++x) {
                    next[x] = states[head][offset[a] + step[x - offset[a]]];
                }
            }
            auto [it, inserted] = seen.emplace(next, states.size());
            if (!inserted) continue;
            if (states.size() >= caps().max_image_closure) return std::nullopt;
            reps.push_back(m.compose(reps[head], m.generators()[k]));
            states.push_back(std::move(next));
        }
    }
    return reps;
}

std::optional<std::vector<GroupElement>> joint_image_representatives(const Action& t, const Action& s) {
    check_comparable(t, s);
    if (t.backend() != Backend::Permutation) throw BackendMismatch("image closure needs permutation actions");
    return image_representatives({t, s});
}

CorrelationSweep correlation_sweep(const Action& t, const Action& s, const std::vector<MeasurableSet>& sets,
                                   std::optional<std::uint64_t> declared_horizon) {
    check_comparable(t, s);
    for (const auto& a : sets) {
        check_set(t, a);
        check_set(s, a);
    }
    const auto& m = t.model();
    CorrelationSweep sweep;
    if (t.backend() == Backend::Bernoulli) {
        sweep.method = "support-interaction";
        sweep.elements = interacting_elements(m, sets);
        sweep.exhaustive = true;
        sweep.has_beyond = true;
        sweep.beyond_t = product_values(t, sets);
        sweep.beyond_s = product_values(s, sets);
    } else if (auto reps = joint_image_representatives(t, s)) {
        sweep.method = "image-closure";
        sweep.elements = std::move(*reps);
        sweep.exhaustive = true;
    } else if (declared_horizon) {
        sweep.method = "declared-horizon";
        sweep.elements = m.ball_sequence(*declared_horizon);
        sweep.exhaustive = false;
    } else {
        throw DomainError("joint image closure exceeds the cap and no horizon was declared; no sound supremum");
    }
    for (const auto& g : sweep.elements) sweep.horizon = std::max(sweep.horizon, length_of(m, g));
    sweep.t = correlation_table_parallel(t, sweep.elements, sets);
    sweep.s = correlation_table_parallel(s, sweep.elements, sets);
    return sweep;
}

MetricInterval weak_d(const Action& t, const Action& s, const GeneratingFamily& family, const Truncation& trunc) {
    if (!same_space(t, s)) throw BackendMismatch("weak metric needs both actions on one measure space");
    const auto& m = t.model();
    const auto sets = family_prefix(family, trunc.family_prefix);
    const auto elements = m.ball_sequence(trunc.radius);
    const auto disp = displacement_parallel(t, s, elements, sets);
    std::unordered_map<GroupElement, std::size_t, GroupElementHash> index;
    for (std::size_t k = 0; k < elements.size(); ++k) index.emplace(elements[k], k);
    Weighting weighting(m);
    Rational sum = 0;
    for (std::size_t k = 0; k < elements.size(); ++k) {
        const Rational dk = disp[k] + disp[index.at(m.invert(elements[k]))];
        sum += weighting.weight(elements[k]) * dk;
    }
    const Rational total = family.complete ? family_weight(family, family.size()) : Rational(1);
    MetricInterval out;
    out.lower = sum;
    out.upper = sum + 2 * family.tail(sets.size()) * weighting.ball_mass(trunc.radius) +
                2 * total * weighting.tail_bound(trunc.radius);
    out.family_prefix = sets.size();
    out.radius = trunc.radius;
    return out;
}

MetricInterval corr_a(const Action& t, const Action& s, const GroupElement& g, const GeneratingFamily& family,
                      std::size_t prefix) {
    check_comparable(t, s);
    const auto sets = family_prefix(family, prefix);
    const auto ct = correlation_table_serial(t, {g}, sets);
    const auto cs = correlation_table_serial(s, {g}, sets);
    MetricInterval out;
    out.lower = weighted_gap(block(ct, 0), block(cs, 0), sets.size());
    out.upper = out.lower + pair_tail(family, sets.size());
    out.family_prefix = sets.size();
    out.radius = length_of(t.model(), g);
    return out;
}

MetricInterval lead_w(const Action& t, const Action& s, const GeneratingFamily& family, std::size_t prefix,
                      std::optional<std::uint64_t> declared_horizon) {
    const auto sets = family_prefix(family, prefix);
    const auto sweep = correlation_sweep(t, s, sets, declared_horizon);
    Rational best = 0;
    for (std::size_t k = 0; k < sweep.elements.size(); ++k) {
        best = max(best, weighted_gap(block(sweep.t, k), block(sweep.s, k), sets.size()));
    }
    if (sweep.has_beyond) best = max(best, weighted_gap(sweep.beyond_t.data(), sweep.beyond_s.data(), sets.size()));
    MetricInterval out;
    out.lower = best;
    out.upper = best + pair_tail(family, sets.size());
    out.family_prefix = sets.size();
    out.radius = sweep.horizon;
    out.certified = sweep.exhaustive;
    return out;
}

MetricInterval lead_m(const Action& t, const Action& s, const GeneratingFamily& family, const Truncation& trunc,
                      std::optional<std::uint64_t> declared_horizon) {
    auto out = weak_d(t, s, family, trunc) + lead_w(t, s, family, trunc.family_prefix, declared_horizon);
    out.radius = trunc.radius;
    return out;
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Yes: return "yes";
        case Verdict::No: return "no";
        case Verdict::Unknown: return "unknown";
    }
    return "unknown";
}

namespace {

void consider(NeighborhoodResult& r, const Rational* x, const Rational* y, std::size_t m,
              const std::vector<std::size_t>& q, const GroupElement& g) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const Rational d = abs(x[i * m + j] - y[i * m + j]);
            if (!r.witness || d > r.sup) {
                r.sup = d;
                r.witness = g;
                r.witness_i = q[i];
                r.witness_j = q[j];
            }
        }
    }
}

}  // namespace

NeighborhoodResult in_q_neighborhood(const Action& t, const Action& s, const GeneratingFamily& family,
                                     const std::vector<std::size_t>& q, const Rational& epsilon,
                                     std::optional<std::uint64_t> declared_horizon) {
    const auto sets = sets_at(family, q);
    const auto sweep = correlation_sweep(t, s, sets, declared_horizon);
    NeighborhoodResult r;
    for (std::size_t k = 0; k < sweep.elements.size(); ++k) {
        consider(r, block(sweep.t, k), block(sweep.s, k), sets.size(), q, sweep.elements[k]);
    }
    if (sweep.has_beyond) {
        consider(r, sweep.beyond_t.data(), sweep.beyond_s.data(), sets.size(), q,
                 element_beyond(t.model(), sweep.horizon));
    }
    if (epsilon <= 0 || r.sup >= epsilon) {
        r.verdict = Verdict::No;
    } else {
        r.verdict = sweep.exhaustive ? Verdict::Yes : Verdict::Unknown;
    }
    return r;
}

NeighborhoodResult in_u_neighborhood(const Action& t, const Action& s, const GeneratingFamily& family,
                                     const std::vector<std::size_t>& q, const Rational& epsilon,
                                     const std::vector<GroupElement>& elements) {
    check_comparable(t, s);
    const auto sets = sets_at(family, q);
    const auto ct = correlation_table_parallel(t, elements, sets);
    const auto cs = correlation_table_parallel(s, elements, sets);
    NeighborhoodResult r;
    for (std::size_t k = 0; k < elements.size(); ++k) consider(r, block(ct, k), block(cs, k), sets.size(), q, elements[k]);
    r.verdict = epsilon > 0 && r.sup < epsilon ? Verdict::Yes : Verdict::No;
    return r;
}

ForwardInclusion forward_inclusion(const GeneratingFamily& family, const Rational& delta) {
    if (delta <= 0) throw DomainError("delta must be positive");
    ForwardInclusion out;
    out.delta = delta;
    std::size_t m = 1;
    while (!(2 * family.tail(m) < delta / 2)) ++m;
    if (m > family.size()) {
        throw ResourceLimit("family has " + std::to_string(family.size()) + " materialized sets, prefix " +
                            std::to_string(m) + " needed");
    }
    out.prefix = m;
    for (std::size_t i = 1; i <= m; ++i) out.q.push_back(i);
    out.tail_term = 2 * family.tail(m);
    return out;
}

BackwardInclusion backward_inclusion(const std::vector<std::size_t>& q, const Rational& epsilon) {
    if (q.empty()) throw DomainError("index set q must be nonempty");
    if (epsilon <= 0) throw DomainError("epsilon must be positive");
    BackwardInclusion out;
    out.epsilon = epsilon;
    out.q = q;
    out.max_index = *std::max_element(q.begin(), q.end());
    out.radius = epsilon * pow2_inverse(2 * out.max_index);
    return out;
}

InclusionCheck check_forward_inclusion(const Action& t, const Action& s, const GeneratingFamily& family,
                                 const ForwardInclusion& forward) {
    InclusionCheck c;
    const auto nb = in_q_neighborhood(t, s, family, forward.q, forward.delta / 4);
    c.neighborhood_sup = nb.sup;
    c.w = lead_w(t, s, family, forward.prefix);
    c.decided = nb.verdict != Verdict::Unknown;
    c.premise = nb.verdict == Verdict::Yes;
    c.conclusion = c.w.certified && c.w.upper < forward.delta;
    return c;
}

InclusionCheck check_backward_inclusion(const Action& t, const Action& s, const GeneratingFamily& family,
                                  const BackwardInclusion& backward) {
    // Pairs up to the largest index of q must be inside the prefix; beyond
    // that, extend while the family allows until the pair tail is below the
    // radius, so the premise is decidable.
    std::size_t prefix = backward.max_index;
    while (prefix < family.size() && !(pair_tail(family, prefix) < backward.radius / 2)) ++prefix;
    InclusionCheck c;
    c.w = lead_w(t, s, family, prefix);
    c.decided = c.w.certified;
    c.premise = c.w.upper < backward.radius;
    const auto nb = in_q_neighborhood(t, s, family, backward.q, backward.epsilon);
    c.neighborhood_sup = nb.sup;
    c.conclusion = nb.verdict == Verdict::Yes;
    return c;
}

Integer grid_index(const Rational& value, const Rational& epsilon) {
    if (epsilon <= 0) throw DomainError("epsilon must be positive");
    const Rational x = 2 * value / epsilon + Rational(1, 2);
    mpz_class k;
    mpz_fdiv_q(k.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return Integer(k.get_str());
}

Fingerprint fingerprint(const Action& t, const GeneratingFamily& family, const std::vector<std::size_t>& q,
                        const Rational& epsilon) {
    if (t.backend() != Backend::Bernoulli) throw DomainError("fingerprints need a mixing-certified (Bernoulli) action");
    if (epsilon <= 0) throw DomainError("epsilon must be positive");
    const auto sets = sets_at(family, q);
    const auto& m = t.model();
    const auto sweep = correlation_sweep(t, t, sets);
    Fingerprint fp;
    fp.epsilon = epsilon;
    fp.q = q;
    const std::size_t k = sets.size();
    for (std::size_t e = 0; e < sweep.elements.size(); ++e) {
        for (std::size_t p = 0; p < k * k; ++p) {
            if (abs(block(sweep.t, e)[p] - sweep.beyond_t[p]) >= epsilon / 2) {
                fp.n = std::max(fp.n, length_of(m, sweep.elements[e]));
            }
        }
    }
    for (const auto& a : sets) fp.marginals.push_back(measure(t, a));
    fp.elements = m.ball_sequence(fp.n);
    const auto table = correlation_table_parallel(t, fp.elements, sets);
    for (const auto& v : table.values) fp.cells.push_back(grid_index(v, epsilon));
    return fp;
}

FingerprintComparison fingerprint_close(const Action& t, const Action& s, const GeneratingFamily& family,
                                        const std::vector<std::size_t>& q, const Rational& epsilon) {
    FingerprintComparison c;
    c.epsilon = epsilon;
    c.equal = fingerprint(t, family, q, epsilon) == fingerprint(s, family, q, epsilon);
    c.sup = in_q_neighborhood(t, s, family, q, epsilon).sup;
    return c;
}

MixingProfile mixing_profile(const Action& t, const GeneratingFamily& family, std::size_t prefix,
                             std::uint64_t radius) {
    const auto sets = family_prefix(family, prefix);
    const auto& m = t.model();
    std::vector<GroupElement> elements;
    for (auto& g : m.ball_sequence(radius)) {
        if (g != m.identity()) elements.push_back(std::move(g));
    }
    const auto table = correlation_table_parallel(t, elements, sets);
    const auto products = product_values(t, sets);
    MixingProfile profile;
    for (std::uint64_t r = 1; r <= radius; ++r) profile.rows.emplace_back(r, Rational(0));
    const std::size_t k = sets.size();
    for (std::size_t e = 0; e < elements.size(); ++e) {
        auto& row = profile.rows[length_of(m, elements[e]) - 1].second;
        for (std::size_t p = 0; p < k * k; ++p) row = max(row, abs(block(table, e)[p] - products[p]));
    }
    if (t.backend() == Backend::Bernoulli) {
        profile.mixing_certified = true;
        std::uint64_t h = 0;
        for (const auto& g : interacting_elements(m, sets)) h = std::max(h, length_of(m, g));
        profile.zero_beyond = h;
    }
    return profile;
}

std::vector<CompletenessStage> completeness_demo(const std::vector<Action>& sequence, const Action& limit,
                                                 const GeneratingFamily& family, std::size_t prefix,
                                                 std::uint64_t check_radius) {
    if (limit.backend() != Backend::Bernoulli) throw DomainError("completeness demo needs Bernoulli actions");
    const auto sets = family_prefix(family, prefix);
    const auto& m = limit.model();
    const auto elements = m.ball_sequence(check_radius);
    const auto limit_table = correlation_table_parallel(limit, elements, sets);
    const auto limit_products = product_values(limit, sets);
    std::uint64_t k0 = 0;
    for (const auto& g : interacting_elements(m, sets)) k0 = std::max(k0, length_of(m, g));

    std::vector<std::vector<Rational>> pairwise(sequence.size(), std::vector<Rational>(sequence.size(), 0));
    for (std::size_t l = 0; l < sequence.size(); ++l) {
        for (std::size_t k = l + 1; k < sequence.size(); ++k) {
            pairwise[l][k] = pairwise[k][l] = lead_w(sequence[l], sequence[k], family, prefix).upper;
        }
    }
    std::vector<CompletenessStage> stages;
    const std::size_t n = sets.size();
    for (std::size_t idx = 0; idx < sequence.size(); ++idx) {
        CompletenessStage st;
        st.index = idx;
        st.cauchy = 0;
        for (std::size_t l = idx; l < sequence.size(); ++l) {
            for (std::size_t k = idx; k < sequence.size(); ++k) st.cauchy = max(st.cauchy, pairwise[l][k]);
        }
        st.w_to_limit = lead_w(limit, sequence[idx], family, prefix).upper;
        st.k0 = k0;
        for (std::size_t e = 0; e < elements.size(); ++e) {
            if (length_of(m, elements[e]) <= k0) continue;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    const Rational dev = abs(block(limit_table, e)[i * n + j] - limit_products[i * n + j]);
                    const Rational bound = st.w_to_limit * (mpz_class(1) << static_cast<unsigned>(i + j + 3)) + st.w_to_limit;
                    if (dev > bound) st.holds = false;
                }
            }
        }
        stages.push_back(st);
    }
    return stages;
}

}  // namespace leadmetric
