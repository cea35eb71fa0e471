#include "leadmetric/sequences.hpp"

#include "leadmetric/errors.hpp"

#include <limits>

namespace leadmetric {

bool conjugation_excludes(const GroupModel& model, const FiniteSubset& i, const FiniteSubset& h,
                          const GroupElement& candidate) {
    for (const auto& g : i) {
        const GroupElement c = model.conjugate(candidate, g);
        if (c != g && h.contains(c)) return false;
    }
    return true;
}

ConjugatorResult conjugator_search(const GroupModel& model, const FiniteSubset& i, const FiniteSubset& h,
                                   std::size_t count, std::uint64_t budget, const Integer& start_length) {
    ConjugatorResult out;
    if (count == 0) {
        out.complete = true;
        return out;
    }
    BallOrderStream stream(model, start_length);
    while (out.examined < budget) {
        auto cand = stream.next();
        if (!cand) break;
        ++out.examined;
        if (conjugation_excludes(model, i, h, *cand)) {
            out.elements.push_back(*cand);
            if (out.elements.size() == count) {
                out.complete = true;
                break;
            }
        }
    }
    return out;
}

bool Envelope::contains(const GroupModel& model, const GroupElement& g) const {
    if (explicit_set) return explicit_set->contains(g);
    auto [lo, hi] = model.word_length_bounds(g);
    if (lo > radius) return false;
    if (hi <= radius) return true;
    if (radius > std::numeric_limits<std::uint64_t>::max()) {
        throw ResourceLimit("envelope radius too large for exact membership of " + to_string(g));
    }
    return model.in_ball(g, radius.convert_to<std::uint64_t>());
}

SeparatedSequence separated_sequence(const GroupModel& model, const FiniteSubset& c0, std::size_t length) {
    if (!c0.contains(model.identity())) throw DomainError("C0 must contain the identity");
    if (!is_symmetric(model, c0)) throw DomainError("C0 must be symmetric");
    SeparatedSequence out;
    Envelope first;
    first.explicit_set = c0;
    first.radius = max_word_length(model, c0);
    out.envelopes.push_back(first);
    if (length == 0) return out;

    const FiniteSubset p = set_power(model, c0, 5);
    const Integer p_radius = max_word_length(model, p);
    BallOrderStream stream(model, 0);
    std::optional<GroupElement> g1;
    while (auto cand = stream.next()) {
        if (!p.contains(*cand)) {
            g1 = *cand;
            break;
        }
    }
    Integer rho = std::max(model.word_length(*g1), p_radius);
    out.elements.push_back(*g1);
    Envelope e1;
    e1.radius = rho;
    out.envelopes.push_back(e1);

    for (std::size_t n = 2; n <= length; ++n) {
        // C_{n-1}^5 = ball(5 rho); the first element of the next sphere lies outside it.
        const Integer next_length = 5 * rho + 1;
        BallOrderStream shell(model, next_length);
        GroupElement g = *shell.next();
        out.elements.push_back(g);
        rho = next_length;
        Envelope e;
        e.radius = rho;
        out.envelopes.push_back(e);
    }
    return out;
}

InclusionSolutions count_inclusion_solutions(const GroupModel& model, const GroupElement& g,
                                             const std::vector<GroupElement>& elements, const FiniteSubset& c0) {
    InclusionSolutions out;
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const GroupElement left = model.compose(elements[i], g);
        for (std::size_t j = 0; j < elements.size(); ++j) {
            if (i == j) continue;
            if (c0.contains(model.compose(left, model.invert(elements[j])))) {
                ++out.count;
                out.pairs.emplace_back(i, j);
            }
        }
    }
    return out;
}

}  // namespace leadmetric
