#include "leadmetric/kernels.hpp"

#include "leadmetric/errors.hpp"

#include <exception>

namespace leadmetric {

namespace {

Rational point_mass(std::size_t count, std::uint32_t n) {
    return ratio(mpz_class(static_cast<unsigned long>(count)), mpz_class(static_cast<unsigned long>(n)));
}

void check_sets(const Action& t, const std::vector<MeasurableSet>& sets) {
    for (const auto& a : sets) check_set(t, a);
}

// Writes the |sets|^2 block for one element into out[0..).
void correlation_block(const Action& t, const GroupElement& g, const std::vector<MeasurableSet>& sets,
                       Rational* out) {
    const std::size_t m = sets.size();
    if (t.backend() == Backend::Permutation) {
        const auto& pa = t.permutation();
        const Permutation p = pa.element(g);
        for (std::size_t i = 0; i < m; ++i) {
            const PointSet moved = std::get<PointSet>(sets[i]).image(p);
            for (std::size_t j = 0; j < m; ++j) {
                out[i * m + j] = point_mass(intersection_count(moved, std::get<PointSet>(sets[j])), pa.ground_size());
            }
        }
        return;
    }
    const auto& weights = t.bernoulli().weights();
    for (std::size_t i = 0; i < m; ++i) {
        const CylinderUnion moved = shift(t.model(), g, std::get<CylinderUnion>(sets[i]));
        for (std::size_t j = 0; j < m; ++j) {
            out[i * m + j] = cylinder_intersection_measure(weights, moved, std::get<CylinderUnion>(sets[j]));
        }
    }
}

Rational displacement_one(const Action& t, const Action& s, const GroupElement& g,
                          const std::vector<MeasurableSet>& sets) {
    Rational total = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        total += pow2_inverse(i + 1) * symmetric_difference_measure(t, act(t, g, sets[i]), act(s, g, sets[i]));
    }
    return total;
}

void check_same_space(const Action& t, const Action& s) {
    if (!same_space(t, s)) throw BackendMismatch("actions live on different measure spaces");
}

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

CorrelationTable correlation_table_serial(const Action& t, const std::vector<GroupElement>& elements,
                                          const std::vector<MeasurableSet>& sets) {
    check_sets(t, sets);
    CorrelationTable table;
    table.sets = sets.size();
    table.elements = elements;
    table.values.resize(elements.size() * sets.size() * sets.size());
    for (std::size_t k = 0; k < elements.size(); ++k) {
        correlation_block(t, elements[k], sets, table.values.data() + k * sets.size() * sets.size());
    }
    return table;
}

CorrelationTable correlation_table_parallel(const Action& t, const std::vector<GroupElement>& elements,
                                            const std::vector<MeasurableSet>& sets) {
    check_sets(t, sets);
    CorrelationTable table;
    table.sets = sets.size();
    table.elements = elements;
    table.values.resize(elements.size() * sets.size() * sets.size());
    std::vector<std::exception_ptr> errors(elements.size());
    const auto count = static_cast<std::ptrdiff_t>(elements.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
        try {
            correlation_block(t, elements[k], sets, table.values.data() + k * sets.size() * sets.size());
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    rethrow_first(errors);
    return table;
}

std::vector<Rational> displacement_serial(const Action& t, const Action& s, const std::vector<GroupElement>& elements,
                                          const std::vector<MeasurableSet>& sets) {
    check_same_space(t, s);
    check_sets(t, sets);
    std::vector<Rational> out(elements.size());
    for (std::size_t k = 0; k < elements.size(); ++k) out[k] = displacement_one(t, s, elements[k], sets);
    return out;
}

std::vector<Rational> displacement_parallel(const Action& t, const Action& s,
                                            const std::vector<GroupElement>& elements,
                                            const std::vector<MeasurableSet>& sets) {
    check_same_space(t, s);
    check_sets(t, sets);
    std::vector<Rational> out(elements.size());
    std::vector<std::exception_ptr> errors(elements.size());
    const auto count = static_cast<std::ptrdiff_t>(elements.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
        try {
            out[k] = displacement_one(t, s, elements[k], sets);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    rethrow_first(errors);
    return out;
}

}  // namespace leadmetric
