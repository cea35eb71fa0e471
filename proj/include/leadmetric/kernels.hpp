#pragma once

#include "leadmetric/actions.hpp"

#include <vector>

namespace leadmetric {

/// μ(T^g A_i ∩ A_j) for every listed g and every ordered pair of sets,
/// stored row-major as [g][i][j].
struct CorrelationTable {
    std::size_t sets = 0;
    std::vector<GroupElement> elements;
    std::vector<Rational> values;

    const Rational& at(std::size_t g, std::size_t i, std::size_t j) const {
        return values[(g * sets + i) * sets + j];
    }
};

/// Reference implementation: one element after another.
CorrelationTable correlation_table_serial(const Action& t, const std::vector<GroupElement>& elements,
                                          const std::vector<MeasurableSet>& sets);
/// OpenMP over the elements; every slot is written by exactly one thread,
/// so the result is identical to the serial table.
CorrelationTable correlation_table_parallel(const Action& t, const std::vector<GroupElement>& elements,
                                            const std::vector<MeasurableSet>& sets);

/// D(g) = sum_i 2^{-i} μ(T^g A_i △ S^g A_i) (index base 1) for each listed g.
/// T and S must share a measure space.
std::vector<Rational> displacement_serial(const Action& t, const Action& s, const std::vector<GroupElement>& elements,
                                          const std::vector<MeasurableSet>& sets);
std::vector<Rational> displacement_parallel(const Action& t, const Action& s,
                                            const std::vector<GroupElement>& elements,
                                            const std::vector<MeasurableSet>& sets);

}  // namespace leadmetric
