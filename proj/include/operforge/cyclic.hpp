#pragma once

#include "operforge/gauge.hpp"

#include <cstdint>
#include <vector>

namespace operforge {

struct CyclicWitness {
    std::vector<Series> phi;
    // Columns phi, nabla phi, ..., nabla^{n-1} phi.
    MatrixSeries wronskian;
    std::int64_t det_valuation = 0;
    // Position of phi in the candidate enumeration, counted from 0.
    std::size_t candidate_index = 0;
};

// d/dt v + A v. Requires a gl connection.
std::vector<Series> apply_nabla(const Connection& a, const std::vector<Series>& v);

// The Wronskian matrix of phi: columns phi, nabla phi, ..., nabla^{n-1} phi.
MatrixSeries wronskian(const Connection& a, const std::vector<Series>& phi);

// Candidate phi in enumeration order: the standard basis vectors, then for each
// coefficient pattern (1, ..., 1), (1, 2, ..., n), (1, -1, 1, ...) the vectors
// (c_i t^{m_i}) with every m_i in [-pole_budget, pole_budget], sorted by pole
// order max(0, -min m), then sum |m_i|, then lexicographically.
std::vector<std::vector<Series>> cyclic_candidates(std::size_t n, std::int64_t pole_budget);

// First candidate whose Wronskian determinant is visibly nonzero. Throws
// PrecisionExhausted if some determinant vanished on its window and no
// candidate succeeded, SearchExhausted if all determinants were exactly zero.
CyclicWitness find_cyclic_vector(const Connection& a, std::int64_t pole_budget);

struct CyclicOper {
    // The Wronskian, as a change of trivialization.
    GaugeElement g;
    // Ga_{g^{-1}}(A), a companion matrix: ones on the subdiagonal, the
    // coordinates of nabla^n phi in the last column.
    Connection b;
};

// Throws PrecisionExhausted if B is not known up to t^0, where its unit subdiagonal lives.
CyclicOper oper_from_cyclic(const Connection& a, const CyclicWitness& w);

} // namespace operforge
