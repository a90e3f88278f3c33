#pragma once

#include "evoport/moea/core.hpp"

#include <cstddef>
#include <vector>

namespace evoport::moea {

// SPEA2 fitness over the union of population and archive:
// raw fitness (sum of strengths of dominators) plus density 1/(sigma_k + 2),
// where sigma_k is the distance to the k-th nearest neighbor in objective
// space and k = floor(sqrt(union size)). Non-dominated members end up with
// fitness < 1, dominated members with fitness >= 1.
std::vector<double> spea2_assign_fitness(const std::vector<ObjectiveVector>& members);

// Convenience overload matching the population/archive call sites; returns
// fitness for the concatenation population followed by archive.
std::vector<double> spea2_assign_fitness(const std::vector<ObjectiveVector>& population,
                                         const std::vector<ObjectiveVector>& archive);

// SPEA2 environmental selection over the union: keeps all non-dominated
// members (fitness < 1); truncates the densest ones by the lexicographic
// nearest-neighbor rule when there are too many, fills with the best
// dominated members by fitness when too few. Returns exactly archive_size
// indices into `members` unless the union is smaller.
std::vector<std::size_t>
spea2_environmental_selection(const std::vector<ObjectiveVector>& members,
                              const std::vector<double>& fitness, std::size_t archive_size);

} // namespace evoport::moea
