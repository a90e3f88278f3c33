#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace evoport::moea {

// Objective values in minimization orientation. Maximization objectives
// are negated at the problem boundary; constraint penalties are finite
// numbers, never infinities, so dominance stays informative.
using ObjectiveVector = std::vector<double>;

// Sentinel awarded to boundary solutions by crowding_distance. Largest
// finite value rather than infinity so objective vectors stay finite.
inline constexpr double kCrowdingSentinel = std::numeric_limits<double>::max();

// Pareto dominance: a <= b componentwise with at least one strict
// improvement. Throws std::invalid_argument on length mismatch.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

// Deb's fast non-dominated sort. Front 0 is the non-dominated subset;
// front k is the non-dominated subset once fronts 0..k-1 are removed.
// Indices within a front are in ascending population order.
std::vector<std::vector<std::size_t>>
fast_nondominated_sort(const std::vector<ObjectiveVector>& objectives);

// NSGA-II crowding distance for one front, output order matching input.
// Boundary members per objective get kCrowdingSentinel; interior members
// sum range-normalized neighbor gaps. Zero-range objectives contribute 0.
std::vector<double> crowding_distance(const std::vector<ObjectiveVector>& front);

template <typename GenomeType>
struct Individual {
    GenomeType genome;
    ObjectiveVector objectives; // empty until evaluated
    double fitness = 0.0;       // algorithm-assigned (front rank / SPEA2 fitness)

    bool evaluated() const { return !objectives.empty(); }
};

} // namespace evoport::moea
