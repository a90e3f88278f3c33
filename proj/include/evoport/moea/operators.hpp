#pragma once

#include "evoport/rng.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace evoport::moea {

// Phase I individuals: 0/1 inclusion string over the filtered universe.
using SelectionGenome = std::vector<std::uint8_t>;

// Phase II individuals: raw (pre-normalization) weight vector.
using WeightGenome = std::vector<double>;

// Lower/upper gene bounds shared by all genes of a WeightGenome.
struct GeneBounds {
    double lower = 0.0;
    double upper = 1.0;
};

// Binary tournament: draws two indices uniformly with replacement and
// returns the strictly fitter one; ties go to the first drawn.
// `strictly_better(i, j)` must say whether i beats j.
template <typename StrictlyBetter>
std::size_t binary_tournament(std::size_t population_size, Rng& rng, StrictlyBetter strictly_better) {
    const std::size_t first = rng.uniform_index(population_size);
    const std::size_t second = rng.uniform_index(population_size);
    return strictly_better(second, first) ? second : first;
}

// Cut point drawn uniformly from 1..l-1; children swap suffixes.
// Throws std::invalid_argument on length mismatch or length < 2.
std::pair<SelectionGenome, SelectionGenome>
single_point_crossover(const SelectionGenome& a, const SelectionGenome& b, Rng& rng);

// Each bit flips independently with probability `rate`.
SelectionGenome bit_flip_mutation(const SelectionGenome& genome, double rate, Rng& rng);

// Simulated binary crossover (Deb & Agrawal). Each gene recombines with
// probability 0.5 using the symmetric spread factor, so the children's
// per-gene midpoint equals the parents' midpoint before clipping to bounds.
std::pair<WeightGenome, WeightGenome>
sbx_crossover(const WeightGenome& a, const WeightGenome& b, double eta, GeneBounds bounds, Rng& rng);

// Bounded polynomial mutation: each gene perturbed with probability `rate`;
// a gene at a bound can only move inward.
WeightGenome polynomial_mutation(const WeightGenome& genome, double rate, double eta,
                                 GeneBounds bounds, Rng& rng);

} // namespace evoport::moea
