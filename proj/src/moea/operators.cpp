#include "evoport/moea/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evoport::moea {

std::pair<SelectionGenome, SelectionGenome>
single_point_crossover(const SelectionGenome& a, const SelectionGenome& b, Rng& rng) {
    if (a.size() != b.size())
        throw std::invalid_argument("single_point_crossover: genome length mismatch");
    if (a.size() < 2)
        throw std::invalid_argument("single_point_crossover: genome length must be >= 2");
    const std::size_t cut = 1 + rng.uniform_index(a.size() - 1);
    SelectionGenome c1 = a, c2 = b;
    for (std::size_t i = cut; i < a.size(); ++i) {
        c1[i] = b[i];
        c2[i] = a[i];
    }
    return {std::move(c1), std::move(c2)};
}

SelectionGenome bit_flip_mutation(const SelectionGenome& genome, double rate, Rng& rng) {
    if (rate < 0.0 || rate > 1.0)
        throw std::invalid_argument("bit_flip_mutation: rate must be in [0,1]");
    SelectionGenome out = genome;
    for (auto& bit : out)
        if (rng.uniform01() < rate)
            bit = bit ? 0 : 1;
    return out;
}

namespace {

double clamp_gene(double v, GeneBounds bounds) {
    return std::min(bounds.upper, std::max(bounds.lower, v));
}

} // namespace

std::pair<WeightGenome, WeightGenome>
sbx_crossover(const WeightGenome& a, const WeightGenome& b, double eta, GeneBounds bounds, Rng& rng) {
    if (a.size() != b.size())
        throw std::invalid_argument("sbx_crossover: genome length mismatch");
    if (eta <= 0.0)
        throw std::invalid_argument("sbx_crossover: eta must be positive");
    WeightGenome c1 = a, c2 = b;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (rng.uniform01() > 0.5)
            continue;
        if (std::abs(a[i] - b[i]) < 1e-14)
            continue; // equal genes pass through unchanged
        const double u = rng.uniform01();
        double beta;
        if (u <= 0.5)
            beta = std::pow(2.0 * u, 1.0 / (eta + 1.0));
        else
            beta = std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
        const double y1 = a[i], y2 = b[i];
        c1[i] = clamp_gene(0.5 * ((1.0 + beta) * y1 + (1.0 - beta) * y2), bounds);
        c2[i] = clamp_gene(0.5 * ((1.0 - beta) * y1 + (1.0 + beta) * y2), bounds);
    }
    return {std::move(c1), std::move(c2)};
}

WeightGenome polynomial_mutation(const WeightGenome& genome, double rate, double eta,
                                 GeneBounds bounds, Rng& rng) {
    if (rate < 0.0 || rate > 1.0)
        throw std::invalid_argument("polynomial_mutation: rate must be in [0,1]");
    if (eta <= 0.0)
        throw std::invalid_argument("polynomial_mutation: eta must be positive");
    WeightGenome out = genome;
    const double span = bounds.upper - bounds.lower;
    const double mut_pow = 1.0 / (eta + 1.0);
    for (auto& y : out) {
        if (rng.uniform01() >= rate)
            continue;
        const double delta1 = (y - bounds.lower) / span;
        const double delta2 = (bounds.upper - y) / span;
        const double u = rng.uniform01();
        double deltaq;
        if (u <= 0.5) {
            const double xy = 1.0 - delta1;
            const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(xy, eta + 1.0);
            deltaq = std::pow(val, mut_pow) - 1.0;
        } else {
            const double xy = 1.0 - delta2;
            const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(xy, eta + 1.0);
            deltaq = 1.0 - std::pow(val, mut_pow);
        }
        y = clamp_gene(y + deltaq * span, bounds);
    }
    return out;
}

} // namespace evoport::moea
