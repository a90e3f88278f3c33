#include "evoport/moea/spea2.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace evoport::moea {

namespace {

double squared_distance(const ObjectiveVector& a, const ObjectiveVector& b) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        d2 += diff * diff;
    }
    return d2;
}

} // namespace

std::vector<double> spea2_assign_fitness(const std::vector<ObjectiveVector>& members) {
    const std::size_t n = members.size();
    std::vector<double> fitness(n, 0.0);
    if (n == 0)
        return fitness;

    std::vector<std::size_t> strength(n, 0);
    std::vector<std::vector<std::size_t>> dominators(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && dominates(members[i], members[j])) {
                ++strength[i];
                dominators[j].push_back(i);
            }
        }
    }

    const std::size_t k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        double raw = 0.0;
        for (std::size_t dom : dominators[i])
            raw += static_cast<double>(strength[dom]);

        for (std::size_t j = 0; j < n; ++j)
            row[j] = squared_distance(members[i], members[j]);
        std::sort(row.begin(), row.end());
        const double sigma_k = std::sqrt(row[std::min(k, n - 1)]);
        fitness[i] = raw + 1.0 / (sigma_k + 2.0);
    }
    return fitness;
}

std::vector<double> spea2_assign_fitness(const std::vector<ObjectiveVector>& population,
                                         const std::vector<ObjectiveVector>& archive) {
    std::vector<ObjectiveVector> members;
    members.reserve(population.size() + archive.size());
    members.insert(members.end(), population.begin(), population.end());
    members.insert(members.end(), archive.begin(), archive.end());
    return spea2_assign_fitness(members);
}

std::vector<std::size_t>
spea2_environmental_selection(const std::vector<ObjectiveVector>& members,
                              const std::vector<double>& fitness, std::size_t archive_size) {
    const std::size_t n = members.size();
    if (n == 0)
        throw std::invalid_argument("spea2_environmental_selection: empty union");
    if (fitness.size() != n)
        throw std::invalid_argument("spea2_environmental_selection: fitness size mismatch");

    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < n; ++i)
        if (fitness[i] < 1.0)
            selected.push_back(i);

    if (selected.size() < archive_size) {
        // Fill with the best dominated members by fitness, stable by index.
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < n; ++i)
            if (fitness[i] >= 1.0)
                rest.push_back(i);
        std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
            return fitness[a] < fitness[b];
        });
        for (std::size_t i : rest) {
            if (selected.size() >= archive_size)
                break;
            selected.push_back(i);
        }
        std::sort(selected.begin(), selected.end());
        return selected;
    }

    // Iterative truncation: drop the member with the lexicographically
    // smallest sorted distance profile to the others; ties by lowest index.
    while (selected.size() > archive_size) {
        const std::size_t m = selected.size();
        std::vector<std::vector<double>> profile(m);
        for (std::size_t i = 0; i < m; ++i) {
            profile[i].reserve(m - 1);
            for (std::size_t j = 0; j < m; ++j)
                if (i != j)
                    profile[i].push_back(squared_distance(members[selected[i]], members[selected[j]]));
            std::sort(profile[i].begin(), profile[i].end());
        }
        std::size_t victim = 0;
        for (std::size_t i = 1; i < m; ++i)
            if (profile[i] < profile[victim])
                victim = i;
        selected.erase(selected.begin() + static_cast<std::ptrdiff_t>(victim));
    }
    return selected;
}

} // namespace evoport::moea
