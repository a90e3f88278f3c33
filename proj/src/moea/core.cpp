#include "evoport/moea/core.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace evoport::moea {

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("dominates: objective vectors must have equal nonzero length");
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i])
            return false;
        if (a[i] < b[i])
            strict = true;
    }
    return strict;
}

std::vector<std::vector<std::size_t>>
fast_nondominated_sort(const std::vector<ObjectiveVector>& objectives) {
    const std::size_t n = objectives.size();
    std::vector<std::vector<std::size_t>> fronts;
    if (n == 0)
        return fronts;

    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> domination_count(n, 0);

    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (dominates(objectives[p], objectives[q])) {
                dominated[p].push_back(q);
                ++domination_count[q];
            } else if (dominates(objectives[q], objectives[p])) {
                dominated[q].push_back(p);
                ++domination_count[p];
            }
        }
    }

    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p)
        if (domination_count[p] == 0)
            current.push_back(p);

    while (!current.empty()) {
        fronts.push_back(current);
        std::vector<std::size_t> next;
        for (std::size_t p : current) {
            for (std::size_t q : dominated[p]) {
                if (--domination_count[q] == 0)
                    next.push_back(q);
            }
        }
        std::sort(next.begin(), next.end());
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(const std::vector<ObjectiveVector>& front) {
    const std::size_t n = front.size();
    if (n == 0)
        throw std::invalid_argument("crowding_distance: empty front");
    const std::size_t m = front[0].size();

    std::vector<double> distance(n, 0.0);
    std::vector<bool> boundary(n, false);
    std::vector<std::size_t> order(n);

    for (std::size_t obj = 0; obj < m; ++obj) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (front[a][obj] != front[b][obj])
                return front[a][obj] < front[b][obj];
            return a < b; // stable tie-break keeps runs deterministic
        });
        boundary[order.front()] = true;
        boundary[order.back()] = true;
        const double range = front[order.back()][obj] - front[order.front()][obj];
        if (range <= 0.0)
            continue;
        for (std::size_t k = 1; k + 1 < n; ++k) {
            distance[order[k]] +=
                (front[order[k + 1]][obj] - front[order[k - 1]][obj]) / range;
        }
    }

    for (std::size_t i = 0; i < n; ++i)
        if (boundary[i])
            distance[i] = kCrowdingSentinel;
    return distance;
}

} // namespace evoport::moea
