#pragma once

#include "evoport/moea/archive.hpp"
#include "evoport/moea/core.hpp"
#include "evoport/moea/operators.hpp"
#include "evoport/moea/params.hpp"
#include "evoport/moea/spea2.hpp"
#include "evoport/rng.hpp"
#include "evoport/text.hpp"

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <mutex>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#ifdef EVOPORT_ARCHIVE_CHECKS
#include <cassert>
#endif

namespace evoport::moea {

// A problem plugs its encoding, evaluation and variation operators into the
// generic loops. Evaluation must be side-effect-free; it may be called from
// worker threads. Variation draws from the Rng it is handed, in order.
template <typename P>
concept EvolutionProblem = requires(const P& p, const typename P::Genome& g,
                                    typename P::Genome& child, Rng& rng) {
    typename P::Genome;
    { p.genome_length() } -> std::convertible_to<std::size_t>;
    { p.objective_count() } -> std::convertible_to<std::size_t>;
    { p.evaluate(g) } -> std::convertible_to<ObjectiveVector>;
    { p.random_genome(rng) } -> std::convertible_to<typename P::Genome>;
    { p.crossover(g, g, rng) } -> std::convertible_to<std::pair<typename P::Genome, typename P::Genome>>;
    { p.mutate(child, rng) };
};

// Per-generation trace emission as line-delimited JSON. Lines are written
// atomically; order across concurrently traced runs is unspecified.
class TraceSink {
public:
    TraceSink(std::ostream& out, std::string label) : out_(&out), label_(std::move(label)) {}

    void emit(const char* algo, std::size_t generation, std::size_t front0,
              const ObjectiveVector& best) const {
        std::string line = "{\"run\":\"" + label_ + "\",\"algo\":\"" + algo +
                           "\",\"generation\":" + std::to_string(generation) +
                           ",\"front0\":" + std::to_string(front0) + ",\"best\":[";
        for (std::size_t i = 0; i < best.size(); ++i) {
            if (i)
                line += ',';
            line += fmt_double(best[i]);
        }
        line += "]}\n";
        std::scoped_lock lock(mutex());
        *out_ << line;
        out_->flush();
    }

private:
    static std::mutex& mutex() {
        static std::mutex m;
        return m;
    }
    std::ostream* out_;
    std::string label_;
};

namespace detail {

template <EvolutionProblem P>
std::vector<Individual<typename P::Genome>>
initial_population(const P& problem, const EaParams& params,
                   const std::vector<typename P::Genome>& seeds, Rng& init_rng) {
    using Ind = Individual<typename P::Genome>;
    if (seeds.size() > params.population_size)
        throw std::invalid_argument("seed count exceeds population size");
    std::vector<Ind> population;
    population.reserve(params.population_size);
    for (const auto& seed : seeds) {
        if (seed.size() != problem.genome_length())
            throw std::invalid_argument("seed genome length mismatch");
        population.push_back(Ind{seed, {}, 0.0});
    }
    while (population.size() < params.population_size)
        population.push_back(Ind{problem.random_genome(init_rng), {}, 0.0});
    return population;
}

template <EvolutionProblem P>
void evaluate_all(const P& problem, std::vector<Individual<typename P::Genome>>& members) {
    for (auto& ind : members)
        if (!ind.evaluated())
            ind.objectives = problem.evaluate(ind.genome);
}

inline ObjectiveVector best_per_objective(const std::vector<ObjectiveVector>& objs) {
    if (objs.empty())
        return {};
    ObjectiveVector best = objs.front();
    for (const auto& o : objs)
        for (std::size_t k = 0; k < best.size(); ++k)
            best[k] = std::min(best[k], o[k]);
    return best;
}

} // namespace detail

// Canonical elitist NSGA-II. Generation zero is `seeds` verbatim plus
// uniform-random genomes up to population_size; each generation breeds a
// full offspring population by binary tournament on (front rank, crowding
// distance), merges parents and offspring and keeps the best N. Returns
// the final population's first front. RNG streams: child(0) seeds the
// initial population, child(1+g) drives variation in generation g.
template <EvolutionProblem P>
std::vector<Individual<typename P::Genome>>
run_nsga2(const P& problem, const EaParams& params,
          const std::vector<typename P::Genome>& seeds, const TraceSink* trace = nullptr) {
    using Ind = Individual<typename P::Genome>;
    params.validate();

    Rng master(params.rng_seed);
    Rng init_rng = master.child(0);
    std::vector<Ind> population = detail::initial_population(problem, params, seeds, init_rng);
    detail::evaluate_all(problem, population);

    const std::size_t n = params.population_size;
    std::vector<std::size_t> rank(n, 0);
    std::vector<double> crowd(n, 0.0);

    auto assign_rank_crowding = [&](const std::vector<Ind>& pop) {
        std::vector<ObjectiveVector> objs;
        objs.reserve(pop.size());
        for (const auto& ind : pop)
            objs.push_back(ind.objectives);
        const auto fronts = fast_nondominated_sort(objs);
        rank.assign(pop.size(), 0);
        crowd.assign(pop.size(), 0.0);
        for (std::size_t f = 0; f < fronts.size(); ++f) {
            std::vector<ObjectiveVector> front_objs;
            front_objs.reserve(fronts[f].size());
            for (std::size_t idx : fronts[f])
                front_objs.push_back(objs[idx]);
            const auto dist = crowding_distance(front_objs);
            for (std::size_t k = 0; k < fronts[f].size(); ++k) {
                rank[fronts[f][k]] = f;
                crowd[fronts[f][k]] = dist[k];
            }
        }
    };

    assign_rank_crowding(population);

    for (std::size_t gen = 0; gen < params.generations; ++gen) {
        Rng var_rng = master.child(1 + gen);
        auto better = [&](std::size_t a, std::size_t b) {
            if (rank[a] != rank[b])
                return rank[a] < rank[b];
            return crowd[a] > crowd[b];
        };

        std::vector<Ind> offspring;
        offspring.reserve(n);
        while (offspring.size() < n) {
            const std::size_t pa = binary_tournament(n, var_rng, better);
            const std::size_t pb = binary_tournament(n, var_rng, better);
            auto [c1, c2] = problem.crossover(population[pa].genome, population[pb].genome, var_rng);
            problem.mutate(c1, var_rng);
            problem.mutate(c2, var_rng);
            offspring.push_back(Ind{std::move(c1), {}, 0.0});
            if (offspring.size() < n)
                offspring.push_back(Ind{std::move(c2), {}, 0.0});
        }
        detail::evaluate_all(problem, offspring);

        std::vector<Ind> merged = std::move(population);
        merged.insert(merged.end(), std::make_move_iterator(offspring.begin()),
                      std::make_move_iterator(offspring.end()));

        std::vector<ObjectiveVector> objs;
        objs.reserve(merged.size());
        for (const auto& ind : merged)
            objs.push_back(ind.objectives);
        const auto fronts = fast_nondominated_sort(objs);

        std::vector<Ind> next;
        next.reserve(n);
        std::vector<std::size_t> next_rank;
        std::vector<double> next_crowd;
        for (std::size_t f = 0; f < fronts.size() && next.size() < n; ++f) {
            std::vector<ObjectiveVector> front_objs;
            front_objs.reserve(fronts[f].size());
            for (std::size_t idx : fronts[f])
                front_objs.push_back(objs[idx]);
            const auto dist = crowding_distance(front_objs);

            std::vector<std::size_t> order(fronts[f].size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            if (next.size() + fronts[f].size() > n) {
                // Partial front: most spread-out members first, stable by index.
                std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    return dist[a] > dist[b];
                });
            }
            for (std::size_t k : order) {
                if (next.size() >= n)
                    break;
                next.push_back(std::move(merged[fronts[f][k]]));
                next_rank.push_back(f);
                next_crowd.push_back(dist[k]);
            }
        }
        population = std::move(next);
        rank = std::move(next_rank);
        crowd = std::move(next_crowd);

        if (trace) {
            std::size_t front0 = 0;
            std::vector<ObjectiveVector> pop_objs;
            pop_objs.reserve(population.size());
            for (std::size_t i = 0; i < population.size(); ++i) {
                if (rank[i] == 0)
                    ++front0;
                pop_objs.push_back(population[i].objectives);
            }
            trace->emit("nsga2", gen, front0, detail::best_per_objective(pop_objs));
        }
    }

    std::vector<Ind> result;
    for (std::size_t i = 0; i < population.size(); ++i) {
        if (rank[i] == 0) {
            population[i].fitness = 0.0;
            result.push_back(population[i]);
        }
    }
    return result;
}

template <typename GenomeType>
struct Spea2Result {
    ParetoArchive<GenomeType> archive;            // four-rule Pareto archive over the whole run
    std::vector<Individual<GenomeType>> population; // final population
};

// Standard SPEA2 loop with a fixed-size environmental-selection archive
// (params.archive_size). Every evaluated individual also feeds a four-rule
// ParetoArchive, which is what callers receive: the accumulated
// non-dominated set of the run. RNG stream layout matches run_nsga2.
template <EvolutionProblem P>
Spea2Result<typename P::Genome>
run_spea2(const P& problem, const EaParams& params,
          const std::vector<typename P::Genome>& seeds, const TraceSink* trace = nullptr) {
    using Ind = Individual<typename P::Genome>;
    params.validate();

    Rng master(params.rng_seed);
    Rng init_rng = master.child(0);
    std::vector<Ind> population = detail::initial_population(problem, params, seeds, init_rng);
    detail::evaluate_all(problem, population);

    ParetoArchive<typename P::Genome> pareto;
    for (const auto& ind : population)
        pareto.insert(ind);

    std::vector<Ind> archive; // SPEA2 working archive (may hold dominated fill)

    auto select_archive = [&](std::size_t generation) {
        std::vector<ObjectiveVector> union_objs;
        union_objs.reserve(population.size() + archive.size());
        for (const auto& ind : population)
            union_objs.push_back(ind.objectives);
        for (const auto& ind : archive)
            union_objs.push_back(ind.objectives);

        const auto fitness = spea2_assign_fitness(union_objs);
        const auto keep = spea2_environmental_selection(union_objs, fitness, params.archive_size);

        std::vector<Ind> next;
        next.reserve(keep.size());
        for (std::size_t idx : keep) {
            Ind ind = idx < population.size() ? population[idx] : archive[idx - population.size()];
            ind.fitness = fitness[idx];
            next.push_back(std::move(ind));
        }
        archive = std::move(next);

        if (trace) {
            std::size_t front0 = 0;
            for (const auto& ind : archive)
                if (ind.fitness < 1.0)
                    ++front0;
            trace->emit("spea2", generation, front0, detail::best_per_objective(union_objs));
        }
    };

    for (std::size_t gen = 0; gen < params.generations; ++gen) {
        select_archive(gen);
#ifdef EVOPORT_ARCHIVE_CHECKS
        assert(pareto.mutually_nondominated());
#endif
        Rng var_rng = master.child(1 + gen);
        auto better = [&](std::size_t a, std::size_t b) {
            return archive[a].fitness < archive[b].fitness;
        };
        std::vector<Ind> offspring;
        offspring.reserve(params.population_size);
        while (offspring.size() < params.population_size) {
            const std::size_t pa = binary_tournament(archive.size(), var_rng, better);
            const std::size_t pb = binary_tournament(archive.size(), var_rng, better);
            auto [c1, c2] = problem.crossover(archive[pa].genome, archive[pb].genome, var_rng);
            problem.mutate(c1, var_rng);
            problem.mutate(c2, var_rng);
            offspring.push_back(Ind{std::move(c1), {}, 0.0});
            if (offspring.size() < params.population_size)
                offspring.push_back(Ind{std::move(c2), {}, 0.0});
        }
        detail::evaluate_all(problem, offspring);
        population = std::move(offspring);
        for (const auto& ind : population)
            pareto.insert(ind);
    }
    select_archive(params.generations);
#ifdef EVOPORT_ARCHIVE_CHECKS
    assert(pareto.mutually_nondominated());
#endif

    return Spea2Result<typename P::Genome>{std::move(pareto), std::move(population)};
}

} // namespace evoport::moea
