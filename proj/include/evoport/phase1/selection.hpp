#pragma once

#include "evoport/data/universe.hpp"
#include "evoport/moea/core.hpp"
#include "evoport/moea/engine.hpp"
#include "evoport/moea/operators.hpp"
#include "evoport/moea/params.hpp"
#include "evoport/portfolio/types.hpp"
#include "evoport/rng.hpp"

#include <string>
#include <vector>

namespace evoport::phase1 {

enum class Mandate { large_cap, large_cap_growth };

Mandate parse_mandate(const std::string& text); // "large-cap" | "large-cap-growth"
std::string mandate_name(Mandate m);

// Stock-selection problem over 0/1 inclusion genomes. Objectives
// (minimization-oriented internally): negated total multi-factor score,
// negated mean market cap, and for the growth mandate the mean
// book-to-price. Constraint violations (cardinality, market-cap target,
// style ceiling) are added to every objective as penalty terms scaled to
// fixed per-objective ranges computed from the universe at construction,
// so evaluation stays pure and penalized values stay finite.
class SelectionProblem {
public:
    using Genome = moea::SelectionGenome;

    SelectionProblem(const data::UniverseSnapshot& universe, data::UniverseTargets targets,
                     Mandate mandate, const fin::ConstraintSet& constraints,
                     double mutation_rate, int seed_popcount = 156);

    std::size_t genome_length() const { return scores_.size(); }
    std::size_t objective_count() const { return mandate_ == Mandate::large_cap ? 2 : 3; }
    moea::ObjectiveVector evaluate(const Genome& genome) const;
    Genome random_genome(Rng& rng) const;
    std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b, Rng& rng) const;
    void mutate(Genome& genome, Rng& rng) const;

    // Exact feasibility test (not the penalty approximation): cardinality in
    // bounds, mean selected cap >= target, and for growth mean selected
    // book-to-price <= ceiling.
    bool feasible(const Genome& genome) const;
    double total_violation(const Genome& genome) const;

    // Natural-orientation objective values (total score, mean cap, mean b2p)
    // without penalties, for reporting.
    std::vector<double> natural_objectives(const Genome& genome) const;

    int min_cardinality() const { return min_n_; }
    int max_cardinality() const { return max_n_; }
    int init_popcount() const { return init_popcount_; }
    Mandate mandate() const { return mandate_; }
    const std::vector<std::string>& asset_ids() const { return asset_ids_; }

private:
    std::vector<std::string> asset_ids_;
    std::vector<double> scores_;
    std::vector<double> caps_;
    std::vector<double> b2ps_;
    Mandate mandate_;
    double cap_target_ = 0.0;
    double b2p_ceiling_ = 0.0;
    int min_n_ = 0;
    int max_n_ = 0;
    int init_popcount_ = 0;
    double mutation_rate_ = 0.0;
    double score_scale_ = 0.0; // per-objective penalty scales
    double cap_scale_ = 0.0;
    double b2p_scale_ = 0.0;
};

// Candidate portfolios produced by one Phase I run (the Pareto-efficient
// 0/1 selections), in the order they will be weighted by Phase II.
struct CandidatePortfolioSet {
    Date as_of{};
    std::vector<std::string> asset_ids; // genome column order
    std::vector<moea::SelectionGenome> genomes;
    std::vector<std::vector<double>> objectives; // natural orientation, per genome

    std::vector<std::string> selected_ids(std::size_t portfolio_index) const;
};

// Re-indexes prior-rebalance portfolios onto the current universe (departed
// assets dropped, holes not refilled) and fills the remaining slots with
// random genomes of exactly `init_popcount` set bits.
std::vector<moea::SelectionGenome>
seed_generation_zero(const SelectionProblem& problem,
                     const std::vector<std::vector<std::string>>& prior_holdings,
                     std::size_t population_size, Rng& rng);

// Full Phase I: NSGA-II, feasibility filtering of the final front,
// crowding-distance truncation to max_portfolios, then carry-over of prior
// portfolios that still pass this period's constraints.
CandidatePortfolioSet run_phase1(const data::UniverseSnapshot& universe,
                                 const data::UniverseTargets& targets, Mandate mandate,
                                 const fin::ConstraintSet& constraints,
                                 const std::vector<std::vector<std::string>>& prior_holdings,
                                 const moea::EaParams& params, std::size_t max_portfolios = 50,
                                 int seed_popcount = 156,
                                 const moea::TraceSink* trace = nullptr);

// Phase I files: one CSV of objective values, one CSV of 0/1 portfolios
// with the asset ids as header.
void write_phase1_outputs(const CandidatePortfolioSet& set, const std::string& objectives_path,
                          const std::string& portfolios_path);

CandidatePortfolioSet read_phase1_portfolios(const std::string& portfolios_path, Date as_of);

} // namespace evoport::phase1
