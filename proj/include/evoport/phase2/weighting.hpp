#pragma once

#include "evoport/moea/engine.hpp"
#include "evoport/moea/operators.hpp"
#include "evoport/moea/params.hpp"
#include "evoport/portfolio/analytics.hpp"
#include "evoport/portfolio/types.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace evoport::phase2 {

enum class WeightStrategy {
    ledger_sparse = 1, // strategy #1: weights below half the minimum drop to zero
    ledger_full = 2,   // strategy #2: every asset keeps a position in [min, max]
};

// Divides by the sum; throws DegenerateGenomeError on an all-zero input
// (the caller replaces such genomes with fresh random ones).
moea::WeightGenome normalize_weights(const moea::WeightGenome& raw);

struct RepairResult {
    moea::WeightGenome weights;
    bool success = true;
    double residual = 0.0; // |ledger| left undistributed on failure

    // Summed bound violations of the final vector plus the residual;
    // zero exactly when the repair succeeded.
    double position_violation(double min_w, double max_w, bool allow_zero) const;
};

// Strategy #1: entries in (min/2, min) round up to min, entries <= min/2
// round to zero, entries above max clip to max. The net adjustment is
// tracked in a ledger and redistributed evenly among holdings that can
// absorb their share without leaving [min, max].
RepairResult repair_weights_strategy1(const moea::WeightGenome& weights, double min_w = 0.0035,
                                      double max_w = 0.04);

// Strategy #2: every entry clamps into [min, max]; same ledger
// redistribution. Requires N*min <= 1 <= N*max, otherwise no weight vector
// can satisfy the bounds and InfeasibleCardinalityError is thrown.
RepairResult repair_weights_strategy2(const moea::WeightGenome& weights, double min_w = 0.0035,
                                      double max_w = 0.04);

RepairResult repair_weights(const moea::WeightGenome& weights, WeightStrategy strategy,
                            double min_w, double max_w);

// Weighting problem for one Phase I candidate portfolio: four objectives
// (negated mean return, variance, turnover against the previous winner,
// position-violation magnitude). Genomes are raw weights in [0,1]; each
// evaluation normalizes and repairs them per the configured strategy.
class WeightingProblem {
public:
    using Genome = moea::WeightGenome;

    WeightingProblem(std::vector<std::string> asset_ids, fin::ReturnStatistics stats,
                     const fin::Portfolio& previous_winner, fin::ConstraintSet constraints,
                     double risk_free_daily, WeightStrategy strategy, double mutation_rate,
                     double sbx_eta = 15.0, double mutation_eta = 20.0);

    std::size_t genome_length() const { return asset_ids_.size(); }
    std::size_t objective_count() const { return 4; }
    moea::ObjectiveVector evaluate(const Genome& genome) const;
    Genome random_genome(Rng& rng) const;
    std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b, Rng& rng) const;
    void mutate(Genome& genome, Rng& rng) const;

    struct Decoded {
        moea::WeightGenome weights;
        bool repair_ok = true;
        double position_violation = 0.0;
    };
    Decoded decode(const Genome& genome) const;

    double mean_return(const moea::WeightGenome& weights) const;
    double variance(const moea::WeightGenome& weights) const;
    double turnover_vs_previous(const moea::WeightGenome& weights) const;
    std::optional<double> sharpe(const moea::WeightGenome& weights) const;

    fin::Portfolio to_portfolio(const moea::WeightGenome& weights, Date as_of) const;
    moea::WeightGenome align_previous_winner() const; // restricted + renormalized, empty if none

    const std::vector<std::string>& asset_ids() const { return asset_ids_; }
    const fin::ConstraintSet& constraints() const { return constraints_; }
    double risk_free_daily() const { return risk_free_; }
    bool has_previous() const { return has_previous_; }
    WeightStrategy strategy() const { return strategy_; }

private:
    std::vector<std::string> asset_ids_;
    fin::ReturnStatistics stats_;
    fin::ConstraintSet constraints_;
    std::vector<double> previous_aligned_; // previous winner weight per asset, 0 if absent
    double previous_outside_abs_ = 0.0;    // previous weight mass on assets not tradable here
    bool has_previous_ = false;
    double risk_free_ = 0.0;
    WeightStrategy strategy_;
    double mutation_rate_;
    double sbx_eta_;
    double mutation_eta_;
};

struct Phase2Result {
    std::vector<std::pair<moea::WeightGenome, moea::ObjectiveVector>> pareto_set;
    fin::Portfolio best_sharpe;
    double best_sharpe_value = 0.0;
    double best_turnover = 0.0;
};

// SPEA2 run (archive size = population size) seeded with the previous
// winner when available; returns the accumulated Pareto set and the
// position-feasible archive member with the best Sharpe ratio.
Phase2Result run_phase2(const WeightingProblem& problem, const moea::EaParams& params,
                        const moea::TraceSink* trace = nullptr);

struct TurnoverRepairOutcome {
    fin::Portfolio portfolio;
    double sharpe = 0.0;
    double turnover = 0.0;
    bool success = false;
};

// MOEA IIa: when the best-Sharpe portfolio fails only the turnover budget,
// trades Sharpe against turnover over weight perturbations spanning the
// portfolio's assets plus the previous winner's tradable assets. Holdings
// may go to zero. Returns the highest-Sharpe archive member within budget.
TurnoverRepairOutcome repair_turnover(const fin::Portfolio& best_sharpe,
                                      const WeightingProblem& problem,
                                      const moea::EaParams& params,
                                      const moea::TraceSink* trace = nullptr);

struct CandidateOutcome {
    fin::Portfolio portfolio;
    double sharpe = 0.0;
    double turnover = 0.0;
    bool market_cap_ok = false;
    bool turnover_ok = false;
    bool usable = false; // false when phase 2 was infeasible for this candidate
    bool repair_applied = false;
    std::string note;
};

// Phase II step 10: the best-Sharpe portfolio among candidates passing the
// market-cap and turnover checks; when none pass, the lowest-turnover
// usable portfolio. Ties break by lowest candidate index.
std::size_t select_winner(const std::vector<CandidateOutcome>& results);

} // namespace evoport::phase2
