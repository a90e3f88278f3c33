#include "evoport/phase2/weighting.hpp"

#include "evoport/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>

namespace evoport::phase2 {

namespace {

constexpr double kLedgerDone = 1e-12;    // stop redistributing below this
constexpr double kLedgerSuccess = 1e-9;  // residual above this is a failed repair
constexpr int kMaxRedistributionPasses = 100;

// Evenly divides the ledger among holdings that can absorb their share
// without leaving [min_w, max_w]; recipients are processed in ascending
// asset order (ascending index, since asset ids are sorted).
void redistribute(moea::WeightGenome& w, double& ledger, double min_w, double max_w,
                  bool zero_stays_zero) {
    for (int pass = 0; pass < kMaxRedistributionPasses && std::abs(ledger) > kLedgerDone; ++pass) {
        std::vector<std::size_t> eligible;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (zero_stays_zero && w[i] == 0.0)
                continue;
            if (ledger > 0.0 ? w[i] < max_w - 1e-15 : w[i] > min_w + 1e-15)
                eligible.push_back(i);
        }
        if (eligible.empty())
            return;
        const double share = ledger / static_cast<double>(eligible.size());
        for (std::size_t i : eligible) {
            const double delta = share > 0.0 ? std::min(share, max_w - w[i])
                                             : std::max(share, min_w - w[i]);
            w[i] += delta;
            ledger -= delta;
        }
    }
}

void require_unit_sum(const moea::WeightGenome& weights, const char* who) {
    double sum = 0.0;
    for (double v : weights)
        sum += v;
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument(std::string(who) + ": input weights must sum to 1");
}

constexpr double kInfeasiblePenalty = 1e6;

} // namespace

moea::WeightGenome normalize_weights(const moea::WeightGenome& raw) {
    double sum = 0.0;
    for (double v : raw) {
        if (v < 0.0)
            throw std::invalid_argument("normalize_weights: negative entry");
        sum += v;
    }
    if (sum <= 0.0)
        throw DegenerateGenomeError("normalize_weights: all-zero weight genome");
    moea::WeightGenome out = raw;
    for (double& v : out)
        v /= sum;
    return out;
}

double RepairResult::position_violation(double min_w, double max_w, bool allow_zero) const {
    double violation = residual;
    for (double w : weights) {
        if (w == 0.0) {
            if (!allow_zero)
                violation += min_w;
            continue;
        }
        if (w < min_w)
            violation += min_w - w;
        else if (w > max_w)
            violation += w - max_w;
    }
    return violation;
}

RepairResult repair_weights_strategy1(const moea::WeightGenome& weights, double min_w,
                                      double max_w) {
    require_unit_sum(weights, "repair_weights_strategy1");
    RepairResult result;
    result.weights = weights;
    double ledger = 0.0;
    const double half_min = 0.5 * min_w;
    for (double& w : result.weights) {
        if (w > max_w) {
            ledger += w - max_w;
            w = max_w;
        } else if (w >= min_w) {
            // in bounds
        } else if (w > half_min) {
            ledger += w - min_w;
            w = min_w;
        } else {
            ledger += w;
            w = 0.0;
        }
    }
    redistribute(result.weights, ledger, min_w, max_w, /*zero_stays_zero=*/true);
    result.residual = std::abs(ledger);
    result.success = result.residual < kLedgerSuccess;
    return result;
}

RepairResult repair_weights_strategy2(const moea::WeightGenome& weights, double min_w,
                                      double max_w) {
    require_unit_sum(weights, "repair_weights_strategy2");
    const double n = static_cast<double>(weights.size());
    if (n * min_w > 1.0 + 1e-12 || n * max_w < 1.0 - 1e-12)
        throw InfeasibleCardinalityError(
            "repair_weights_strategy2: " + std::to_string(weights.size()) +
            " assets cannot all hold a weight in [" + std::to_string(min_w) + ", " +
            std::to_string(max_w) + "] summing to 1");
    RepairResult result;
    result.weights = weights;
    double ledger = 0.0;
    for (double& w : result.weights) {
        const double clamped = std::clamp(w, min_w, max_w);
        ledger += w - clamped;
        w = clamped;
    }
    redistribute(result.weights, ledger, min_w, max_w, /*zero_stays_zero=*/false);
    result.residual = std::abs(ledger);
    result.success = result.residual < kLedgerSuccess;
    return result;
}

RepairResult repair_weights(const moea::WeightGenome& weights, WeightStrategy strategy,
                            double min_w, double max_w) {
    return strategy == WeightStrategy::ledger_sparse ? repair_weights_strategy1(weights, min_w, max_w)
                                                     : repair_weights_strategy2(weights, min_w, max_w);
}

WeightingProblem::WeightingProblem(std::vector<std::string> asset_ids, fin::ReturnStatistics stats,
                                   const fin::Portfolio& previous_winner,
                                   fin::ConstraintSet constraints, double risk_free_daily,
                                   WeightStrategy strategy, double mutation_rate, double sbx_eta,
                                   double mutation_eta)
    : asset_ids_(std::move(asset_ids)), stats_(std::move(stats)),
      constraints_(std::move(constraints)), risk_free_(risk_free_daily), strategy_(strategy),
      mutation_rate_(mutation_rate), sbx_eta_(sbx_eta), mutation_eta_(mutation_eta) {
    if (asset_ids_.empty())
        throw std::invalid_argument("WeightingProblem: empty asset list");
    if (stats_.mean_returns.size() != static_cast<Eigen::Index>(asset_ids_.size()) ||
        stats_.covariance.rows() != stats_.covariance.cols() ||
        stats_.covariance.rows() != stats_.mean_returns.size())
        throw std::invalid_argument("WeightingProblem: statistics dimension mismatch");
    assert(std::is_sorted(asset_ids_.begin(), asset_ids_.end()));

    if (strategy_ == WeightStrategy::ledger_full) {
        const double n = static_cast<double>(asset_ids_.size());
        if (n * constraints_.min_weight > 1.0 + 1e-12 || n * constraints_.max_weight < 1.0 - 1e-12)
            throw InfeasibleCardinalityError(
                "WeightingProblem: strategy 2 infeasible for " +
                std::to_string(asset_ids_.size()) + " assets under the position bounds");
    }

    previous_aligned_.assign(asset_ids_.size(), 0.0);
    has_previous_ = !previous_winner.empty();
    if (has_previous_) {
        double inside = 0.0;
        for (std::size_t i = 0; i < asset_ids_.size(); ++i) {
            auto it = previous_winner.holdings.find(asset_ids_[i]);
            if (it != previous_winner.holdings.end()) {
                previous_aligned_[i] = it->second;
                inside += std::abs(it->second);
            }
        }
        double total = 0.0;
        for (const auto& [id, w] : previous_winner.holdings)
            total += std::abs(w);
        previous_outside_abs_ = total - inside;
    }
}

WeightingProblem::Decoded WeightingProblem::decode(const Genome& genome) const {
    double sum = 0.0;
    for (double v : genome)
        sum += v;
    if (sum <= 0.0) {
        // Degenerate all-zero genome: report as a failed repair rather than
        // throwing inside the evaluation loop.
        Decoded d;
        d.weights = genome;
        d.repair_ok = false;
        d.position_violation = 1.0;
        return d;
    }
    moea::WeightGenome normalized = genome;
    for (double& v : normalized)
        v /= sum;
    RepairResult repaired = repair_weights(normalized, strategy_, constraints_.min_weight,
                                           constraints_.max_weight);
    Decoded d;
    d.repair_ok = repaired.success;
    d.position_violation = repaired.success
                               ? 0.0
                               : repaired.position_violation(constraints_.min_weight,
                                                             constraints_.max_weight,
                                                             strategy_ == WeightStrategy::ledger_sparse);
    d.weights = std::move(repaired.weights);
    return d;
}

double WeightingProblem::mean_return(const moea::WeightGenome& weights) const {
    Eigen::Map<const Eigen::VectorXd> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
    return w.dot(stats_.mean_returns);
}

double WeightingProblem::variance(const moea::WeightGenome& weights) const {
    Eigen::Map<const Eigen::VectorXd> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
    return w.dot(stats_.covariance * w);
}

double WeightingProblem::turnover_vs_previous(const moea::WeightGenome& weights) const {
    if (!has_previous_)
        return 0.0;
    double sum = previous_outside_abs_;
    for (std::size_t i = 0; i < weights.size(); ++i)
        sum += std::abs(weights[i] - previous_aligned_[i]);
    return 0.5 * sum;
}

std::optional<double> WeightingProblem::sharpe(const moea::WeightGenome& weights) const {
    const double var = variance(weights);
    if (var <= 0.0)
        return std::nullopt;
    return fin::sharpe_ratio(mean_return(weights), var, risk_free_, fin::kTradingDaysPerYear);
}

moea::ObjectiveVector WeightingProblem::evaluate(const Genome& genome) const {
    const Decoded d = decode(genome);
    return {-mean_return(d.weights), variance(d.weights), turnover_vs_previous(d.weights),
            d.position_violation};
}

WeightingProblem::Genome WeightingProblem::random_genome(Rng& rng) const {
    Genome genome(asset_ids_.size());
    while (true) {
        double sum = 0.0;
        for (double& v : genome) {
            v = rng.uniform01();
            sum += v;
        }
        if (sum > 0.0)
            return genome;
    }
}

std::pair<WeightingProblem::Genome, WeightingProblem::Genome>
WeightingProblem::crossover(const Genome& a, const Genome& b, Rng& rng) const {
    return moea::sbx_crossover(a, b, sbx_eta_, {0.0, 1.0}, rng);
}

void WeightingProblem::mutate(Genome& genome, Rng& rng) const {
    genome = moea::polynomial_mutation(genome, mutation_rate_, mutation_eta_, {0.0, 1.0}, rng);
    double sum = 0.0;
    for (double v : genome)
        sum += v;
    if (sum <= 0.0)
        genome = random_genome(rng);
}

fin::Portfolio WeightingProblem::to_portfolio(const moea::WeightGenome& weights, Date as_of) const {
    fin::Portfolio p;
    p.as_of = as_of;
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (weights[i] > 0.0)
            p.holdings.emplace(asset_ids_[i], weights[i]);
    return p;
}

moea::WeightGenome WeightingProblem::align_previous_winner() const {
    if (!has_previous_)
        return {};
    double sum = 0.0;
    for (double v : previous_aligned_)
        sum += v;
    if (sum <= 0.0)
        return {};
    moea::WeightGenome seed = previous_aligned_;
    for (double& v : seed)
        v /= sum;
    return seed;
}

Phase2Result run_phase2(const WeightingProblem& problem, const moea::EaParams& params,
                        const moea::TraceSink* trace) {
    moea::EaParams run_params = params;
    run_params.archive_size = params.population_size; // archive size = prior population size

    std::vector<moea::WeightGenome> seeds;
    if (auto seed = problem.align_previous_winner(); !seed.empty())
        seeds.push_back(std::move(seed));

    auto spea2 = moea::run_spea2(problem, run_params, seeds, trace);

    Phase2Result result;
    result.pareto_set.reserve(spea2.archive.size());
    std::size_t best_index = spea2.archive.size();
    double best_sharpe = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < spea2.archive.members().size(); ++i) {
        const auto& member = spea2.archive.members()[i];
        const auto decoded = problem.decode(member.genome);
        result.pareto_set.emplace_back(decoded.weights, member.objectives);
        if (member.objectives[3] != 0.0)
            continue; // repair failed for this member
        const auto sharpe = problem.sharpe(decoded.weights);
        if (sharpe && *sharpe > best_sharpe) {
            best_sharpe = *sharpe;
            best_index = i;
        }
    }
    if (best_index == spea2.archive.size())
        throw Phase2InfeasibleError("phase 2: every archive member failed weight repair");

    const auto& winner = result.pareto_set[best_index];
    result.best_sharpe = problem.to_portfolio(winner.first, Date{});
    result.best_sharpe_value = best_sharpe;
    result.best_turnover = winner.second[2];
    return result;
}

namespace {

// SPEA2 problem for MOEA IIa: two objectives, negated Sharpe and turnover,
// over strategy-1 repaired weights (holdings may go to zero).
class TurnoverRepairProblem {
public:
    using Genome = moea::WeightGenome;

    explicit TurnoverRepairProblem(const WeightingProblem& base) : base_(&base) {}

    std::size_t genome_length() const { return base_->genome_length(); }
    std::size_t objective_count() const { return 2; }

    moea::ObjectiveVector evaluate(const Genome& genome) const {
        double sum = 0.0;
        for (double v : genome)
            sum += v;
        if (sum <= 0.0)
            return {kInfeasiblePenalty, kInfeasiblePenalty};
        moea::WeightGenome normalized = genome;
        for (double& v : normalized)
            v /= sum;
        const auto repaired = repair_weights_strategy1(normalized, base_->constraints().min_weight,
                                                       base_->constraints().max_weight);
        if (!repaired.success) {
            const double v = repaired.position_violation(base_->constraints().min_weight,
                                                         base_->constraints().max_weight, true);
            return {kInfeasiblePenalty + v, kInfeasiblePenalty + v};
        }
        const auto sharpe = base_->sharpe(repaired.weights);
        if (!sharpe)
            return {kInfeasiblePenalty, base_->turnover_vs_previous(repaired.weights)};
        return {-*sharpe, base_->turnover_vs_previous(repaired.weights)};
    }

    Genome random_genome(Rng& rng) const { return base_->random_genome(rng); }

    std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b, Rng& rng) const {
        return base_->crossover(a, b, rng);
    }

    void mutate(Genome& genome, Rng& rng) const { base_->mutate(genome, rng); }

    WeightingProblem::Decoded decode_sparse(const Genome& genome) const {
        double sum = 0.0;
        for (double v : genome)
            sum += v;
        WeightingProblem::Decoded d;
        if (sum <= 0.0) {
            d.weights = genome;
            d.repair_ok = false;
            d.position_violation = 1.0;
            return d;
        }
        moea::WeightGenome normalized = genome;
        for (double& v : normalized)
            v /= sum;
        auto repaired = repair_weights_strategy1(normalized, base_->constraints().min_weight,
                                                 base_->constraints().max_weight);
        d.repair_ok = repaired.success;
        d.position_violation =
            repaired.success ? 0.0
                             : repaired.position_violation(base_->constraints().min_weight,
                                                           base_->constraints().max_weight, true);
        d.weights = std::move(repaired.weights);
        return d;
    }

private:
    const WeightingProblem* base_;
};

double convention_factor(const fin::ConstraintSet& constraints) {
    return constraints.turnover_convention == fin::TurnoverConvention::two_way ? 2.0 : 1.0;
}

} // namespace

TurnoverRepairOutcome repair_turnover(const fin::Portfolio& best_sharpe,
                                      const WeightingProblem& problem,
                                      const moea::EaParams& params,
                                      const moea::TraceSink* trace) {
    const double budget = problem.constraints().turnover_budget();
    const double factor = convention_factor(problem.constraints());

    // Align the input portfolio to the problem's asset list.
    moea::WeightGenome current(problem.genome_length(), 0.0);
    for (std::size_t i = 0; i < problem.asset_ids().size(); ++i) {
        auto it = best_sharpe.holdings.find(problem.asset_ids()[i]);
        if (it != best_sharpe.holdings.end())
            current[i] = it->second;
    }

    TurnoverRepairOutcome outcome;
    const double current_turnover = problem.turnover_vs_previous(current);
    if (current_turnover * factor <= budget + 1e-12) {
        // Already feasible: return unchanged.
        outcome.portfolio = best_sharpe;
        outcome.sharpe = problem.sharpe(current).value_or(0.0);
        outcome.turnover = current_turnover;
        outcome.success = true;
        return outcome;
    }

    TurnoverRepairProblem repair_problem(problem);
    std::vector<moea::WeightGenome> seeds;
    seeds.push_back(current);
    if (auto prev = problem.align_previous_winner(); !prev.empty())
        seeds.push_back(std::move(prev));

    auto spea2 = moea::run_spea2(repair_problem, params, seeds, trace);

    std::size_t best_index = spea2.archive.size();
    double best_sharpe_value = -std::numeric_limits<double>::infinity();
    std::vector<WeightingProblem::Decoded> decoded;
    decoded.reserve(spea2.archive.size());
    for (std::size_t i = 0; i < spea2.archive.members().size(); ++i) {
        const auto& member = spea2.archive.members()[i];
        decoded.push_back(repair_problem.decode_sparse(member.genome));
        if (!decoded.back().repair_ok)
            continue;
        const double to = problem.turnover_vs_previous(decoded.back().weights);
        if (to * factor > budget + 1e-12)
            continue;
        const auto sharpe = problem.sharpe(decoded.back().weights);
        if (sharpe && *sharpe > best_sharpe_value) {
            best_sharpe_value = *sharpe;
            best_index = i;
        }
    }
    if (best_index == spea2.archive.size()) {
        outcome.success = false;
        outcome.portfolio = best_sharpe;
        outcome.sharpe = problem.sharpe(current).value_or(0.0);
        outcome.turnover = current_turnover;
        return outcome;
    }
    outcome.success = true;
    outcome.portfolio = problem.to_portfolio(decoded[best_index].weights, best_sharpe.as_of);
    outcome.sharpe = best_sharpe_value;
    outcome.turnover = problem.turnover_vs_previous(decoded[best_index].weights);
    return outcome;
}

std::size_t select_winner(const std::vector<CandidateOutcome>& results) {
    if (results.empty())
        throw std::invalid_argument("select_winner: empty results");

    std::size_t best = results.size();
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        if (!r.usable || !r.market_cap_ok || !r.turnover_ok)
            continue;
        if (best == results.size() || r.sharpe > results[best].sharpe)
            best = i;
    }
    if (best != results.size())
        return best;

    // No candidate passed: the portfolio with the best (lowest) turnover wins.
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i].usable)
            continue;
        if (best == results.size() || results[i].turnover < results[best].turnover)
            best = i;
    }
    if (best == results.size())
        throw Phase2InfeasibleError("select_winner: no usable candidate portfolios");
    return best;
}

} // namespace evoport::phase2
