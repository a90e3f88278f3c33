#include "evoport/phase1/selection.hpp"

#include "evoport/data/csv.hpp"
#include "evoport/errors.hpp"
#include "evoport/portfolio/analytics.hpp"
#include "evoport/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace evoport::phase1 {

Mandate parse_mandate(const std::string& text) {
    if (text == "large-cap")
        return Mandate::large_cap;
    if (text == "large-cap-growth")
        return Mandate::large_cap_growth;
    throw std::invalid_argument("unknown mandate '" + text +
                                "' (expected large-cap or large-cap-growth)");
}

std::string mandate_name(Mandate m) {
    return m == Mandate::large_cap ? "large-cap" : "large-cap-growth";
}

SelectionProblem::SelectionProblem(const data::UniverseSnapshot& universe,
                                   data::UniverseTargets targets, Mandate mandate,
                                   const fin::ConstraintSet& constraints, double mutation_rate,
                                   int seed_popcount)
    : mandate_(mandate), cap_target_(targets.avg_market_cap_usd),
      b2p_ceiling_(targets.avg_book_to_price), mutation_rate_(mutation_rate) {
    if (universe.candidates.empty())
        throw EmptyUniverseError("SelectionProblem: empty universe");

    asset_ids_.reserve(universe.candidates.size());
    for (const auto& c : universe.candidates) {
        asset_ids_.push_back(c.asset_id);
        scores_.push_back(c.score);
        caps_.push_back(c.market_cap_usd);
        b2ps_.push_back(c.book_to_price);
    }

    const auto [min_n, max_n] = fin::cardinality_bounds(constraints.min_weight,
                                                        constraints.max_weight);
    min_n_ = min_n;
    max_n_ = max_n;
    init_popcount_ = std::min({seed_popcount, max_n_, static_cast<int>(asset_ids_.size())});

    // Fixed penalty scales: 10x an upper bound on each objective's range.
    double score_sum = 0.0, cap_max = 0.0, b2p_max = 0.0;
    for (std::size_t i = 0; i < scores_.size(); ++i) {
        score_sum += std::abs(scores_[i]);
        cap_max = std::max(cap_max, caps_[i]);
        b2p_max = std::max(b2p_max, b2ps_[i]);
    }
    score_scale_ = 10.0 * std::max(score_sum, 1.0);
    cap_scale_ = 10.0 * std::max(cap_max, 1.0);
    b2p_scale_ = 10.0 * std::max(b2p_max, 1.0);
}

double SelectionProblem::total_violation(const Genome& genome) const {
    int count = 0;
    double cap_sum = 0.0, b2p_sum = 0.0;
    for (std::size_t i = 0; i < genome.size(); ++i) {
        if (genome[i]) {
            ++count;
            cap_sum += caps_[i];
            b2p_sum += b2ps_[i];
        }
    }
    if (count == 0)
        return 4.0; // maximal penalty for the empty selection

    double violation = 0.0;
    if (count < min_n_)
        violation += static_cast<double>(min_n_ - count) / static_cast<double>(max_n_);
    else if (count > max_n_)
        violation += static_cast<double>(count - max_n_) / static_cast<double>(max_n_);

    const double mean_cap = cap_sum / count;
    if (mean_cap < cap_target_)
        violation += (cap_target_ - mean_cap) / cap_target_;

    if (mandate_ == Mandate::large_cap_growth) {
        const double mean_b2p = b2p_sum / count;
        if (mean_b2p > b2p_ceiling_)
            violation += (mean_b2p - b2p_ceiling_) / b2p_ceiling_;
    }
    return violation;
}

bool SelectionProblem::feasible(const Genome& genome) const {
    return total_violation(genome) == 0.0;
}

std::vector<double> SelectionProblem::natural_objectives(const Genome& genome) const {
    int count = 0;
    double score_sum = 0.0, cap_sum = 0.0, b2p_sum = 0.0;
    for (std::size_t i = 0; i < genome.size(); ++i) {
        if (genome[i]) {
            ++count;
            score_sum += scores_[i];
            cap_sum += caps_[i];
            b2p_sum += b2ps_[i];
        }
    }
    std::vector<double> values{score_sum, count ? cap_sum / count : 0.0};
    if (mandate_ == Mandate::large_cap_growth)
        values.push_back(count ? b2p_sum / count : 0.0);
    return values;
}

moea::ObjectiveVector SelectionProblem::evaluate(const Genome& genome) const {
    if (genome.size() != genome_length())
        throw std::invalid_argument("evaluate_selection: genome length mismatch");

    const double violation = total_violation(genome);
    const auto natural = natural_objectives(genome);

    moea::ObjectiveVector objectives;
    objectives.reserve(objective_count());
    objectives.push_back(-natural[0] + violation * score_scale_);
    objectives.push_back(-natural[1] + violation * cap_scale_);
    if (mandate_ == Mandate::large_cap_growth)
        objectives.push_back(natural[2] + violation * b2p_scale_);
    return objectives;
}

SelectionProblem::Genome SelectionProblem::random_genome(Rng& rng) const {
    const std::size_t n = genome_length();
    Genome genome(n, 0);
    // Partial Fisher-Yates: the first init_popcount_ entries of a shuffled
    // index array are the selected assets.
    std::vector<std::size_t> indices(n);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    for (int k = 0; k < init_popcount_; ++k) {
        const std::size_t j = k + rng.uniform_index(n - static_cast<std::size_t>(k));
        std::swap(indices[static_cast<std::size_t>(k)], indices[j]);
        genome[indices[static_cast<std::size_t>(k)]] = 1;
    }
    return genome;
}

std::pair<SelectionProblem::Genome, SelectionProblem::Genome>
SelectionProblem::crossover(const Genome& a, const Genome& b, Rng& rng) const {
    return moea::single_point_crossover(a, b, rng);
}

void SelectionProblem::mutate(Genome& genome, Rng& rng) const {
    genome = moea::bit_flip_mutation(genome, mutation_rate_, rng);
}

std::vector<std::string> CandidatePortfolioSet::selected_ids(std::size_t portfolio_index) const {
    std::vector<std::string> ids;
    const auto& genome = genomes.at(portfolio_index);
    for (std::size_t i = 0; i < genome.size(); ++i)
        if (genome[i])
            ids.push_back(asset_ids[i]);
    return ids;
}

std::vector<moea::SelectionGenome>
seed_generation_zero(const SelectionProblem& problem,
                     const std::vector<std::vector<std::string>>& prior_holdings,
                     std::size_t population_size, Rng& rng) {
    if (prior_holdings.size() > population_size)
        throw std::invalid_argument("seed_generation_zero: more priors than population slots");

    std::unordered_map<std::string, std::size_t> index_of;
    index_of.reserve(problem.asset_ids().size());
    for (std::size_t i = 0; i < problem.asset_ids().size(); ++i)
        index_of.emplace(problem.asset_ids()[i], i);

    std::vector<moea::SelectionGenome> seeds;
    seeds.reserve(population_size);
    for (const auto& holding : prior_holdings) {
        moea::SelectionGenome genome(problem.genome_length(), 0);
        for (const auto& id : holding) {
            auto it = index_of.find(id);
            if (it != index_of.end())
                genome[it->second] = 1; // departed assets drop out silently
        }
        seeds.push_back(std::move(genome));
    }
    while (seeds.size() < population_size)
        seeds.push_back(problem.random_genome(rng));
    return seeds;
}

CandidatePortfolioSet run_phase1(const data::UniverseSnapshot& universe,
                                 const data::UniverseTargets& targets, Mandate mandate,
                                 const fin::ConstraintSet& constraints,
                                 const std::vector<std::vector<std::string>>& prior_holdings,
                                 const moea::EaParams& params, std::size_t max_portfolios,
                                 int seed_popcount, const moea::TraceSink* trace) {
    SelectionProblem problem(universe, targets, mandate, constraints, params.mutation_rate,
                             seed_popcount);

    Rng seed_rng(mix_seed(params.rng_seed, 0x5eed));
    const auto seeds = seed_generation_zero(problem, prior_holdings, params.population_size,
                                            seed_rng);
    const auto front = moea::run_nsga2(problem, params, seeds, trace);

    // Keep only zero-violation genomes, deduplicated.
    std::vector<moea::SelectionGenome> feasible;
    std::set<moea::SelectionGenome> seen;
    double best_violation = std::numeric_limits<double>::max();
    for (const auto& ind : front) {
        const double v = problem.total_violation(ind.genome);
        best_violation = std::min(best_violation, v);
        if (v == 0.0 && seen.insert(ind.genome).second)
            feasible.push_back(ind.genome);
    }

    if (feasible.empty())
        throw Phase1InfeasibleError(
            "phase 1 produced no feasible portfolios for " + format_date(universe.as_of),
            "best remaining violation " + fmt_double(best_violation) + " over front of " +
                std::to_string(front.size()));

    if (feasible.size() > max_portfolios) {
        // Truncate by crowding distance over the penalized objectives,
        // keeping the most spread-out genomes; ties by lowest index.
        std::vector<moea::ObjectiveVector> objs;
        objs.reserve(feasible.size());
        for (const auto& g : feasible)
            objs.push_back(problem.evaluate(g));
        const auto dist = moea::crowding_distance(objs);
        std::vector<std::size_t> order(feasible.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
        order.resize(max_portfolios);
        std::sort(order.begin(), order.end());
        std::vector<moea::SelectionGenome> kept;
        kept.reserve(max_portfolios);
        for (std::size_t idx : order)
            kept.push_back(std::move(feasible[idx]));
        feasible = std::move(kept);
    }

    // Prior-rebalance portfolios that still pass this period's constraints
    // are appended (re-indexed to the current universe).
    std::unordered_map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < problem.asset_ids().size(); ++i)
        index_of.emplace(problem.asset_ids()[i], i);
    seen.clear();
    for (const auto& g : feasible)
        seen.insert(g);
    for (const auto& holding : prior_holdings) {
        moea::SelectionGenome genome(problem.genome_length(), 0);
        for (const auto& id : holding) {
            auto it = index_of.find(id);
            if (it != index_of.end())
                genome[it->second] = 1;
        }
        if (problem.feasible(genome) && seen.insert(genome).second)
            feasible.push_back(std::move(genome));
    }

    CandidatePortfolioSet set;
    set.as_of = universe.as_of;
    set.asset_ids = problem.asset_ids();
    for (auto& g : feasible) {
        set.objectives.push_back(problem.natural_objectives(g));
        set.genomes.push_back(std::move(g));
    }
    return set;
}

void write_phase1_outputs(const CandidatePortfolioSet& set, const std::string& objectives_path,
                          const std::string& portfolios_path) {
    if (set.genomes.empty())
        throw std::invalid_argument("write_phase1_outputs: empty portfolio set");

    const bool growth = !set.objectives.empty() && set.objectives.front().size() == 3;
    std::vector<std::string> obj_lines;
    obj_lines.reserve(set.genomes.size() + 1);
    std::string header = "portfolio,total_score,mean_market_cap_usd";
    if (growth)
        header += ",mean_book_to_price";
    obj_lines.push_back(header);
    for (std::size_t i = 0; i < set.objectives.size(); ++i) {
        std::string line = std::to_string(i);
        for (double v : set.objectives[i])
            line += "," + fmt_double(v);
        obj_lines.push_back(std::move(line));
    }
    data::write_lines(objectives_path, obj_lines);

    std::vector<std::string> pf_lines;
    pf_lines.reserve(set.genomes.size() + 1);
    std::string ids_header;
    for (std::size_t i = 0; i < set.asset_ids.size(); ++i) {
        if (i)
            ids_header += ',';
        ids_header += set.asset_ids[i];
    }
    pf_lines.push_back(std::move(ids_header));
    for (const auto& genome : set.genomes) {
        std::string line;
        line.reserve(genome.size() * 2);
        for (std::size_t i = 0; i < genome.size(); ++i) {
            if (i)
                line += ',';
            line += genome[i] ? '1' : '0';
        }
        pf_lines.push_back(std::move(line));
    }
    data::write_lines(portfolios_path, pf_lines);
}

CandidatePortfolioSet read_phase1_portfolios(const std::string& portfolios_path, Date as_of) {
    const data::CsvTable csv = data::read_csv(portfolios_path);
    CandidatePortfolioSet set;
    set.as_of = as_of;
    set.asset_ids = csv.header;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        moea::SelectionGenome genome;
        genome.reserve(csv.header.size());
        for (const auto& field : csv.rows[r]) {
            if (field == "0")
                genome.push_back(0);
            else if (field == "1")
                genome.push_back(1);
            else
                throw ParseError(portfolios_path, csv.row_lines[r],
                                 "expected 0/1 value, got '" + field + "'");
        }
        set.genomes.push_back(std::move(genome));
    }
    if (set.genomes.empty())
        throw DataError("'" + portfolios_path + "' contains no portfolios");
    return set;
}

} // namespace evoport::phase1
