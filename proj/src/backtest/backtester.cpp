#include "evoport/backtest/backtester.hpp"

#include "evoport/data/csv.hpp"
#include "evoport/data/returns.hpp"
#include "evoport/errors.hpp"
#include "evoport/portfolio/analytics.hpp"
#include "evoport/synth/generator.hpp"
#include "evoport/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <numeric>
#include <sstream>

namespace evoport::backtest {

PeriodPerformance period_performance(const fin::Portfolio& portfolio,
                                     const data::PriceTable& prices, std::size_t as_of_index,
                                     double cost_bps, double turnover_value) {
    PeriodPerformance perf;
    const std::size_t horizon = as_of_index + data::kForwardDays;
    for (const auto& [id, weight] : portfolio.holdings) {
        const auto entry = prices.last_price_at_or_before(id, as_of_index);
        if (!entry) {
            perf.forced_sales.push_back(id);
            continue; // no entry price at all: position contributes nothing
        }
        double exit_price;
        if (prices.complete_window(id, horizon, horizon)) {
            exit_price = prices.price_at(id, horizon);
        } else {
            const auto last = prices.last_price_at_or_before(id, horizon);
            exit_price = last.value_or(*entry);
            perf.forced_sales.push_back(id);
        }
        perf.gross += weight * (exit_price / *entry - 1.0);
    }
    perf.net = perf.gross - cost_bps * 1e-4 * turnover_value * 2.0;
    return perf;
}

double benchmark_period_return(const data::UniverseSnapshot& snapshot) {
    double cap_total = 0.0;
    for (const auto& c : snapshot.candidates)
        cap_total += c.market_cap_usd;
    if (cap_total <= 0.0)
        throw DataConsistencyError("benchmark_period_return: zero total market cap");
    const std::size_t horizon = snapshot.as_of_index + data::kForwardDays;
    double total = 0.0;
    for (const auto& c : snapshot.candidates) {
        const double p0 = snapshot.prices->price_at(c.asset_id, snapshot.as_of_index);
        const double p1 = snapshot.prices->price_at(c.asset_id, horizon);
        total += (c.market_cap_usd / cap_total) * (p1 / p0 - 1.0);
    }
    return total;
}

namespace {

double sample_std(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2)
        return 0.0;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                        static_cast<double>(n);
    double ss = 0.0;
    for (double v : values)
        ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

std::optional<double> trailing_window_return(const std::vector<double>& returns,
                                             std::size_t quarters) {
    if (returns.size() < quarters)
        return std::nullopt;
    double product = 1.0;
    for (std::size_t i = returns.size() - quarters; i < returns.size(); ++i)
        product *= 1.0 + returns[i];
    return product - 1.0;
}

} // namespace

AggregateMetrics aggregate_metrics(const std::vector<double>& net_returns,
                                   const std::vector<double>& benchmark_returns,
                                   const std::vector<double>& rf_quarterly) {
    if (net_returns.size() < 2)
        throw std::invalid_argument("aggregate_metrics: need at least two periods");
    if (benchmark_returns.size() != net_returns.size() || rf_quarterly.size() != net_returns.size())
        throw std::invalid_argument("aggregate_metrics: series length mismatch");

    AggregateMetrics agg;
    for (double r : net_returns)
        agg.cumulative_value_usd *= 1.0 + r;
    for (double r : benchmark_returns)
        agg.benchmark_cumulative_value_usd *= 1.0 + r;

    agg.return_1y = trailing_window_return(net_returns, 4);
    agg.return_3y = trailing_window_return(net_returns, 12);
    agg.return_5y = trailing_window_return(net_returns, 20);
    agg.return_10y = trailing_window_return(net_returns, 40);
    agg.benchmark_return_1y = trailing_window_return(benchmark_returns, 4);
    agg.benchmark_return_3y = trailing_window_return(benchmark_returns, 12);
    agg.benchmark_return_5y = trailing_window_return(benchmark_returns, 20);
    agg.benchmark_return_10y = trailing_window_return(benchmark_returns, 40);

    const std::size_t n = net_returns.size();
    double excess_mean = 0.0;
    std::vector<double> active(n);
    for (std::size_t i = 0; i < n; ++i) {
        excess_mean += net_returns[i] - rf_quarterly[i];
        active[i] = net_returns[i] - benchmark_returns[i];
    }
    excess_mean /= static_cast<double>(n);

    // Quarterly data: x4 for the mean, x2 (= sqrt(4)) for the volatility.
    const double vol = sample_std(net_returns);
    if (vol > 0.0) {
        agg.sharpe = (excess_mean * 4.0) / (vol * 2.0);
    } else {
        agg.sharpe = 0.0;
        agg.zero_volatility = true;
    }

    const double active_mean =
        std::accumulate(active.begin(), active.end(), 0.0) / static_cast<double>(n);
    const double tracking_error = sample_std(active);
    if (tracking_error > 0.0) {
        agg.information_ratio = (active_mean * 4.0) / (tracking_error * 2.0);
    } else {
        agg.information_ratio = 0.0;
        agg.zero_tracking_error = true;
    }
    return agg;
}

namespace {

// Buy-and-hold drift of the previous winner's weights from its rebalance
// date to the current one; turnover is measured against these.
fin::Portfolio drift_weights(const fin::Portfolio& portfolio, const data::PriceTable& prices,
                             std::size_t from_index, std::size_t to_index) {
    if (portfolio.empty())
        return portfolio;
    fin::Portfolio drifted;
    drifted.as_of = portfolio.as_of;
    double total = 0.0;
    for (const auto& [id, weight] : portfolio.holdings) {
        const auto p_from = prices.last_price_at_or_before(id, from_index);
        const auto p_to = prices.last_price_at_or_before(id, to_index);
        if (!p_from || !p_to)
            continue; // asset disappeared entirely: position worth nothing here
        const double value = weight * (*p_to / *p_from);
        drifted.holdings.emplace(id, value);
        total += value;
    }
    if (total <= 0.0)
        return fin::Portfolio{};
    for (auto& [id, weight] : drifted.holdings)
        weight /= total;
    return drifted;
}

struct PeriodContext {
    const BacktestConfig* config;
    std::shared_ptr<const data::PriceTable> prices;
    const moea::TraceSink* trace;
};

phase2::CandidateOutcome
weight_one_candidate(const PeriodContext& ctx, const data::UniverseSnapshot& full,
                     const data::UniverseSnapshot& filtered, const fin::ConstraintSet& constraints,
                     const phase1::CandidatePortfolioSet& candidates, std::size_t index,
                     const fin::Portfolio& previous, double risk_free, Rng period_rng) {
    phase2::CandidateOutcome outcome;
    const auto ids = candidates.selected_ids(index);
    const double factor =
        constraints.turnover_convention == fin::TurnoverConvention::two_way ? 2.0 : 1.0;
    try {
        auto stats = data::compute_statistics(
            data::build_returns_matrix(filtered, ids, filtered.as_of));
        phase2::WeightingProblem problem(ids, std::move(stats), previous, constraints, risk_free,
                                         ctx.config->strategy,
                                         ctx.config->phase2_params.mutation_rate,
                                         ctx.config->phase2_params.sbx_eta,
                                         ctx.config->phase2_params.mutation_eta);
        moea::EaParams params = ctx.config->phase2_params;
        params.rng_seed = period_rng.child(1 + index).seed();
        auto result = phase2::run_phase2(problem, params, ctx.trace);

        outcome.portfolio = result.best_sharpe;
        outcome.portfolio.as_of = filtered.as_of;
        outcome.sharpe = result.best_sharpe_value;
        outcome.turnover = result.best_turnover;
        outcome.usable = true;
        outcome.turnover_ok = outcome.turnover * factor <= constraints.turnover_budget() + 1e-12;
        outcome.market_cap_ok = fin::weighted_market_cap(outcome.portfolio, full.candidates) >=
                                constraints.market_cap_target_usd;

        if (!outcome.turnover_ok && !previous.empty()) {
            // MOEA IIa over the candidate's assets plus the previous winner's
            // still-tradable assets.
            std::vector<std::string> union_ids = ids;
            for (const auto& [id, w] : previous.holdings) {
                (void)w;
                if (std::find(union_ids.begin(), union_ids.end(), id) != union_ids.end())
                    continue;
                const bool known = std::any_of(full.candidates.begin(), full.candidates.end(),
                                               [&](const fin::Candidate& c) { return c.asset_id == id; });
                if (!known)
                    continue;
                const std::size_t start = full.as_of_index - data::kLookbackDays;
                const std::size_t end = full.as_of_index + data::kForwardDays;
                if (ctx.prices->complete_window(id, start, end))
                    union_ids.push_back(id);
            }
            std::sort(union_ids.begin(), union_ids.end());
            if (union_ids.size() > 286)
                union_ids.resize(286); // keep the returns window feasible

            auto union_stats = data::compute_statistics(
                data::build_returns_matrix(filtered, union_ids, filtered.as_of));
            phase2::WeightingProblem union_problem(
                union_ids, std::move(union_stats), previous, constraints, risk_free,
                phase2::WeightStrategy::ledger_sparse, ctx.config->repair_params.mutation_rate,
                ctx.config->repair_params.sbx_eta, ctx.config->repair_params.mutation_eta);
            moea::EaParams repair_params = ctx.config->repair_params;
            repair_params.rng_seed = period_rng.child(100000 + index).seed();
            auto repaired = phase2::repair_turnover(outcome.portfolio, union_problem,
                                                    repair_params, ctx.trace);
            outcome.repair_applied = true;
            if (repaired.success) {
                outcome.portfolio = repaired.portfolio;
                outcome.portfolio.as_of = filtered.as_of;
                outcome.sharpe = repaired.sharpe;
                outcome.turnover = repaired.turnover;
                outcome.turnover_ok =
                    outcome.turnover * factor <= constraints.turnover_budget() + 1e-12;
                outcome.market_cap_ok =
                    fin::weighted_market_cap(outcome.portfolio, full.candidates) >=
                    constraints.market_cap_target_usd;
            } else {
                outcome.note = "turnover repair failed";
            }
        }
    } catch (const InfeasibleError& e) {
        outcome.usable = false;
        outcome.note = e.what();
    } catch (const DataError& e) {
        outcome.usable = false;
        outcome.note = e.what();
    }
    return outcome;
}

} // namespace

BacktestReport run_backtest(const BacktestConfig& config) {
    config.validate();
    auto prices = std::make_shared<const data::PriceTable>(
        data::PriceTable::load(config.prices_path));

    std::ofstream trace_file;
    std::optional<moea::TraceSink> trace;
    const moea::TraceSink* trace_ptr = nullptr;

    BacktestReport report;
    fin::Portfolio previous_winner;
    std::size_t previous_index = 0;
    std::vector<std::vector<std::string>> prior_holdings;

    if (!config.trace_path.empty()) {
        trace_file.open(config.trace_path, std::ios::trunc);
        if (!trace_file)
            throw DataError("cannot write trace file '" + config.trace_path + "'");
    }

    Rng master(config.seed);

    for (std::size_t period = 0; period < config.rebalance_dates.size(); ++period) {
        const Date date = config.rebalance_dates[period];
        PeriodRow row;
        row.date = date;

        if (trace_file.is_open()) {
            trace.emplace(trace_file, "period " + format_date(date));
            trace_ptr = &*trace;
        }

        data::UniverseSnapshot full =
            data::load_universe(synth::score_file_path(config.scores_dir, date), prices, date);
        row.benchmark_return = benchmark_period_return(full);
        row.rf_quarter = data::load_risk_free(config.riskfree_path, date) *
                         static_cast<double>(data::kForwardDays);

        const fin::Portfolio prev_drifted =
            previous_winner.empty()
                ? fin::Portfolio{}
                : drift_weights(previous_winner, *prices, previous_index, full.as_of_index);

        fin::Portfolio winner;
        bool produced_new_winner = false;
        Rng period_rng = master.child(period);

        try {
            data::UniverseSnapshot filtered = data::filter_universe(
                full, config.score_floor, config.cap_fraction, config.cap_floor_usd);
            const auto targets = data::universe_targets(filtered);
            fin::ConstraintSet constraints = config.constraints;
            constraints.market_cap_target_usd = targets.avg_market_cap_usd;
            if (config.mandate == phase1::Mandate::large_cap_growth)
                constraints.book_to_price_ceiling = targets.avg_book_to_price;

            auto priors = prior_holdings;
            if (priors.size() > config.phase1_params.population_size)
                priors.resize(config.phase1_params.population_size);

            moea::EaParams phase1_params = config.phase1_params;
            phase1_params.rng_seed = period_rng.child(0).seed();
            const auto candidates = phase1::run_phase1(
                filtered, targets, config.mandate, constraints, priors, phase1_params,
                config.max_portfolios, config.seed_popcount, trace_ptr);

            const double risk_free = data::load_risk_free(config.riskfree_path, date);
            PeriodContext ctx{&config, prices, trace_ptr};

            std::vector<phase2::CandidateOutcome> outcomes(candidates.genomes.size());
            const int workers = std::min<int>(config.threads,
                                              static_cast<int>(candidates.genomes.size()));
            if (workers > 1) {
                std::atomic<std::size_t> next{0};
                std::vector<std::future<void>> tasks;
                tasks.reserve(static_cast<std::size_t>(workers));
                for (int w = 0; w < workers; ++w) {
                    tasks.push_back(std::async(std::launch::async, [&]() {
                        while (true) {
                            const std::size_t i = next.fetch_add(1);
                            if (i >= candidates.genomes.size())
                                return;
                            outcomes[i] = weight_one_candidate(ctx, full, filtered, constraints,
                                                               candidates, i, prev_drifted,
                                                               risk_free, period_rng);
                        }
                    }));
                }
                for (auto& t : tasks)
                    t.get();
            } else {
                for (std::size_t i = 0; i < candidates.genomes.size(); ++i)
                    outcomes[i] = weight_one_candidate(ctx, full, filtered, constraints,
                                                       candidates, i, prev_drifted, risk_free,
                                                       period_rng);
            }

            const std::size_t winner_index = phase2::select_winner(outcomes);
            const auto& best = outcomes[winner_index];
            winner = best.portfolio;
            winner.as_of = date;
            row.sharpe = best.sharpe;
            row.repair_applied = best.repair_applied;
            row.winner_source =
                best.market_cap_ok && best.turnover_ok ? "sharpe" : "best-turnover";
            if (!best.note.empty())
                row.note = best.note;
            produced_new_winner = true;

            prior_holdings.clear();
            for (std::size_t i = 0; i < candidates.genomes.size(); ++i)
                prior_holdings.push_back(candidates.selected_ids(i));

            const auto checked = fin::check_constraints(winner, constraints, prev_drifted,
                                                        full.candidates);
            row.holdings = checked.holdings_count;
            row.weighted_market_cap_usd = checked.weighted_market_cap_usd;
            row.cardinality_ok = checked.cardinality.pass;
            row.positions_ok = checked.positions.pass;
            row.market_cap_ok = checked.market_cap.pass;
            row.style_ok = checked.book_to_price.pass;
            row.turnover_ok = checked.turnover.pass;
            row.turnover = fin::turnover(prev_drifted, winner);
        } catch (const InfeasibleError& e) {
            // Hold the previous portfolio (drifted) and keep going.
            winner = prev_drifted;
            winner.as_of = date;
            row.winner_source = winner.empty() ? "none" : "held";
            row.note = e.what();
            row.turnover = 0.0;
            row.holdings = winner.holdings.size();
            row.cardinality_ok = row.positions_ok = row.market_cap_ok = row.style_ok = false;
            row.turnover_ok = true;
            std::cerr << "warning: " << format_date(date) << ": " << e.what()
                      << "; holding previous portfolio\n";
        }

        const auto perf = period_performance(winner, *prices, full.as_of_index,
                                             config.transaction_cost_bps, row.turnover);
        row.gross_return = perf.gross;
        row.net_return = perf.net;
        if (!perf.forced_sales.empty()) {
            if (!row.note.empty())
                row.note += "; ";
            row.note += "forced sales: " + std::to_string(perf.forced_sales.size());
        }

        report.periods.push_back(row);
        report.winners.push_back(winner);
        if (produced_new_winner || !winner.empty()) {
            previous_winner = winner;
            previous_index = full.as_of_index;
        }
        trace_ptr = nullptr;
        trace.reset();
    }

    if (report.periods.size() >= 2) {
        std::vector<double> net, bench, rf;
        for (const auto& row : report.periods) {
            net.push_back(row.net_return);
            bench.push_back(row.benchmark_return);
            rf.push_back(row.rf_quarter);
        }
        report.aggregate = aggregate_metrics(net, bench, rf);
    }
    for (const auto& row : report.periods)
        if (!row.turnover_ok)
            ++report.aggregate.turnover_breaches;
    return report;
}

namespace {

std::string csv_safe(std::string text) {
    std::replace(text.begin(), text.end(), ',', ';');
    return text;
}

nlohmann::json window_json(const std::optional<double>& value) {
    if (!value)
        return nullptr;
    return *value;
}

} // namespace

void write_report(const BacktestReport& report, const std::string& path_prefix) {
    const std::filesystem::path prefix(path_prefix);
    if (prefix.has_parent_path())
        std::filesystem::create_directories(prefix.parent_path());

    std::vector<std::string> lines;
    lines.emplace_back(
        "date,gross_return,net_return,benchmark_return,turnover,rf_quarter,sharpe,holdings,"
        "weighted_market_cap_usd,cardinality_ok,positions_ok,market_cap_ok,style_ok,turnover_ok,"
        "winner_source,repair_applied,note");
    for (const auto& row : report.periods) {
        std::string line = format_date(row.date);
        line += "," + fmt_double(row.gross_return);
        line += "," + fmt_double(row.net_return);
        line += "," + fmt_double(row.benchmark_return);
        line += "," + fmt_double(row.turnover);
        line += "," + fmt_double(row.rf_quarter);
        line += "," + fmt_double(row.sharpe);
        line += "," + std::to_string(row.holdings);
        line += "," + fmt_double(row.weighted_market_cap_usd);
        line += std::string(",") + (row.cardinality_ok ? "1" : "0");
        line += std::string(",") + (row.positions_ok ? "1" : "0");
        line += std::string(",") + (row.market_cap_ok ? "1" : "0");
        line += std::string(",") + (row.style_ok ? "1" : "0");
        line += std::string(",") + (row.turnover_ok ? "1" : "0");
        line += "," + row.winner_source;
        line += std::string(",") + (row.repair_applied ? "1" : "0");
        line += "," + csv_safe(row.note);
        lines.push_back(std::move(line));
    }
    data::write_lines(path_prefix + "_periods.csv", lines);

    nlohmann::json summary;
    summary["periods"] = report.periods.size();
    if (!report.periods.empty()) {
        summary["start"] = format_date(report.periods.front().date);
        summary["end"] = format_date(report.periods.back().date);
    }
    summary["cumulative_value_usd"] = report.aggregate.cumulative_value_usd;
    summary["benchmark_cumulative_value_usd"] = report.aggregate.benchmark_cumulative_value_usd;
    summary["returns"] = {{"1y", window_json(report.aggregate.return_1y)},
                          {"3y", window_json(report.aggregate.return_3y)},
                          {"5y", window_json(report.aggregate.return_5y)},
                          {"10y", window_json(report.aggregate.return_10y)}};
    summary["benchmark_returns"] = {{"1y", window_json(report.aggregate.benchmark_return_1y)},
                                    {"3y", window_json(report.aggregate.benchmark_return_3y)},
                                    {"5y", window_json(report.aggregate.benchmark_return_5y)},
                                    {"10y", window_json(report.aggregate.benchmark_return_10y)}};
    summary["sharpe_ratio"] = report.aggregate.sharpe;
    summary["information_ratio"] = report.aggregate.information_ratio;
    summary["zero_tracking_error"] = report.aggregate.zero_tracking_error;
    summary["zero_volatility"] = report.aggregate.zero_volatility;
    summary["turnover_breaches"] = report.aggregate.turnover_breaches;
    nlohmann::json breaches = nlohmann::json::array();
    for (const auto& row : report.periods)
        if (!row.turnover_ok)
            breaches.push_back(format_date(row.date));
    summary["turnover_breach_dates"] = breaches;
    nlohmann::json infeasible = nlohmann::json::array();
    for (const auto& row : report.periods)
        if (row.winner_source == "held" || row.winner_source == "none")
            infeasible.push_back(format_date(row.date));
    summary["infeasible_periods"] = infeasible;

    std::ofstream json_out(path_prefix + "_summary.json", std::ios::trunc);
    if (!json_out)
        throw DataError("cannot write '" + path_prefix + "_summary.json'");
    json_out << summary.dump(2) << '\n';

    const std::string holdings_dir = path_prefix + "_holdings";
    std::filesystem::create_directories(holdings_dir);
    for (std::size_t i = 0; i < report.winners.size(); ++i) {
        if (report.winners[i].empty())
            continue;
        std::vector<std::string> h;
        h.emplace_back("asset_id,weight");
        for (const auto& [id, w] : report.winners[i].holdings)
            h.push_back(id + "," + fmt_double(w));
        data::write_lines(holdings_dir + "/" + format_date(report.periods[i].date) + ".csv", h);
    }
}

std::vector<PeriodRow> read_periods_csv(const std::string& path) {
    const data::CsvTable csv = data::read_csv(path);
    const std::size_t c_date = csv.column("date");
    const std::size_t c_gross = csv.column("gross_return");
    const std::size_t c_net = csv.column("net_return");
    const std::size_t c_bench = csv.column("benchmark_return");
    const std::size_t c_turnover = csv.column("turnover");
    const std::size_t c_rf = csv.column("rf_quarter");
    const std::size_t c_tok = csv.column("turnover_ok");

    std::vector<PeriodRow> rows;
    for (const auto& fields : csv.rows) {
        PeriodRow row;
        row.date = parse_date(fields[c_date]);
        row.gross_return = parse_double(fields[c_gross]);
        row.net_return = parse_double(fields[c_net]);
        row.benchmark_return = parse_double(fields[c_bench]);
        row.turnover = parse_double(fields[c_turnover]);
        row.rf_quarter = parse_double(fields[c_rf]);
        row.turnover_ok = fields[c_tok] == "1";
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw DataError("'" + path + "' contains no periods");
    return rows;
}

std::string render_summary(const BacktestReport& report) {
    std::ostringstream out;
    const auto& agg = report.aggregate;
    out << "periods: " << report.periods.size() << "\n";
    auto pct = [](std::optional<double> v) {
        return v ? fmt_double_fixed(*v * 100.0, 1) + "%" : std::string("n/a");
    };
    out << "            1y      3y      5y      10y\n";
    out << "portfolio   " << pct(agg.return_1y) << "   " << pct(agg.return_3y) << "   "
        << pct(agg.return_5y) << "   " << pct(agg.return_10y) << "\n";
    out << "benchmark   " << pct(agg.benchmark_return_1y) << "   " << pct(agg.benchmark_return_3y)
        << "   " << pct(agg.benchmark_return_5y) << "   " << pct(agg.benchmark_return_10y) << "\n";
    out << "cumulative value of 10,000 USD: " << fmt_double_fixed(agg.cumulative_value_usd, 0)
        << " (benchmark " << fmt_double_fixed(agg.benchmark_cumulative_value_usd, 0) << ")\n";
    out << "sharpe ratio: " << fmt_double_fixed(agg.sharpe, 2)
        << "  information ratio: " << fmt_double_fixed(agg.information_ratio, 2);
    if (agg.zero_tracking_error)
        out << " (zero tracking error)";
    out << "\n";
    out << "turnover breaches: " << agg.turnover_breaches << "\n";
    return out.str();
}

} // namespace evoport::backtest
