#pragma once

#include "evoport/backtest/config.hpp"
#include "evoport/data/universe.hpp"
#include "evoport/portfolio/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace evoport::backtest {

struct PeriodRow {
    Date date{};
    double gross_return = 0.0;
    double net_return = 0.0;
    double benchmark_return = 0.0;
    double turnover = 0.0; // one-way, against the drifted previous winner
    double rf_quarter = 0.0;
    double sharpe = 0.0; // winner's in-sample Sharpe at selection time
    std::size_t holdings = 0;
    double weighted_market_cap_usd = 0.0;
    bool cardinality_ok = false;
    bool positions_ok = false;
    bool market_cap_ok = false;
    bool style_ok = false;
    bool turnover_ok = false;
    std::string winner_source; // "sharpe" | "best-turnover" | "held" | "none"
    bool repair_applied = false;
    std::string note;
};

struct AggregateMetrics {
    double cumulative_value_usd = 10000.0; // value of 10,000 USD invested
    double benchmark_cumulative_value_usd = 10000.0;
    std::optional<double> return_1y, return_3y, return_5y, return_10y;
    std::optional<double> benchmark_return_1y, benchmark_return_3y, benchmark_return_5y,
        benchmark_return_10y;
    double sharpe = 0.0;
    double information_ratio = 0.0;
    bool zero_tracking_error = false;
    bool zero_volatility = false;
    int turnover_breaches = 0;
};

struct BacktestReport {
    std::vector<PeriodRow> periods;
    std::vector<fin::Portfolio> winners; // aligned with periods
    AggregateMetrics aggregate;
};

struct PeriodPerformance {
    double gross = 0.0;
    double net = 0.0;
    std::vector<std::string> forced_sales; // assets priced at last available close
};

// Buy-and-hold return over the 63-trading-day forward window starting at
// as_of_index, net of proportional costs charged on both sides of the
// rebalance trade: net = gross - cost_bps * 1e-4 * turnover * 2.
PeriodPerformance period_performance(const fin::Portfolio& portfolio,
                                     const data::PriceTable& prices, std::size_t as_of_index,
                                     double cost_bps, double turnover_value);

// Cap-weighted buy-and-hold return of the full (unfiltered) snapshot over
// the same forward window; this is the synthetic benchmark for one quarter.
double benchmark_period_return(const data::UniverseSnapshot& snapshot);

// Quarterly aggregates: cumulative value of 10,000 USD, trailing 4/12/20/40
// quarter window returns, Sharpe on quarterly net returns (x4 mean, x2
// volatility annualization) and information ratio versus the benchmark.
AggregateMetrics aggregate_metrics(const std::vector<double>& net_returns,
                                   const std::vector<double>& benchmark_returns,
                                   const std::vector<double>& rf_quarterly);

BacktestReport run_backtest(const BacktestConfig& config);

// <prefix>_periods.csv, <prefix>_summary.json, <prefix>_holdings/<date>.csv
void write_report(const BacktestReport& report, const std::string& path_prefix);

// Reads a periods CSV back (the `report` subcommand re-renders aggregates
// from it).
std::vector<PeriodRow> read_periods_csv(const std::string& path);

std::string render_summary(const BacktestReport& report);

} // namespace evoport::backtest
