#pragma once

#include "evoport/date.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace evoport::synth {

// Deterministic synthetic market: a factor model for daily returns,
// log-normal caps and book-to-price ratios, and multi-factor scores whose
// correlation with forward 63-day returns is set by the information
// coefficient. Scores carry an AR(1) noise component across rebalance
// dates so turnover constraints bind realistically.
struct SyntheticSpec {
    int n_assets = 400;
    int n_periods = 20;  // planned rebalance dates
    int n_days = 0;      // 0 derives the minimum: 288 + 63 * n_periods
    int n_factors = 3;
    std::uint64_t rng_seed = 7;

    double cap_median_usd = 5e9;
    double cap_sigma = 0.8;
    double b2p_median = 0.5;
    double b2p_sigma = 0.4;

    double annual_drift_mean = 0.08;
    double annual_drift_sigma = 0.06; // cross-sectional dispersion of drift
    double factor_vol_daily = 0.005;
    double idio_vol_daily = 0.012;
    double market_beta_sigma = 0.15; // dispersion of loadings on factor 0

    double information_coefficient = 0.05;
    double score_autocorr = 0.8;
    double risk_free_daily = 0.00012;

    Date start_date = make_date(2000, 1, 3);

    int required_days() const { return 288 + 63 * n_periods; }
    void validate() const;
};

struct GeneratedFiles {
    std::string prices_path;
    std::string riskfree_path;
    std::string config_path;
    std::vector<std::string> score_paths;
    std::vector<Date> rebalance_dates;
};

// Writes prices.csv, riskfree.csv, one scores_YYYY-MM-DD.csv per rebalance
// date and a ready-to-run backtest.toml into out_dir. Identical specs
// produce byte-identical files.
GeneratedFiles generate_universe(const SyntheticSpec& spec, const std::string& out_dir);

// Quarterly-rebalanced cap-weighted benchmark over the same calendar:
// one buy-and-hold 63-day return per rebalance date, weighted by the
// market caps in that date's score file.
std::vector<double> cap_weighted_benchmark(const std::string& price_path,
                                           const std::string& scores_dir,
                                           const std::vector<Date>& rebalance_dates);

// Canonical score-file location: <dir>/scores_YYYY-MM-DD.csv
std::string score_file_path(const std::string& dir, Date as_of);

} // namespace evoport::synth
