#pragma once

#include "evoport/date.hpp"
#include "evoport/moea/params.hpp"
#include "evoport/phase1/selection.hpp"
#include "evoport/phase2/weighting.hpp"
#include "evoport/portfolio/types.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace evoport::backtest {

// Flat `key = value` configuration text: numbers, booleans, "strings" and
// ["lists", "of", "strings"]; '#' starts a comment. Unknown keys are
// tolerated and reported via unused_keys() so configs stay forward
// compatible.
class FlatConfig {
public:
    static FlatConfig parse_file(const std::string& path);
    static FlatConfig parse_text(const std::string& text, const std::string& name);

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& raw_value); // CLI overrides

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_string_list(const std::string& key) const;

    std::vector<std::string> unused_keys() const;

private:
    std::string name_ = "<config>";
    std::map<std::string, std::string> values_; // raw value text
    mutable std::set<std::string> accessed_;
};

struct BacktestConfig {
    phase1::Mandate mandate = phase1::Mandate::large_cap;
    std::vector<Date> rebalance_dates;
    fin::ConstraintSet constraints;
    moea::EaParams phase1_params;  // paper defaults: 500 (50 growth) / 1200 / 0.03
    moea::EaParams phase2_params;  // paper defaults: 100 / 600 / 0.01, archive = population
    moea::EaParams repair_params;  // MOEA IIa defaults: 50 / 200 / 0.02
    phase2::WeightStrategy strategy = phase2::WeightStrategy::ledger_sparse;

    double transaction_cost_bps = 10.0; // per unit one-way turnover, charged both sides
    std::uint64_t seed = 0;
    int threads = 1;

    double score_floor = 20.0;
    double cap_fraction = 0.12;
    double cap_floor_usd = 750e6;
    int seed_popcount = 156;
    std::size_t max_portfolios = 50;

    std::string scores_dir;
    std::string prices_path;
    std::string riskfree_path;
    std::string out_prefix = "backtest";
    std::string trace_path;

    void validate() const;
};

// Builds a BacktestConfig from parsed key-values; relative paths resolve
// against base_dir (the config file's directory).
BacktestConfig build_backtest_config(const FlatConfig& config, const std::string& base_dir);

// All recognized keys with their defaults, in config-file syntax.
std::string default_config_text();

} // namespace evoport::backtest
