#include "evoport/backtest/config.hpp"

#include "evoport/errors.hpp"
#include "evoport/text.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace evoport::backtest {

FlatConfig FlatConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open config '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_text(buffer.str(), path);
}

FlatConfig FlatConfig::parse_text(const std::string& text, const std::string& name) {
    FlatConfig config;
    config.name_ = name;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty() || view.front() == '#')
            continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(name, line_no, "expected 'key = value'");
        const std::string key{trim(view.substr(0, eq))};
        std::string_view value = trim(view.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ParseError(name, line_no, "expected 'key = value'");
        if (config.values_.count(key))
            throw ParseError(name, line_no, "duplicate key '" + key + "'");
        config.values_[key] = std::string(value);
    }
    return config;
}

bool FlatConfig::has(const std::string& key) const {
    return values_.count(key) > 0;
}

void FlatConfig::set(const std::string& key, const std::string& raw_value) {
    values_[key] = raw_value;
}

namespace {

std::string unquote(const std::string& raw) {
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"')
        return raw.substr(1, raw.size() - 2);
    return raw;
}

} // namespace

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    accessed_.insert(key);
    return unquote(it->second);
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    accessed_.insert(key);
    return parse_double(it->second);
}

long long FlatConfig::get_int(const std::string& key, long long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    accessed_.insert(key);
    return parse_int(it->second);
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    accessed_.insert(key);
    if (it->second == "true")
        return true;
    if (it->second == "false")
        return false;
    throw ParseError(name_ + ": key '" + key + "' must be true or false");
}

std::vector<std::string> FlatConfig::get_string_list(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return {};
    accessed_.insert(key);
    std::string_view view = trim(it->second);
    if (view.size() < 2 || view.front() != '[' || view.back() != ']')
        throw ParseError(name_ + ": key '" + key + "' must be a [list]");
    view = view.substr(1, view.size() - 2);
    std::vector<std::string> out;
    if (trim(view).empty())
        return out;
    for (auto item : split(view, ','))
        out.push_back(unquote(std::string(trim(item))));
    return out;
}

std::vector<std::string> FlatConfig::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_) {
        (void)value;
        if (!accessed_.count(key))
            out.push_back(key);
    }
    return out;
}

void BacktestConfig::validate() const {
    if (rebalance_dates.empty())
        throw std::invalid_argument("backtest: rebalance_dates must not be empty");
    for (std::size_t i = 1; i < rebalance_dates.size(); ++i)
        if (!(rebalance_dates[i - 1] < rebalance_dates[i]))
            throw std::invalid_argument("backtest: rebalance_dates must be strictly increasing");
    constraints.validate();
    phase1_params.validate();
    phase2_params.validate();
    repair_params.validate();
    if (threads < 1)
        throw std::invalid_argument("backtest: threads must be >= 1");
    if (transaction_cost_bps < 0.0)
        throw std::invalid_argument("backtest: transaction_cost_bps must be >= 0");
    if (scores_dir.empty() || prices_path.empty() || riskfree_path.empty())
        throw std::invalid_argument("backtest: scores_dir, prices and riskfree paths are required");
    if (max_portfolios < 1)
        throw std::invalid_argument("backtest: max_portfolios must be >= 1");
}

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty() || std::filesystem::path(path).is_absolute() || base_dir.empty())
        return path;
    return (std::filesystem::path(base_dir) / path).lexically_normal().string();
}

} // namespace

BacktestConfig build_backtest_config(const FlatConfig& config, const std::string& base_dir) {
    BacktestConfig out;
    out.mandate = phase1::parse_mandate(config.get_string("mandate", "large-cap"));

    for (const auto& text : config.get_string_list("rebalance_dates"))
        out.rebalance_dates.push_back(parse_date(text));

    out.constraints.min_weight = config.get_double("min_weight", out.constraints.min_weight);
    out.constraints.max_weight = config.get_double("max_weight", out.constraints.max_weight);
    out.constraints.monthly_turnover_cap =
        config.get_double("monthly_turnover_cap", out.constraints.monthly_turnover_cap);
    out.constraints.rebalance_months =
        static_cast<int>(config.get_int("rebalance_months", out.constraints.rebalance_months));
    const std::string convention = config.get_string("turnover_convention", "one-way");
    if (convention == "one-way")
        out.constraints.turnover_convention = fin::TurnoverConvention::one_way;
    else if (convention == "two-way")
        out.constraints.turnover_convention = fin::TurnoverConvention::two_way;
    else
        throw std::invalid_argument("turnover_convention must be one-way or two-way");

    // Paper presets; the growth mandate runs Phase I with population 50 to
    // bound the number of non-dominated solutions.
    const long long phase1_default_pop = out.mandate == phase1::Mandate::large_cap ? 500 : 50;
    out.phase1_params.population_size =
        static_cast<std::size_t>(config.get_int("phase1.population", phase1_default_pop));
    out.phase1_params.generations =
        static_cast<std::size_t>(config.get_int("phase1.generations", 1200));
    out.phase1_params.mutation_rate = config.get_double("phase1.mutation_rate", 0.03);

    out.phase2_params.population_size =
        static_cast<std::size_t>(config.get_int("phase2.population", 100));
    out.phase2_params.generations =
        static_cast<std::size_t>(config.get_int("phase2.generations", 600));
    out.phase2_params.mutation_rate = config.get_double("phase2.mutation_rate", 0.01);
    out.phase2_params.archive_size = out.phase2_params.population_size;

    out.repair_params.population_size =
        static_cast<std::size_t>(config.get_int("repair.population", 50));
    out.repair_params.generations =
        static_cast<std::size_t>(config.get_int("repair.generations", 200));
    out.repair_params.mutation_rate = config.get_double("repair.mutation_rate", 0.02);
    out.repair_params.archive_size = out.repair_params.population_size;

    const double sbx_eta = config.get_double("sbx_eta", 15.0);
    const double mutation_eta = config.get_double("mutation_eta", 20.0);
    for (auto* p : {&out.phase1_params, &out.phase2_params, &out.repair_params}) {
        p->sbx_eta = sbx_eta;
        p->mutation_eta = mutation_eta;
    }

    const long long strategy = config.get_int("weighting_strategy", 1);
    if (strategy == 1)
        out.strategy = phase2::WeightStrategy::ledger_sparse;
    else if (strategy == 2)
        out.strategy = phase2::WeightStrategy::ledger_full;
    else
        throw std::invalid_argument("weighting_strategy must be 1 or 2");

    out.transaction_cost_bps = config.get_double("transaction_cost_bps", out.transaction_cost_bps);
    out.seed = static_cast<std::uint64_t>(config.get_int("seed", 0));
    out.threads = static_cast<int>(config.get_int("threads", 1));
    out.score_floor = config.get_double("score_floor", out.score_floor);
    out.cap_fraction = config.get_double("cap_fraction", out.cap_fraction);
    out.cap_floor_usd = config.get_double("cap_floor_usd", out.cap_floor_usd);
    out.seed_popcount = static_cast<int>(config.get_int("seed_popcount", out.seed_popcount));
    out.max_portfolios = static_cast<std::size_t>(config.get_int("max_portfolios", 50));

    out.scores_dir = resolve(base_dir, config.get_string("scores_dir", "."));
    out.prices_path = resolve(base_dir, config.get_string("prices", ""));
    out.riskfree_path = resolve(base_dir, config.get_string("riskfree", ""));
    out.out_prefix = resolve(base_dir, config.get_string("out_prefix", "backtest"));
    out.trace_path = resolve(base_dir, config.get_string("trace", ""));
    return out;
}

std::string default_config_text() {
    return R"(# evoport backtest configuration (defaults)
mandate = "large-cap"            # or "large-cap-growth"
seed = 0
threads = 1
scores_dir = "."
prices = "prices.csv"
riskfree = "riskfree.csv"
out_prefix = "backtest"
trace = ""
rebalance_dates = []             # ["2001-02-09", ...] quarterly, ISO-8601

min_weight = 0.0035              # position bounds as fractions of NAV
max_weight = 0.04
monthly_turnover_cap = 0.08      # budget per rebalance = cap * rebalance_months
rebalance_months = 3
turnover_convention = "one-way"  # or "two-way"
transaction_cost_bps = 10        # per unit one-way turnover, both sides

score_floor = 20                 # pre-filter: drop scores below this
cap_fraction = 0.12              # pre-filter: drop bottom fraction by market cap
cap_floor_usd = 750e6            # unless the percentile cap exceeds this floor
seed_popcount = 156              # random generation-zero selections
max_portfolios = 50              # Phase I output cap
weighting_strategy = 1           # 1 = sparse ledger repair, 2 = all-held

phase1.population = 500          # 50 for large-cap-growth unless overridden
phase1.generations = 1200
phase1.mutation_rate = 0.03
phase2.population = 100
phase2.generations = 600
phase2.mutation_rate = 0.01
repair.population = 50
repair.generations = 200
repair.mutation_rate = 0.02
sbx_eta = 15
mutation_eta = 20
)";
}

} // namespace evoport::backtest
