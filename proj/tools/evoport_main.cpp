// evoport: two-phase MOEA portfolio construction over a quarterly backtest.
//
// Subcommands:
//   gen-data  write a deterministic synthetic market (scores/prices/riskfree)
//   phase1    one period of NSGA-II stock selection -> two Phase I files
//   phase2    weight Phase I portfolios with SPEA2 -> winner + diagnostics
//   backtest  the full multi-period loop from a config file
//   report    re-render summary tables from a periods CSV
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 infeasibility.

#include "evoport/backtest/backtester.hpp"
#include "evoport/backtest/config.hpp"
#include "evoport/data/csv.hpp"
#include "evoport/data/returns.hpp"
#include "evoport/data/universe.hpp"
#include "evoport/errors.hpp"
#include "evoport/phase1/selection.hpp"
#include "evoport/phase2/weighting.hpp"
#include "evoport/portfolio/analytics.hpp"
#include "evoport/synth/generator.hpp"
#include "evoport/text.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace evoport;

int cmd_gen_data(const synth::SyntheticSpec& spec, const std::string& out_dir) {
    const auto files = synth::generate_universe(spec, out_dir);
    std::cout << "wrote " << files.prices_path << ", " << files.riskfree_path << ", "
              << files.score_paths.size() << " score files and " << files.config_path << "\n";
    return 0;
}

backtest::BacktestConfig load_config(const std::string& config_path,
                                     const std::vector<std::pair<std::string, std::string>>& overrides) {
    backtest::FlatConfig flat = config_path.empty()
                                    ? backtest::FlatConfig::parse_text("", "<empty>")
                                    : backtest::FlatConfig::parse_file(config_path);
    for (const auto& [key, value] : overrides)
        flat.set(key, value);
    const std::string base_dir =
        config_path.empty() ? "" : std::filesystem::path(config_path).parent_path().string();
    auto config = backtest::build_backtest_config(flat, base_dir);
    for (const auto& key : flat.unused_keys())
        std::cerr << "warning: unknown config key '" << key << "' ignored\n";
    return config;
}

fin::Portfolio read_winner_file(const std::string& path) {
    const auto csv = data::read_csv(path);
    const std::size_t c_id = csv.column("asset_id");
    const std::size_t c_w = csv.column("weight");
    fin::Portfolio p;
    for (const auto& row : csv.rows)
        p.holdings.emplace(row[c_id], parse_double(row[c_w]));
    return p;
}

void write_winner_file(const fin::Portfolio& portfolio, const std::string& path) {
    std::vector<std::string> lines;
    lines.emplace_back("asset_id,weight");
    for (const auto& [id, w] : portfolio.holdings)
        lines.push_back(id + "," + fmt_double(w));
    data::write_lines(path, lines);
}

int cmd_phase1(const backtest::BacktestConfig& config, Date date, const std::string& priors_path,
               const std::string& out_prefix) {
    auto prices = std::make_shared<const data::PriceTable>(
        data::PriceTable::load(config.prices_path));
    auto full = data::load_universe(synth::score_file_path(config.scores_dir, date), prices, date);
    auto filtered = data::filter_universe(full, config.score_floor, config.cap_fraction,
                                          config.cap_floor_usd);
    const auto targets = data::universe_targets(filtered);
    fin::ConstraintSet constraints = config.constraints;
    constraints.market_cap_target_usd = targets.avg_market_cap_usd;
    if (config.mandate == phase1::Mandate::large_cap_growth)
        constraints.book_to_price_ceiling = targets.avg_book_to_price;

    std::vector<std::vector<std::string>> priors;
    if (!priors_path.empty()) {
        const auto prior_set = phase1::read_phase1_portfolios(priors_path, date);
        for (std::size_t i = 0; i < prior_set.genomes.size(); ++i)
            priors.push_back(prior_set.selected_ids(i));
        if (priors.size() > config.phase1_params.population_size)
            priors.resize(config.phase1_params.population_size);
    }

    moea::EaParams params = config.phase1_params;
    params.rng_seed = Rng(config.seed).child(0).child(0).seed();

    std::ofstream trace_file;
    std::optional<moea::TraceSink> trace;
    const moea::TraceSink* trace_ptr = nullptr;
    if (!config.trace_path.empty()) {
        trace_file.open(config.trace_path, std::ios::trunc);
        trace.emplace(trace_file, "phase1 " + format_date(date));
        trace_ptr = &*trace;
    }

    const auto set = phase1::run_phase1(filtered, targets, config.mandate, constraints, priors,
                                        params, config.max_portfolios, config.seed_popcount,
                                        trace_ptr);
    phase1::write_phase1_outputs(set, out_prefix + "_objectives.csv",
                                 out_prefix + "_portfolios.csv");
    std::cout << "wrote " << set.genomes.size() << " candidate portfolios to " << out_prefix
              << "_portfolios.csv\n";
    return 0;
}

int cmd_phase2(const backtest::BacktestConfig& config, Date date,
               const std::string& portfolios_path, const std::string& prev_winner_path,
               const std::string& out_prefix) {
    auto prices = std::make_shared<const data::PriceTable>(
        data::PriceTable::load(config.prices_path));
    auto full = data::load_universe(synth::score_file_path(config.scores_dir, date), prices, date);
    auto filtered = data::filter_universe(full, config.score_floor, config.cap_fraction,
                                          config.cap_floor_usd);
    const auto targets = data::universe_targets(filtered);
    fin::ConstraintSet constraints = config.constraints;
    constraints.market_cap_target_usd = targets.avg_market_cap_usd;
    if (config.mandate == phase1::Mandate::large_cap_growth)
        constraints.book_to_price_ceiling = targets.avg_book_to_price;

    const auto candidates = phase1::read_phase1_portfolios(portfolios_path, date);
    fin::Portfolio previous;
    if (!prev_winner_path.empty())
        previous = read_winner_file(prev_winner_path);

    const double risk_free = data::load_risk_free(config.riskfree_path, date);
    const double factor =
        constraints.turnover_convention == fin::TurnoverConvention::two_way ? 2.0 : 1.0;
    Rng period_rng = Rng(config.seed).child(0);

    std::vector<phase2::CandidateOutcome> outcomes;
    nlohmann::json diag_candidates = nlohmann::json::array();
    for (std::size_t i = 0; i < candidates.genomes.size(); ++i) {
        phase2::CandidateOutcome outcome;
        try {
            const auto ids = candidates.selected_ids(i);
            auto stats = data::compute_statistics(data::build_returns_matrix(filtered, ids, date));
            phase2::WeightingProblem problem(ids, std::move(stats), previous, constraints,
                                             risk_free, config.strategy,
                                             config.phase2_params.mutation_rate,
                                             config.phase2_params.sbx_eta,
                                             config.phase2_params.mutation_eta);
            moea::EaParams params = config.phase2_params;
            params.rng_seed = period_rng.child(1 + i).seed();
            auto result = phase2::run_phase2(problem, params);
            outcome.portfolio = result.best_sharpe;
            outcome.portfolio.as_of = date;
            outcome.sharpe = result.best_sharpe_value;
            outcome.turnover = result.best_turnover;
            outcome.usable = true;
            outcome.turnover_ok =
                outcome.turnover * factor <= constraints.turnover_budget() + 1e-12;
            outcome.market_cap_ok = fin::weighted_market_cap(outcome.portfolio, full.candidates) >=
                                    constraints.market_cap_target_usd;
        } catch (const InfeasibleError& e) {
            outcome.usable = false;
            outcome.note = e.what();
        }
        nlohmann::json c;
        c["index"] = i;
        c["usable"] = outcome.usable;
        c["sharpe"] = outcome.sharpe;
        c["turnover"] = outcome.turnover;
        c["market_cap_ok"] = outcome.market_cap_ok;
        c["turnover_ok"] = outcome.turnover_ok;
        if (!outcome.note.empty())
            c["note"] = outcome.note;
        diag_candidates.push_back(std::move(c));
        outcomes.push_back(std::move(outcome));
    }

    const std::size_t winner_index = phase2::select_winner(outcomes);
    const auto& winner = outcomes[winner_index];
    write_winner_file(winner.portfolio, out_prefix + "_winner.csv");

    const auto report = fin::check_constraints(winner.portfolio, constraints, previous,
                                               full.candidates);
    nlohmann::json diag;
    diag["date"] = format_date(date);
    diag["winner_index"] = winner_index;
    diag["sharpe"] = winner.sharpe;
    diag["turnover"] = winner.turnover;
    diag["selection_rule"] =
        winner.market_cap_ok && winner.turnover_ok ? "sharpe" : "best-turnover";
    diag["constraints"] = {{"cardinality", report.cardinality.pass},
                           {"positions", report.positions.pass},
                           {"market_cap", report.market_cap.pass},
                           {"book_to_price", report.book_to_price.pass},
                           {"turnover", report.turnover.pass}};
    diag["weighted_market_cap_usd"] = report.weighted_market_cap_usd;
    diag["holdings"] = report.holdings_count;
    diag["candidates"] = std::move(diag_candidates);
    std::ofstream out(out_prefix + "_diagnostics.json", std::ios::trunc);
    if (!out)
        throw DataError("cannot write '" + out_prefix + "_diagnostics.json'");
    out << diag.dump(2) << '\n';

    std::cout << "winner: candidate " << winner_index << ", " << report.holdings_count
              << " holdings, sharpe " << fmt_double_fixed(winner.sharpe, 3) << ", turnover "
              << fmt_double_fixed(winner.turnover, 4) << "\n";
    return 0;
}

int cmd_backtest(const backtest::BacktestConfig& config) {
    const auto report = backtest::run_backtest(config);
    backtest::write_report(report, config.out_prefix);
    std::cout << backtest::render_summary(report);
    std::cout << "report written to " << config.out_prefix << "_periods.csv and "
              << config.out_prefix << "_summary.json\n";
    return 0;
}

int cmd_report(const std::string& periods_path) {
    const auto rows = backtest::read_periods_csv(periods_path);
    backtest::BacktestReport report;
    report.periods = rows;
    if (rows.size() >= 2) {
        std::vector<double> net, bench, rf;
        for (const auto& row : rows) {
            net.push_back(row.net_return);
            bench.push_back(row.benchmark_return);
            rf.push_back(row.rf_quarter);
        }
        report.aggregate = backtest::aggregate_metrics(net, bench, rf);
    }
    for (const auto& row : rows)
        if (!row.turnover_ok)
            ++report.aggregate.turnover_breaches;
    std::cout << backtest::render_summary(report);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"evoport: MOEA portfolio construction under investment constraints"};
    app.require_subcommand(1);

    std::string config_path, out_path, date_text, mandate_text, trace_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> threads_override;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "configuration file");
        cmd->add_option("--seed", seed_override, "override rng seed");
        cmd->add_option("--mandate", mandate_text, "large-cap or large-cap-growth");
        cmd->add_option("--threads", threads_override, "worker thread cap");
        cmd->add_option("--trace", trace_path, "line-delimited JSON trace output");
    };

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic market");
    synth::SyntheticSpec spec;
    std::string gen_out = "data";
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--assets", spec.n_assets, "number of assets");
    gen->add_option("--periods", spec.n_periods, "number of rebalance dates");
    gen->add_option("--days", spec.n_days, "trading days (0 = minimum)");
    gen->add_option("--factors", spec.n_factors, "return-model factors");
    gen->add_option("--ic", spec.information_coefficient, "score information coefficient");
    gen->add_option("--seed", spec.rng_seed, "generator seed");

    // phase1
    auto* p1 = app.add_subcommand("phase1", "one period of stock selection");
    std::string p1_priors, p1_out = "phase1";
    add_common(p1);
    p1->add_option("--date", date_text, "rebalance date (YYYY-MM-DD)")->required();
    p1->add_option("--priors", p1_priors, "previous-period portfolios CSV");
    p1->add_option("--out", p1_out, "output prefix");

    // phase2
    auto* p2 = app.add_subcommand("phase2", "weight Phase I portfolios");
    std::string p2_portfolios, p2_prev, p2_out = "phase2";
    add_common(p2);
    p2->add_option("--date", date_text, "rebalance date (YYYY-MM-DD)")->required();
    p2->add_option("--portfolios", p2_portfolios, "Phase I portfolios CSV")->required();
    p2->add_option("--prev-winner", p2_prev, "previous winner CSV");
    p2->add_option("--out", p2_out, "output prefix");

    // backtest
    auto* bt = app.add_subcommand("backtest", "run the full multi-period loop");
    add_common(bt);
    bt->add_option("--out", out_path, "override out_prefix");
    bool print_config = false;
    bt->add_flag("--print-config", print_config, "print all defaults and exit");

    // report
    auto* rp = app.add_subcommand("report", "re-render summary from a periods CSV");
    std::string report_periods;
    rp->add_option("--periods", report_periods, "periods CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed())
            return cmd_gen_data(spec, gen_out);
        if (rp->parsed())
            return cmd_report(report_periods);

        if (print_config) {
            std::cout << backtest::default_config_text();
            return 0;
        }

        std::vector<std::pair<std::string, std::string>> overrides;
        if (seed_override)
            overrides.emplace_back("seed", std::to_string(*seed_override));
        if (threads_override)
            overrides.emplace_back("threads", std::to_string(*threads_override));
        if (!mandate_text.empty())
            overrides.emplace_back("mandate", "\"" + mandate_text + "\"");
        if (!trace_path.empty())
            overrides.emplace_back("trace", "\"" + trace_path + "\"");
        if (!out_path.empty())
            overrides.emplace_back("out_prefix", "\"" + out_path + "\"");
        auto config = load_config(config_path, overrides);

        if (p1->parsed())
            return cmd_phase1(config, parse_date(date_text), p1_priors, p1_out);
        if (p2->parsed())
            return cmd_phase2(config, parse_date(date_text), p2_portfolios, p2_prev, p2_out);
        if (bt->parsed())
            return cmd_backtest(config);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
