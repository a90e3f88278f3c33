#include "evoport/backtest/backtester.hpp"
#include "evoport/backtest/config.hpp"
#include "evoport/data/csv.hpp"
#include "evoport/errors.hpp"
#include "evoport/synth/generator.hpp"
#include "evoport/text.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>

using namespace evoport;
using namespace evoport::backtest;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const char* tag) {
        path = std::filesystem::temp_directory_path() /
               (std::string("evoport_bt_") + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    std::string str() const { return path.string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::vector<Date> weekdays(int count) {
    std::vector<Date> days;
    std::int32_t serial = make_date(2000, 1, 3).serial;
    while (static_cast<int>(days.size()) < count) {
        const int weekday = ((serial + 4) % 7 + 7) % 7;
        if (weekday != 0 && weekday != 6)
            days.push_back(Date{serial});
        ++serial;
    }
    return days;
}

// Small but fast EA settings for driver-level tests.
void shrink_params(BacktestConfig& config) {
    config.phase1_params.population_size = 40;
    config.phase1_params.generations = 16;
    config.phase2_params.population_size = 16;
    config.phase2_params.generations = 12;
    config.phase2_params.archive_size = 16;
    config.phase2_params.mutation_rate = 0.02;
    config.repair_params.population_size = 16;
    config.repair_params.generations = 12;
    config.repair_params.archive_size = 16;
    config.max_portfolios = 4;
}

BacktestConfig synthetic_config(const std::string& dir, int periods, std::uint64_t seed) {
    synth::SyntheticSpec spec;
    spec.n_assets = 120;
    spec.n_periods = periods;
    spec.rng_seed = seed;
    const auto files = synth::generate_universe(spec, dir);

    BacktestConfig config;
    config.rebalance_dates = files.rebalance_dates;
    config.scores_dir = dir;
    config.prices_path = files.prices_path;
    config.riskfree_path = files.riskfree_path;
    config.out_prefix = dir + "/out/bt";
    config.seed = seed;
    shrink_params(config);
    return config;
}

} // namespace

TEST_CASE("period performance") {
    TempDir dir("perf");
    const auto days = weekdays(130);
    std::vector<std::string> lines{"date,asset_id,close_usd"};
    for (std::size_t t = 0; t < days.size(); ++t) {
        lines.push_back(format_date(days[t]) + ",FLAT,100");
        lines.push_back(format_date(days[t]) + ",UP," +
                        fmt_double(100.0 * (1.0 + 0.10 * static_cast<double>(t) / 63.0)));
        lines.push_back(format_date(days[t]) + ",DOWN," +
                        fmt_double(100.0 * std::pow(0.999, static_cast<double>(t))));
    }
    data::write_lines(dir.file("prices.csv"), lines);
    const auto prices = data::PriceTable::load(dir.file("prices.csv"));

    SUBCASE("flat prices: gross zero, net is the cost drag") {
        fin::Portfolio p;
        p.holdings.emplace("FLAT", 1.0);
        const auto perf = period_performance(p, prices, 0, 10.0, 0.24);
        CHECK(perf.gross == doctest::Approx(0.0));
        CHECK(perf.net == doctest::Approx(-10.0 * 1e-4 * 0.24 * 2.0));
    }

    SUBCASE("single rising asset, zero cost") {
        fin::Portfolio p;
        p.holdings.emplace("UP", 1.0);
        const auto perf = period_performance(p, prices, 0, 0.0, 0.0);
        CHECK(perf.gross == doctest::Approx(0.10).epsilon(1e-9));
        CHECK(perf.net == doctest::Approx(0.10).epsilon(1e-9));
    }

    SUBCASE("three-asset hand computation") {
        fin::Portfolio p;
        p.holdings.emplace("FLAT", 0.2);
        p.holdings.emplace("UP", 0.5);
        p.holdings.emplace("DOWN", 0.3);
        const double down_return = std::pow(0.999, 63.0) - 1.0;
        const double expected_gross = 0.2 * 0.0 + 0.5 * 0.10 + 0.3 * down_return;
        const auto perf = period_performance(p, prices, 0, 10.0, 0.1);
        CHECK(perf.gross == doctest::Approx(expected_gross).epsilon(1e-9));
        CHECK(perf.net == doctest::Approx(expected_gross - 10.0 * 1e-4 * 0.1 * 2.0).epsilon(1e-9));
    }
}

TEST_CASE("aggregate metrics") {
    SUBCASE("all-zero returns: cumulative 10,000 and guarded ratios") {
        const std::vector<double> zeros(4, 0.0);
        const auto agg = aggregate_metrics(zeros, zeros, zeros);
        CHECK(agg.cumulative_value_usd == doctest::Approx(10000.0));
        CHECK(agg.information_ratio == 0.0);
        CHECK(agg.zero_tracking_error);
        CHECK(agg.zero_volatility);
        CHECK(agg.turnover_breaches == 0);
    }

    SUBCASE("constant positive active return has zero tracking error") {
        const std::vector<double> net{0.02, 0.02, 0.02, 0.02};
        const std::vector<double> bench{0.01, 0.01, 0.01, 0.01};
        const std::vector<double> rf(4, 0.0);
        const auto agg = aggregate_metrics(net, bench, rf);
        CHECK(agg.zero_tracking_error);
        CHECK(agg.information_ratio == 0.0);
        CHECK(agg.zero_volatility);
    }

    SUBCASE("alternating active returns produce a finite information ratio") {
        const std::vector<double> net{0.02, 0.00, 0.02, 0.00};
        const std::vector<double> bench{0.01, 0.01, 0.01, 0.01};
        const std::vector<double> rf(4, 0.0);
        const auto agg = aggregate_metrics(net, bench, rf);
        CHECK_FALSE(agg.zero_tracking_error);
        // active = {+1%, -1%, +1%, -1%}: mean 0, sd 2/sqrt(3) %: IR = 0.
        CHECK(agg.information_ratio == doctest::Approx(0.0));
    }

    SUBCASE("eight-quarter spreadsheet oracle") {
        const std::vector<double> net{0.03, -0.01, 0.02, 0.04, -0.02, 0.01, 0.05, 0.00};
        const std::vector<double> bench{0.02, 0.00, 0.01, 0.03, -0.01, 0.02, 0.04, -0.01};
        const std::vector<double> rf(8, 0.002);
        const auto agg = aggregate_metrics(net, bench, rf);

        // Cumulative value: independent left-to-right product.
        double value = 10000.0;
        for (double r : net)
            value *= 1.0 + r;
        CHECK(agg.cumulative_value_usd == doctest::Approx(value).epsilon(1e-10));

        // Trailing 4-quarter return.
        double w4 = 1.0;
        for (std::size_t i = 4; i < 8; ++i)
            w4 *= 1.0 + net[i];
        REQUIRE(agg.return_1y.has_value());
        CHECK(*agg.return_1y == doctest::Approx(w4 - 1.0).epsilon(1e-10));
        CHECK_FALSE(agg.return_3y.has_value()); // needs 12 quarters

        // Sharpe: mean excess x4 over sample stdev x2.
        double mean_excess = 0, mean_net = 0;
        for (double r : net) {
            mean_excess += r - 0.002;
            mean_net += r;
        }
        mean_excess /= 8;
        mean_net /= 8;
        double ss = 0;
        for (double r : net)
            ss += (r - mean_net) * (r - mean_net);
        const double sd = std::sqrt(ss / 7);
        CHECK(agg.sharpe == doctest::Approx((mean_excess * 4.0) / (sd * 2.0)).epsilon(1e-10));

        // Information ratio against the benchmark series.
        double mean_active = 0;
        for (std::size_t i = 0; i < 8; ++i)
            mean_active += net[i] - bench[i];
        mean_active /= 8;
        double ssa = 0;
        for (std::size_t i = 0; i < 8; ++i) {
            const double a = net[i] - bench[i];
            ssa += (a - mean_active) * (a - mean_active);
        }
        const double te = std::sqrt(ssa / 7);
        CHECK(agg.information_ratio ==
              doctest::Approx((mean_active * 4.0) / (te * 2.0)).epsilon(1e-10));
    }

    SUBCASE("input validation") {
        CHECK_THROWS_AS((void)aggregate_metrics({0.01}, {0.01}, {0.0}), std::invalid_argument);
        CHECK_THROWS_AS((void)aggregate_metrics({0.01, 0.02}, {0.01}, {0.0, 0.0}),
                        std::invalid_argument);
    }
}

TEST_CASE("two-period synthetic backtest") {
    TempDir dir("run2");
    auto config = synthetic_config(dir.str(), 2, 31);
    const auto report = run_backtest(config);

    REQUIRE(report.periods.size() == 2);
    REQUIRE(report.winners.size() == 2);

    // First period has no turnover by convention.
    CHECK(report.periods[0].turnover == doctest::Approx(0.0));
    CHECK(report.periods[0].winner_source == "sharpe");

    // Hand-chained cumulative value.
    const double expected =
        10000.0 * (1.0 + report.periods[0].net_return) * (1.0 + report.periods[1].net_return);
    CHECK(report.aggregate.cumulative_value_usd == doctest::Approx(expected).epsilon(1e-12));

    // Winner weights are finalized.
    for (const auto& winner : report.winners) {
        double sum = 0;
        for (const auto& [id, w] : winner.holdings) {
            CHECK(w >= config.constraints.min_weight - 1e-9);
            CHECK(w <= config.constraints.max_weight + 1e-9);
            sum += w;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("report files round-trip and stay deterministic") {
    TempDir dir("det");
    auto config = synthetic_config(dir.str(), 2, 33);

    const auto report = run_backtest(config);
    write_report(report, config.out_prefix);
    const std::string periods_a = slurp(config.out_prefix + "_periods.csv");
    const std::string summary_a = slurp(config.out_prefix + "_summary.json");

    const auto rerun = run_backtest(config);
    write_report(rerun, config.out_prefix);
    CHECK(slurp(config.out_prefix + "_periods.csv") == periods_a);
    CHECK(slurp(config.out_prefix + "_summary.json") == summary_a);

    // Summary JSON parses and echoes the cumulative value.
    const auto summary = nlohmann::json::parse(summary_a);
    CHECK(summary["periods"] == 2);
    CHECK(summary["cumulative_value_usd"].get<double>() ==
          doctest::Approx(report.aggregate.cumulative_value_usd));

    // Periods CSV reads back with matching net returns.
    const auto rows = read_periods_csv(config.out_prefix + "_periods.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].net_return == doctest::Approx(report.periods[0].net_return).epsilon(1e-12));

    // Holdings files: weights sum to 1 within 1e-6.
    for (const auto& row : report.periods) {
        const auto holdings_csv =
            data::read_csv(config.out_prefix + "_holdings/" + format_date(row.date) + ".csv");
        double sum = 0;
        for (const auto& fields : holdings_csv.rows)
            sum += parse_double(fields[1]);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("threaded candidate weighting matches single-threaded output") {
    TempDir dir("thr");
    auto config = synthetic_config(dir.str(), 2, 35);
    config.threads = 1;
    const auto serial = run_backtest(config);
    config.threads = 2;
    const auto parallel = run_backtest(config);

    REQUIRE(serial.periods.size() == parallel.periods.size());
    for (std::size_t i = 0; i < serial.periods.size(); ++i) {
        CHECK(serial.periods[i].net_return == parallel.periods[i].net_return);
        CHECK(serial.winners[i].holdings == parallel.winners[i].holdings);
    }
}

TEST_CASE("flat config parsing") {
    const std::string text = R"(# comment
mandate = "large-cap-growth"
seed = 42
rebalance_dates = ["2001-02-07", "2001-05-07"]
prices = "prices.csv"
riskfree = "rf.csv"
scores_dir = "."
phase1.population = 64
unknown_key = 1
)";
    auto flat = FlatConfig::parse_text(text, "test");
    const auto config = build_backtest_config(flat, "/base");

    CHECK(config.mandate == phase1::Mandate::large_cap_growth);
    CHECK(config.seed == 42);
    REQUIRE(config.rebalance_dates.size() == 2);
    CHECK(format_date(config.rebalance_dates[0]) == "2001-02-07");
    CHECK(config.phase1_params.population_size == 64);
    CHECK(config.phase1_params.generations == 1200); // paper default retained
    CHECK(config.phase2_params.population_size == 100);
    CHECK(config.prices_path == "/base/prices.csv");

    const auto unused = flat.unused_keys();
    REQUIRE(unused.size() == 1);
    CHECK(unused[0] == "unknown_key");

    CHECK_THROWS_AS((void)FlatConfig::parse_text("key value\n", "bad"), ParseError);
    CHECK_THROWS_AS((void)FlatConfig::parse_text("a = 1\na = 2\n", "dup"), ParseError);
}

TEST_CASE("growth mandate defaults phase1 population to 50") {
    auto flat = FlatConfig::parse_text(
        "mandate = \"large-cap-growth\"\nprices = \"p\"\nriskfree = \"r\"\n", "t");
    CHECK(build_backtest_config(flat, "").phase1_params.population_size == 50);
    auto flat2 = FlatConfig::parse_text("prices = \"p\"\nriskfree = \"r\"\n", "t");
    CHECK(build_backtest_config(flat2, "").phase1_params.population_size == 500);
}

TEST_CASE("config validation rejects bad inputs") {
    BacktestConfig config;
    config.scores_dir = ".";
    config.prices_path = "p";
    config.riskfree_path = "r";
    CHECK_THROWS_AS(config.validate(), std::invalid_argument); // no dates

    config.rebalance_dates = {parse_date("2001-05-07"), parse_date("2001-02-07")};
    CHECK_THROWS_AS(config.validate(), std::invalid_argument); // not increasing

    config.rebalance_dates = {parse_date("2001-02-07"), parse_date("2001-05-07")};
    config.threads = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config.threads = 1;
    config.validate();
}
