#include "evoport/data/csv.hpp"
#include "evoport/data/returns.hpp"
#include "evoport/data/universe.hpp"
#include "evoport/errors.hpp"
#include "evoport/rng.hpp"
#include "evoport/text.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <unistd.h>

using namespace evoport;
using namespace evoport::data;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("evoport_data_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// Weekday calendar long enough for lookback + forward windows.
std::vector<Date> weekdays(int count, Date start = make_date(2000, 1, 3)) {
    std::vector<Date> days;
    std::int32_t serial = start.serial;
    while (static_cast<int>(days.size()) < count) {
        const int weekday = ((serial + 4) % 7 + 7) % 7;
        if (weekday != 0 && weekday != 6)
            days.push_back(Date{serial});
        ++serial;
    }
    return days;
}

// Writes a price file with constant-drift paths; asset k starts at 100 + k.
void write_prices(const std::string& path, int n_assets, const std::vector<Date>& days,
                  int short_history_asset = -1, int short_history_days = 0) {
    std::vector<std::string> lines{"date,asset_id,close_usd"};
    for (std::size_t t = 0; t < days.size(); ++t) {
        for (int a = 0; a < n_assets; ++a) {
            if (a == short_history_asset &&
                t + static_cast<std::size_t>(short_history_days) < days.size())
                continue;
            const double price = (100.0 + a) * std::pow(1.0005, static_cast<double>(t));
            lines.push_back(format_date(days[t]) + ",X" + std::to_string(a) + "," +
                            fmt_double(price));
        }
    }
    write_lines(path, lines);
}

void write_scores(const std::string& path, int n_assets, double base_score = 50.0) {
    std::vector<std::string> lines{"asset_id,score,market_cap_usd,book_to_price"};
    for (int a = 0; a < n_assets; ++a)
        lines.push_back("X" + std::to_string(a) + "," + fmt_double(base_score + a) + "," +
                        fmt_double(1e9 * (1 + a)) + ",0.5");
    write_lines(path, lines);
}

UniverseSnapshot synthetic_snapshot(std::initializer_list<std::pair<double, double>> score_cap) {
    UniverseSnapshot s;
    int i = 0;
    for (const auto& [score, cap] : score_cap) {
        s.candidates.push_back({"X" + std::to_string(i++), score, cap, 0.5});
    }
    return s;
}

} // namespace

TEST_CASE("load_universe joins scores to price history") {
    TempDir dir;
    const auto days = weekdays(360);
    const Date as_of = days[kLookbackDays]; // first date with a full lookback

    SUBCASE("well-formed fixture keeps all assets") {
        write_prices(dir.file("prices.csv"), 10, days);
        write_scores(dir.file("scores.csv"), 10);
        const auto snapshot = load_universe(dir.file("scores.csv"), dir.file("prices.csv"), as_of);
        CHECK(snapshot.candidates.size() == 10);
        CHECK(snapshot.exclusions.empty());
        CHECK(snapshot.as_of == as_of);
        CHECK(std::is_sorted(snapshot.candidates.begin(), snapshot.candidates.end(),
                             [](const fin::Candidate& a, const fin::Candidate& b) {
                                 return a.asset_id < b.asset_id;
                             }));
    }

    SUBCASE("asset with only 100 days of history is excluded and logged") {
        write_prices(dir.file("prices.csv"), 10, days, /*short_history_asset=*/3,
                     /*short_history_days=*/100);
        write_scores(dir.file("scores.csv"), 10);
        const auto snapshot = load_universe(dir.file("scores.csv"), dir.file("prices.csv"), as_of);
        CHECK(snapshot.candidates.size() == 9);
        REQUIRE(snapshot.exclusions.size() == 1);
        CHECK(snapshot.exclusions[0].asset_id == "X3");
    }

    SUBCASE("duplicate asset rows are a parse error naming the id") {
        write_prices(dir.file("prices.csv"), 2, days);
        write_lines(dir.file("scores.csv"), {"asset_id,score,market_cap_usd,book_to_price",
                                             "X0,50,1e9,0.5", "X0,60,2e9,0.4"});
        CHECK_THROWS_WITH_AS(
            (void)load_universe(dir.file("scores.csv"), dir.file("prices.csv"), as_of),
            doctest::Contains("X0"), ParseError);
    }

    SUBCASE("malformed row names the line number") {
        write_prices(dir.file("prices.csv"), 2, days);
        write_lines(dir.file("scores.csv"), {"asset_id,score,market_cap_usd,book_to_price",
                                             "X0,50,1e9,0.5", "X1,oops,2e9,0.4"});
        CHECK_THROWS_WITH_AS(
            (void)load_universe(dir.file("scores.csv"), dir.file("prices.csv"), as_of),
            doctest::Contains(":3"), ParseError);
    }

    SUBCASE("missing file is an I/O error") {
        write_prices(dir.file("prices.csv"), 2, days);
        CHECK_THROWS_AS((void)load_universe(dir.file("nope.csv"), dir.file("prices.csv"), as_of),
                        DataError);
    }

    SUBCASE("empty joined universe is an error") {
        write_prices(dir.file("prices.csv"), 2, days);
        write_lines(dir.file("scores.csv"),
                    {"asset_id,score,market_cap_usd,book_to_price", "ZZ,50,1e9,0.5"});
        CHECK_THROWS_AS((void)load_universe(dir.file("scores.csv"), dir.file("prices.csv"), as_of),
                        EmptyUniverseError);
    }
}

TEST_CASE("filter_universe") {
    SUBCASE("score floor keeps 20 and drops 19") {
        auto snapshot = synthetic_snapshot({{19, 1e9}, {20, 1e9}, {21, 1e9}});
        const auto filtered = filter_universe(snapshot, 20.0, 0.0, 750e6);
        REQUIRE(filtered.candidates.size() == 2);
        CHECK(filtered.candidates[0].score == 20);
        CHECK(filtered.candidates[1].score == 21);
    }

    SUBCASE("bottom 12% by market cap removed when percentile cap is below the floor") {
        UniverseSnapshot snapshot;
        for (int i = 1; i <= 100; ++i)
            snapshot.candidates.push_back({"X" + std::to_string(1000 + i), 50.0, 1e6 * i, 0.5});
        const auto filtered = filter_universe(snapshot, 20.0, 0.12, 750e6);
        CHECK(filtered.candidates.size() == 88);
        for (const auto& c : filtered.candidates)
            CHECK(c.market_cap_usd > 12e6);
    }

    SUBCASE("US$750M floor applies when the percentile cap exceeds it") {
        UniverseSnapshot snapshot;
        for (int i = 1; i <= 100; ++i)
            snapshot.candidates.push_back({"X" + std::to_string(1000 + i), 50.0, 1e9 * i, 0.5});
        const auto filtered = filter_universe(snapshot, 20.0, 0.12, 750e6);
        CHECK(filtered.candidates.size() == 100); // nobody is below 750M

        // The floor branch is idempotent.
        const auto twice = filter_universe(filtered, 20.0, 0.12, 750e6);
        CHECK(twice.candidates.size() == filtered.candidates.size());
    }

    SUBCASE("output is always a subset of the input") {
        Rng rng(9);
        UniverseSnapshot snapshot;
        for (int i = 0; i < 60; ++i)
            snapshot.candidates.push_back({"X" + std::to_string(100 + i), rng.uniform(0.0, 100.0),
                                           std::exp(rng.uniform(18.0, 25.0)), 0.5});
        std::sort(snapshot.candidates.begin(), snapshot.candidates.end(),
                  [](const fin::Candidate& a, const fin::Candidate& b) {
                      return a.asset_id < b.asset_id;
                  });
        const auto filtered = filter_universe(snapshot, 20.0, 0.12, 750e6);
        for (const auto& c : filtered.candidates) {
            const bool present =
                std::any_of(snapshot.candidates.begin(), snapshot.candidates.end(),
                            [&](const fin::Candidate& o) { return o.asset_id == c.asset_id; });
            CHECK(present);
        }
    }

    SUBCASE("filtering everything is an error") {
        auto snapshot = synthetic_snapshot({{5, 1e9}, {10, 1e9}});
        CHECK_THROWS_AS((void)filter_universe(snapshot, 20.0, 0.12, 750e6), EmptyUniverseError);
    }
}

TEST_CASE("universe targets are unweighted means") {
    auto snapshot = synthetic_snapshot({{50, 10e9}, {60, 20e9}});
    const auto targets = universe_targets(snapshot);
    CHECK(targets.avg_market_cap_usd == doctest::Approx(15e9));
    CHECK(targets.avg_book_to_price == doctest::Approx(0.5));

    auto single = synthetic_snapshot({{42, 7e9}});
    const auto t1 = universe_targets(single);
    CHECK(t1.avg_market_cap_usd == doctest::Approx(7e9));

    // Loop oracle on a 100-candidate fixture.
    Rng rng(10);
    UniverseSnapshot big;
    double cap_sum = 0, b2p_sum = 0;
    for (int i = 0; i < 100; ++i) {
        fin::Candidate c{"X" + std::to_string(i), 50.0, rng.uniform(1e9, 9e9),
                         rng.uniform(0.2, 0.9)};
        cap_sum += c.market_cap_usd;
        b2p_sum += c.book_to_price;
        big.candidates.push_back(std::move(c));
    }
    const auto tb = universe_targets(big);
    CHECK(tb.avg_market_cap_usd == doctest::Approx(cap_sum / 100).epsilon(1e-12));
    CHECK(tb.avg_book_to_price == doctest::Approx(b2p_sum / 100).epsilon(1e-12));
}

TEST_CASE("returns matrix window length") {
    TempDir dir;
    const auto days = weekdays(360);
    const Date as_of = days[kLookbackDays];
    write_prices(dir.file("prices.csv"), 1, days);
    write_scores(dir.file("scores.csv"), 1);
    auto snapshot = load_universe(dir.file("scores.csv"), dir.file("prices.csv"), as_of);

    // Window length depends only on the list size; every id maps to the
    // same underlying series here.
    auto ids = [&](int n) {
        std::vector<std::string> v;
        for (int i = 0; i < n; ++i)
            v.push_back("X0");
        return v;
    };

    CHECK(build_returns_matrix(snapshot, ids(100), as_of).observations.rows() == 126);
    CHECK(build_returns_matrix(snapshot, ids(200), as_of).observations.rows() == 201);
    CHECK(build_returns_matrix(snapshot, ids(286), as_of).observations.rows() == 287);
    CHECK_THROWS_AS((void)build_returns_matrix(snapshot, ids(287), as_of), std::invalid_argument);

    // return_t = p_t / p_{t-1} - 1 against the known constant drift.
    const auto matrix = build_returns_matrix(snapshot, {"X0"}, as_of);
    CHECK(matrix.observations.rows() == 126);
    for (int r = 0; r < matrix.observations.rows(); ++r)
        CHECK(matrix.observations(r, 0) == doctest::Approx(0.0005).epsilon(1e-9));
}

TEST_CASE("compute_statistics") {
    SUBCASE("constant series has zero variance") {
        ReturnsMatrix m;
        m.asset_ids = {"A", "B"};
        m.observations.resize(10, 2);
        m.observations.col(0).setConstant(0.01);
        for (int r = 0; r < 10; ++r)
            m.observations(r, 1) = 0.001 * r;
        const auto stats = compute_statistics(m);
        CHECK(stats.covariance(0, 0) == doctest::Approx(0.0));
        CHECK(stats.covariance(0, 1) == doctest::Approx(0.0));
        CHECK(stats.covariance(1, 0) == doctest::Approx(0.0));
        CHECK(stats.observation_count == 10);
    }

    SUBCASE("perfectly correlated assets: covariance = product of standard deviations") {
        ReturnsMatrix m;
        m.asset_ids = {"A", "B"};
        m.observations.resize(50, 2);
        Rng rng(11);
        for (int r = 0; r < 50; ++r) {
            const double x = rng.uniform(-0.02, 0.02);
            m.observations(r, 0) = x;
            m.observations(r, 1) = 3.0 * x; // exact linear dependence
        }
        const auto stats = compute_statistics(m);
        const double sd0 = std::sqrt(stats.covariance(0, 0));
        const double sd1 = std::sqrt(stats.covariance(1, 1));
        CHECK(stats.covariance(0, 1) == doctest::Approx(sd0 * sd1).epsilon(1e-10));
    }

    SUBCASE("random matrix matches the textbook two-pass oracle") {
        ReturnsMatrix m;
        m.asset_ids = {"A", "B", "C", "D", "E"};
        m.observations.resize(200, 5);
        Rng rng(12);
        for (int r = 0; r < 200; ++r)
            for (int c = 0; c < 5; ++c)
                m.observations(r, c) = rng.uniform(-0.05, 0.05);
        const auto stats = compute_statistics(m);

        for (int c = 0; c < 5; ++c) {
            double mean = 0;
            for (int r = 0; r < 200; ++r)
                mean += m.observations(r, c);
            mean /= 200;
            CHECK(stats.mean_returns(c) == doctest::Approx(mean).epsilon(1e-12));
            for (int c2 = 0; c2 < 5; ++c2) {
                double mean2 = 0;
                for (int r = 0; r < 200; ++r)
                    mean2 += m.observations(r, c2);
                mean2 /= 200;
                double cov = 0;
                for (int r = 0; r < 200; ++r)
                    cov += (m.observations(r, c) - mean) * (m.observations(r, c2) - mean2);
                cov /= 199;
                CHECK(stats.covariance(c, c2) == doctest::Approx(cov).epsilon(1e-10));
            }
        }
        // Exact symmetry as stored.
        CHECK(stats.covariance == stats.covariance.transpose().eval());
    }
}

TEST_CASE("risk-free lookup picks the nearest date, earlier on ties") {
    TempDir dir;
    write_lines(dir.file("rf.csv"), {"date,daily_rate", "2001-01-01,0.0001", "2001-01-05,0.0002",
                                     "2001-01-09,0.0003"});

    CHECK(load_risk_free(dir.file("rf.csv"), parse_date("2001-01-05")) == doctest::Approx(0.0002));
    CHECK(load_risk_free(dir.file("rf.csv"), parse_date("2001-01-08")) == doctest::Approx(0.0003));
    // 2001-01-07 is equidistant from 01-05 and 01-09: earlier wins.
    CHECK(load_risk_free(dir.file("rf.csv"), parse_date("2001-01-07")) == doctest::Approx(0.0002));

    write_lines(dir.file("empty.csv"), {"date,daily_rate"});
    CHECK_THROWS_AS((void)load_risk_free(dir.file("empty.csv"), parse_date("2001-01-01")),
                    DataError);
}

TEST_CASE("score file round trip preserves candidate values") {
    TempDir dir;
    const auto days = weekdays(360);
    const Date as_of = days[kLookbackDays];
    write_prices(dir.file("prices.csv"), 5, days);
    write_scores(dir.file("scores.csv"), 5);
    const auto snapshot = load_universe(dir.file("scores.csv"), dir.file("prices.csv"), as_of);

    std::vector<std::string> lines{"asset_id,score,market_cap_usd,book_to_price"};
    for (const auto& c : snapshot.candidates)
        lines.push_back(c.asset_id + "," + fmt_double(c.score) + "," +
                        fmt_double(c.market_cap_usd) + "," + fmt_double(c.book_to_price));
    write_lines(dir.file("rewritten.csv"), lines);
    const auto reloaded = load_universe(dir.file("rewritten.csv"), dir.file("prices.csv"), as_of);

    REQUIRE(reloaded.candidates.size() == snapshot.candidates.size());
    for (std::size_t i = 0; i < snapshot.candidates.size(); ++i) {
        CHECK(reloaded.candidates[i].asset_id == snapshot.candidates[i].asset_id);
        CHECK(reloaded.candidates[i].score == snapshot.candidates[i].score);
        CHECK(reloaded.candidates[i].market_cap_usd == snapshot.candidates[i].market_cap_usd);
        CHECK(reloaded.candidates[i].book_to_price == snapshot.candidates[i].book_to_price);
    }
}

TEST_CASE("price gaps forward-fill up to five days") {
    TempDir dir;
    const auto days = weekdays(20);
    std::vector<std::string> lines{"date,asset_id,close_usd"};
    for (std::size_t t = 0; t < days.size(); ++t)
        lines.push_back(format_date(days[t]) + ",ALL,50"); // anchors the calendar
    for (std::size_t t = 0; t < days.size(); ++t) {
        if (t >= 5 && t < 9)
            continue; // 4-day gap: fillable
        lines.push_back(format_date(days[t]) + ",G1,100");
    }
    for (std::size_t t = 0; t < days.size(); ++t) {
        if (t >= 5 && t < 12)
            continue; // 7-day gap: too long
        lines.push_back(format_date(days[t]) + ",G2,100");
    }
    write_lines(dir.file("prices.csv"), lines);
    const auto table = PriceTable::load(dir.file("prices.csv"));
    CHECK(table.complete_window("G1", 0, days.size() - 1));
    CHECK_FALSE(table.complete_window("G2", 0, days.size() - 1));
    CHECK(table.complete_window("G2", 12, days.size() - 1));
}
