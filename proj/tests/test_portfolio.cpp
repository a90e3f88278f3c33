#include "evoport/errors.hpp"
#include "evoport/portfolio/analytics.hpp"
#include "evoport/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace evoport;
using namespace evoport::fin;

namespace {

Portfolio make_portfolio(std::initializer_list<std::pair<const char*, double>> holdings) {
    Portfolio p;
    for (const auto& [id, w] : holdings)
        p.holdings.emplace(id, w);
    return p;
}

Eigen::MatrixXd random_psd(Rng& rng, int n) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = rng.uniform(-1.0, 1.0);
    return a.transpose() * a;
}

} // namespace

TEST_CASE("cardinality bounds") {
    CHECK(cardinality_bounds(0.0035, 0.04) == std::pair<int, int>{25, 286});
    CHECK(cardinality_bounds(0.01, 0.10) == std::pair<int, int>{10, 100});
    CHECK(cardinality_bounds(0.5, 1.0) == std::pair<int, int>{1, 2});
    CHECK_THROWS_AS((void)cardinality_bounds(0.05, 0.04), std::invalid_argument);
    CHECK_THROWS_AS((void)cardinality_bounds(0.0, 0.04), std::invalid_argument);
}

TEST_CASE("portfolio mean return") {
    Eigen::VectorXd w(2), mu(2);
    w << 0.5, 0.5;
    mu << 0.01, 0.03;
    CHECK(portfolio_mean_return(w, mu) == doctest::Approx(0.02));

    w << 1.0, 0.0;
    CHECK(portfolio_mean_return(w, mu) == doctest::Approx(0.01));

    Eigen::VectorXd bad(3);
    CHECK_THROWS_AS((void)portfolio_mean_return(w, bad), std::invalid_argument);

    // Elementwise-loop oracle on a random 20-asset case.
    Rng rng(1);
    Eigen::VectorXd w20(20), mu20(20);
    for (int i = 0; i < 20; ++i) {
        w20(i) = rng.uniform01();
        mu20(i) = rng.uniform(-0.01, 0.01);
    }
    double expected = 0.0;
    for (int i = 0; i < 20; ++i)
        expected += w20(i) * mu20(i);
    CHECK(portfolio_mean_return(w20, mu20) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("portfolio variance") {
    Eigen::VectorXd w(2);
    w << 0.5, 0.5;
    CHECK(portfolio_variance(w, Eigen::MatrixXd::Identity(2, 2)) == doctest::Approx(0.5));
    CHECK(portfolio_variance(w, Eigen::MatrixXd::Zero(2, 2)) == doctest::Approx(0.0));

    // Double-loop oracle on a random PSD 10x10 case.
    Rng rng(2);
    const auto cov = random_psd(rng, 10);
    Eigen::VectorXd w10(10);
    for (int i = 0; i < 10; ++i)
        w10(i) = rng.uniform01();
    double expected = 0.0;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            expected += w10(i) * cov(i, j) * w10(j);
    CHECK(portfolio_variance(w10, cov) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("portfolio variance is nonnegative on random PSD matrices") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_index(8));
        const auto cov = random_psd(rng, n);
        Eigen::VectorXd w(n);
        for (int i = 0; i < n; ++i)
            w(i) = rng.uniform(-2.0, 2.0);
        CHECK(portfolio_variance(w, cov) >= -1e-10);
    }
}

TEST_CASE("sharpe ratio") {
    CHECK(sharpe_ratio(0.10, 0.04, 0.02, 1) == doctest::Approx(0.4));
    CHECK(sharpe_ratio(0.05, 0.09, 0.05, 1) == doctest::Approx(0.0));

    // Daily case: (0.0007 * 252) / (0.01 * sqrt(252)).
    const double expected = (0.0007 * 252.0) / (0.01 * std::sqrt(252.0));
    CHECK(sharpe_ratio(0.0008, 0.0001, 0.0001, 252) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(sharpe_ratio(0.0008, 0.0001, 0.0001, 252) == doctest::Approx(1.1113).epsilon(1e-3));

    CHECK_THROWS_AS((void)sharpe_ratio(0.1, 0.0, 0.0, 252), DegeneratePortfolioError);

    // Strictly increasing in mean, strictly decreasing in variance.
    CHECK(sharpe_ratio(0.11, 0.04, 0.02, 12) > sharpe_ratio(0.10, 0.04, 0.02, 12));
    CHECK(sharpe_ratio(0.10, 0.05, 0.02, 12) < sharpe_ratio(0.10, 0.04, 0.02, 12));
}

TEST_CASE("turnover") {
    const auto p = make_portfolio({{"A", 0.5}, {"B", 0.5}});
    CHECK(turnover(p, p) == doctest::Approx(0.0));

    const auto q = make_portfolio({{"A", 0.6}, {"B", 0.4}});
    CHECK(turnover(p, q) == doctest::Approx(0.1));

    const auto a = make_portfolio({{"A", 1.0}});
    const auto b = make_portfolio({{"B", 1.0}});
    CHECK(turnover(a, b) == doctest::Approx(1.0));

    CHECK(turnover(Portfolio{}, q) == doctest::Approx(0.0)); // inception convention
}

TEST_CASE("turnover symmetry and range on random pairs") {
    Rng rng(4);
    const char* names[6] = {"A", "B", "C", "D", "E", "F"};
    for (int trial = 0; trial < 200; ++trial) {
        Portfolio p, q;
        double ps = 0, qs = 0;
        for (int i = 0; i < 6; ++i) {
            if (rng.uniform01() < 0.7) {
                const double w = rng.uniform01();
                p.holdings.emplace(names[i], w);
                ps += w;
            }
            if (rng.uniform01() < 0.7) {
                const double w = rng.uniform01();
                q.holdings.emplace(names[i], w);
                qs += w;
            }
        }
        if (p.empty() || q.empty())
            continue;
        for (auto& [id, w] : p.holdings)
            w /= ps;
        for (auto& [id, w] : q.holdings)
            w /= qs;
        const double pq = turnover(p, q);
        CHECK(pq == doctest::Approx(turnover(q, p)));
        CHECK(pq >= 0.0);
        CHECK(pq <= 1.0 + 1e-12);
        CHECK(turnover(p, p) == doctest::Approx(0.0));
    }
}

TEST_CASE("weighted market cap") {
    std::vector<Candidate> universe{{"A", 50, 10e9, 0.5}, {"B", 60, 20e9, 0.4}};

    CHECK(weighted_market_cap(make_portfolio({{"A", 1.0}}), universe) == doctest::Approx(10e9));
    CHECK(weighted_market_cap(make_portfolio({{"A", 0.5}, {"B", 0.5}}), universe) ==
          doctest::Approx(15e9));
    CHECK_THROWS_AS((void)weighted_market_cap(make_portfolio({{"Z", 1.0}}), universe),
                    DataConsistencyError);

    // Loop oracle over a 50-asset random case.
    Rng rng(5);
    std::vector<Candidate> big;
    Portfolio p;
    double expected = 0.0, sum = 0.0;
    for (int i = 0; i < 50; ++i) {
        Candidate c{"S" + std::to_string(i), 50.0, rng.uniform(1e9, 50e9), 0.5};
        big.push_back(c);
        const double w = rng.uniform01();
        p.holdings.emplace(c.asset_id, w);
        sum += w;
    }
    for (auto& [id, w] : p.holdings)
        w /= sum;
    for (const auto& c : big)
        expected += p.holdings.at(c.asset_id) * c.market_cap_usd;
    CHECK(weighted_market_cap(p, big) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("check constraints") {
    ConstraintSet constraints;
    constraints.market_cap_target_usd = 5e9;

    std::vector<Candidate> universe;
    for (int i = 0; i < 40; ++i)
        universe.push_back({"S" + std::to_string(i), 50.0, 8e9, 0.5});

    SUBCASE("30-asset equal weight passes everything") {
        Portfolio p;
        for (int i = 0; i < 30; ++i)
            p.holdings.emplace("S" + std::to_string(i), 1.0 / 30.0);
        const auto report = check_constraints(p, constraints, Portfolio{}, universe);
        CHECK(report.all_pass());
        CHECK(report.holdings_count == 30);
        CHECK(report.weighted_market_cap_usd == doctest::Approx(8e9));
    }

    SUBCASE("one oversized position fails with the right magnitude") {
        Portfolio p;
        for (int i = 0; i < 29; ++i)
            p.holdings.emplace("S" + std::to_string(i), (1.0 - 0.05) / 29.0);
        p.holdings.emplace("S29", 0.05);
        const auto report = check_constraints(p, constraints, Portfolio{}, universe);
        CHECK_FALSE(report.positions.pass);
        CHECK(report.positions.violation == doctest::Approx(0.01));
    }

    SUBCASE("turnover breach magnitude against the quarterly budget") {
        Portfolio prev, next;
        for (int i = 0; i < 30; ++i)
            prev.holdings.emplace("S" + std::to_string(i), 1.0 / 30.0);
        // Move 9 names (0.30 of one-way weight) to new assets.
        for (int i = 0; i < 30; ++i) {
            if (i < 21)
                next.holdings.emplace("S" + std::to_string(i), 1.0 / 30.0);
            else
                next.holdings.emplace("S" + std::to_string(i + 9), 1.0 / 30.0);
        }
        CHECK(turnover(prev, next) == doctest::Approx(0.30));
        const auto report = check_constraints(next, constraints, prev, universe);
        CHECK_FALSE(report.turnover.pass);
        CHECK(report.turnover.violation == doctest::Approx(0.06));
        CHECK(report.measured_turnover == doctest::Approx(0.30));
    }

    SUBCASE("book-to-price ceiling only when configured") {
        Portfolio p;
        for (int i = 0; i < 30; ++i)
            p.holdings.emplace("S" + std::to_string(i), 1.0 / 30.0);
        auto growth = constraints;
        growth.book_to_price_ceiling = 0.4; // universe b2p is 0.5
        const auto report = check_constraints(p, growth, Portfolio{}, universe);
        CHECK_FALSE(report.book_to_price.pass);
        CHECK(report.book_to_price.violation == doctest::Approx(0.1));
        CHECK(check_constraints(p, constraints, Portfolio{}, universe).book_to_price.pass);
    }

    SUBCASE("cardinality bounds enforced") {
        Portfolio p;
        for (int i = 0; i < 10; ++i)
            p.holdings.emplace("S" + std::to_string(i), 0.1);
        const auto report = check_constraints(p, constraints, Portfolio{}, universe);
        CHECK_FALSE(report.cardinality.pass);
        CHECK(report.cardinality.violation == doctest::Approx(15)); // 25 - 10
    }
}

TEST_CASE("constraint report ignores holdings insertion order") {
    ConstraintSet constraints;
    constraints.market_cap_target_usd = 5e9;
    std::vector<Candidate> universe;
    for (int i = 0; i < 30; ++i)
        universe.push_back({"S" + std::to_string(i), 50.0, 6e9 + 1e8 * i, 0.4 + 0.01 * i});

    Portfolio forward, backward;
    for (int i = 0; i < 30; ++i)
        forward.holdings.emplace("S" + std::to_string(i), 1.0 / 30.0);
    for (int i = 29; i >= 0; --i)
        backward.holdings.emplace("S" + std::to_string(i), 1.0 / 30.0);

    const auto a = check_constraints(forward, constraints, Portfolio{}, universe);
    const auto b = check_constraints(backward, constraints, Portfolio{}, universe);
    CHECK(a.all_pass() == b.all_pass());
    CHECK(a.weighted_market_cap_usd == b.weighted_market_cap_usd);
    CHECK(a.weighted_book_to_price == b.weighted_book_to_price);
}
