#include "evoport/portfolio/analytics.hpp"

#include "evoport/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace evoport::fin {

std::pair<int, int> cardinality_bounds(double min_weight, double max_weight) {
    if (!(min_weight > 0.0 && min_weight < max_weight && max_weight <= 1.0))
        throw std::invalid_argument("cardinality_bounds: require 0 < min_weight < max_weight <= 1");
    const int max_n = static_cast<int>(std::llround(1.0 / min_weight));
    const int min_n = static_cast<int>(std::ceil(1.0 / max_weight - 1e-9));
    return {min_n, max_n};
}

double portfolio_mean_return(const Eigen::VectorXd& weights, const Eigen::VectorXd& mean_returns) {
    if (weights.size() != mean_returns.size())
        throw std::invalid_argument("portfolio_mean_return: dimension mismatch");
    return weights.dot(mean_returns);
}

double portfolio_variance(const Eigen::VectorXd& weights, const Eigen::MatrixXd& covariance) {
    if (covariance.rows() != covariance.cols() || weights.size() != covariance.rows())
        throw std::invalid_argument("portfolio_variance: dimension mismatch");
    return weights.dot(covariance * weights);
}

double sharpe_ratio(double mean_return, double variance, double risk_free_rate,
                    int periods_per_year) {
    if (variance < 0.0)
        throw std::invalid_argument("sharpe_ratio: negative variance");
    if (variance == 0.0)
        throw DegeneratePortfolioError("sharpe_ratio: zero-variance portfolio");
    const double periods = static_cast<double>(periods_per_year);
    return ((mean_return - risk_free_rate) * periods) /
           (std::sqrt(variance) * std::sqrt(periods));
}

double turnover(const Portfolio& previous, const Portfolio& proposed) {
    if (previous.empty())
        return 0.0;
    double sum = 0.0;
    auto p = previous.holdings.begin();
    auto q = proposed.holdings.begin();
    while (p != previous.holdings.end() || q != proposed.holdings.end()) {
        if (q == proposed.holdings.end() ||
            (p != previous.holdings.end() && p->first < q->first)) {
            sum += std::abs(p->second);
            ++p;
        } else if (p == previous.holdings.end() || q->first < p->first) {
            sum += std::abs(q->second);
            ++q;
        } else {
            sum += std::abs(q->second - p->second);
            ++p;
            ++q;
        }
    }
    return 0.5 * sum;
}

double weighted_market_cap(const Portfolio& portfolio, const std::vector<Candidate>& universe) {
    std::unordered_map<std::string, const Candidate*> by_id;
    by_id.reserve(universe.size());
    for (const auto& c : universe)
        by_id.emplace(c.asset_id, &c);
    double total = 0.0;
    for (const auto& [id, w] : portfolio.holdings) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw DataConsistencyError("weighted_market_cap: holding '" + id +
                                       "' missing from universe");
        total += w * it->second->market_cap_usd;
    }
    return total;
}

ConstraintReport check_constraints(const Portfolio& portfolio, const ConstraintSet& constraints,
                                   const Portfolio& previous,
                                   const std::vector<Candidate>& universe) {
    constraints.validate();
    ConstraintReport report;

    const auto [min_n, max_n] = cardinality_bounds(constraints.min_weight, constraints.max_weight);
    const auto n = static_cast<int>(portfolio.holdings.size());
    report.holdings_count = portfolio.holdings.size();
    if (n < min_n) {
        report.cardinality = {false, static_cast<double>(min_n - n)};
    } else if (n > max_n) {
        report.cardinality = {false, static_cast<double>(n - max_n)};
    }

    double position_violation = 0.0;
    for (const auto& [id, w] : portfolio.holdings) {
        if (w <= 0.0)
            continue;
        if (w < constraints.min_weight - 1e-12)
            position_violation += constraints.min_weight - w;
        else if (w > constraints.max_weight + 1e-12)
            position_violation += w - constraints.max_weight;
    }
    if (position_violation > 0.0)
        report.positions = {false, position_violation};

    std::unordered_map<std::string, const Candidate*> by_id;
    by_id.reserve(universe.size());
    for (const auto& c : universe)
        by_id.emplace(c.asset_id, &c);
    double wcap = 0.0, wb2p = 0.0;
    for (const auto& [id, w] : portfolio.holdings) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw DataConsistencyError("check_constraints: holding '" + id +
                                       "' missing from universe");
        wcap += w * it->second->market_cap_usd;
        wb2p += w * it->second->book_to_price;
    }
    report.weighted_market_cap_usd = wcap;
    report.weighted_book_to_price = wb2p;
    if (wcap < constraints.market_cap_target_usd)
        report.market_cap = {false, constraints.market_cap_target_usd - wcap};

    if (constraints.book_to_price_ceiling && wb2p > *constraints.book_to_price_ceiling)
        report.book_to_price = {false, wb2p - *constraints.book_to_price_ceiling};

    double measured = turnover(previous, portfolio);
    if (constraints.turnover_convention == TurnoverConvention::two_way)
        measured *= 2.0;
    report.measured_turnover = measured;
    if (measured > constraints.turnover_budget() + 1e-12)
        report.turnover = {false, measured - constraints.turnover_budget()};

    return report;
}

} // namespace evoport::fin
