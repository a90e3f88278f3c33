#pragma once

#include "evoport/portfolio/types.hpp"

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace evoport::fin {

inline constexpr int kTradingDaysPerYear = 252;

// Cardinality bounds implied by the position limits: a portfolio of
// minimum-size positions can hold at most max_n = round(1/min_weight)
// names, and one of maximum-size positions needs at least
// min_n = ceil(1/max_weight). Rounding reproduces (25, 286) for the
// default bounds (1/0.0035 = 285.71 rounds to 286).
std::pair<int, int> cardinality_bounds(double min_weight, double max_weight);

// Dot product of weights and expected daily returns.
double portfolio_mean_return(const Eigen::VectorXd& weights, const Eigen::VectorXd& mean_returns);

// Quadratic form w' Sigma w.
double portfolio_variance(const Eigen::VectorXd& weights, const Eigen::MatrixXd& covariance);

// Annualized Sharpe ratio from per-period statistics:
// (mean - rf) * periods / (sqrt(variance) * sqrt(periods)).
// Throws DegeneratePortfolioError when variance is zero.
double sharpe_ratio(double mean_return, double variance, double risk_free_rate,
                    int periods_per_year);

// One-way turnover 0.5 * sum over the asset union of |w_new - w_old|.
// An empty previous portfolio (inception) yields 0 by convention.
double turnover(const Portfolio& previous, const Portfolio& proposed);

double weighted_market_cap(const Portfolio& portfolio, const std::vector<Candidate>& universe);

// Evaluates every shared constraint; violations are data, not errors.
ConstraintReport check_constraints(const Portfolio& portfolio, const ConstraintSet& constraints,
                                   const Portfolio& previous,
                                   const std::vector<Candidate>& universe);

} // namespace evoport::fin
