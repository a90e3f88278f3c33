#pragma once

#include "evoport/date.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace evoport::fin {

// One investable stock at a rebalance date.
struct Candidate {
    std::string asset_id;
    double score = 0.0;         // multi-factor stock score, unitless
    double market_cap_usd = 0.0;
    double book_to_price = 0.0;
};

enum class TurnoverConvention {
    one_way, // 0.5 * sum |dw|  (default)
    two_way, // sum |dw|
};

// Position, turnover, market-cap and style constraints shared by both MOEA
// phases and the backtester. The monthly turnover cap is enforced per
// rebalance event as rebalance_months * monthly_turnover_cap.
struct ConstraintSet {
    double min_weight = 0.0035;
    double max_weight = 0.04;
    double monthly_turnover_cap = 0.08;
    int rebalance_months = 3;
    double market_cap_target_usd = 0.0;            // per period, from the universe
    std::optional<double> book_to_price_ceiling;   // growth mandate only
    TurnoverConvention turnover_convention = TurnoverConvention::one_way;

    double turnover_budget() const { return rebalance_months * monthly_turnover_cap; }

    void validate() const {
        if (!(min_weight > 0.0 && min_weight < max_weight && max_weight <= 1.0))
            throw std::invalid_argument("ConstraintSet: require 0 < min_weight < max_weight <= 1");
        if (!(monthly_turnover_cap > 0.0 && monthly_turnover_cap <= 1.0))
            throw std::invalid_argument("ConstraintSet: monthly_turnover_cap must be in (0,1]");
        if (rebalance_months < 1)
            throw std::invalid_argument("ConstraintSet: rebalance_months must be >= 1");
    }
};

struct ConstraintCheck {
    bool pass = true;
    double violation = 0.0; // magnitude in the check's natural units, 0 when passing
};

struct ConstraintReport {
    ConstraintCheck cardinality;
    ConstraintCheck positions;     // violation in weight units
    ConstraintCheck market_cap;    // violation in USD shortfall
    ConstraintCheck book_to_price; // passes trivially when no ceiling is set
    ConstraintCheck turnover;      // violation in turnover fraction

    std::size_t holdings_count = 0;
    double weighted_market_cap_usd = 0.0;
    double weighted_book_to_price = 0.0;
    double measured_turnover = 0.0;

    bool all_pass() const {
        return cardinality.pass && positions.pass && market_cap.pass && book_to_price.pass &&
               turnover.pass;
    }
};

struct PortfolioDiagnostics {
    std::vector<double> objectives; // problem-reported values, natural orientation
    double sharpe_ratio = 0.0;
    ConstraintReport report;
    std::vector<std::string> repair_events;
};

// Finalized portfolio: weights sum to 1 and every nonzero weight respects
// the position bounds. Holdings are kept sorted by asset id so emitted
// files are deterministic.
struct Portfolio {
    std::map<std::string, double> holdings; // asset id -> fraction of NAV, nonzero only
    Date as_of{};
    PortfolioDiagnostics diagnostics;

    bool empty() const { return holdings.empty(); }
};

// Daily return statistics for one candidate asset list.
struct ReturnStatistics {
    Eigen::VectorXd mean_returns;  // per-asset daily mean simple return
    Eigen::MatrixXd covariance;    // symmetric PSD, 1/(T-1) normalization
    int observation_count = 0;
};

} // namespace evoport::fin
