#pragma once

#include "evoport/data/universe.hpp"
#include "evoport/portfolio/types.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace evoport::data {

// Daily simple returns ending at the snapshot date, T x N with T > N.
struct ReturnsMatrix {
    std::vector<std::string> asset_ids;
    Eigen::MatrixXd observations; // T rows (time ascending), N columns
    Date window_start{};
    Date window_end{};
};

inline constexpr int kMinReturnObservations = 126; // six months
inline constexpr int kMaxReturnObservations = 287;

// Window length T = clamp(N + 1, 126, 287) daily simple returns ending at
// as_of; return_t = price_t / price_{t-1} - 1. Requires |asset_ids| <= 286
// so T always exceeds N.
ReturnsMatrix build_returns_matrix(const UniverseSnapshot& snapshot,
                                   const std::vector<std::string>& asset_ids, Date as_of);

// Per-asset sample means and the 1/(T-1) sample covariance; the stored
// matrix equals its transpose exactly.
fin::ReturnStatistics compute_statistics(const ReturnsMatrix& matrix);

} // namespace evoport::data
