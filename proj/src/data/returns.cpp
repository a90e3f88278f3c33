#include "evoport/data/returns.hpp"

#include "evoport/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evoport::data {

ReturnsMatrix build_returns_matrix(const UniverseSnapshot& snapshot,
                                   const std::vector<std::string>& asset_ids, Date as_of) {
    const std::size_t n = asset_ids.size();
    if (n == 0)
        throw std::invalid_argument("build_returns_matrix: empty asset list");
    if (n > static_cast<std::size_t>(kMaxReturnObservations) - 1)
        throw std::invalid_argument("build_returns_matrix: more than 286 assets");

    const auto idx = snapshot.prices->index_of(as_of);
    if (!idx)
        throw DataError("build_returns_matrix: " + format_date(as_of) + " not in calendar");
    const std::size_t end = *idx;

    const int t = std::clamp(static_cast<int>(n) + 1, kMinReturnObservations,
                             kMaxReturnObservations);
    if (end < static_cast<std::size_t>(t))
        throw DataError("build_returns_matrix: not enough history before " + format_date(as_of));

    ReturnsMatrix matrix;
    matrix.asset_ids = asset_ids;
    matrix.observations.resize(t, static_cast<Eigen::Index>(n));
    matrix.window_start = snapshot.prices->calendar()[end - static_cast<std::size_t>(t)];
    matrix.window_end = as_of;

    for (std::size_t a = 0; a < n; ++a) {
        const auto& series = snapshot.prices->series(asset_ids[a]);
        for (int r = 0; r < t; ++r) {
            const std::size_t i = end - static_cast<std::size_t>(t - 1 - r);
            const double p0 = series[i - 1];
            const double p1 = series[i];
            if (std::isnan(p0) || std::isnan(p1))
                throw DataError("build_returns_matrix: missing price for asset '" + asset_ids[a] +
                                "' inside the return window");
            matrix.observations(r, static_cast<Eigen::Index>(a)) = p1 / p0 - 1.0;
        }
    }
    return matrix;
}

fin::ReturnStatistics compute_statistics(const ReturnsMatrix& matrix) {
    const Eigen::Index t = matrix.observations.rows();
    const Eigen::Index n = matrix.observations.cols();
    if (t < 2)
        throw std::invalid_argument("compute_statistics: need at least two observations");

    fin::ReturnStatistics stats;
    stats.observation_count = static_cast<int>(t);
    stats.mean_returns = matrix.observations.colwise().mean();

    const Eigen::MatrixXd centered = matrix.observations.rowwise() - stats.mean_returns.transpose();
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(t - 1);
    // Mirror the upper triangle so the stored matrix is exactly symmetric.
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            cov(j, i) = cov(i, j);
    stats.covariance = std::move(cov);
    return stats;
}

} // namespace evoport::data
