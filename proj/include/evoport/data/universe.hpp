#pragma once

#include "evoport/date.hpp"
#include "evoport/portfolio/types.hpp"

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace evoport::data {

// Daily closes aligned on a shared trading calendar (the union of dates in
// the price file). Gaps of up to 5 consecutive missing days are forward
// filled; longer gaps stay NaN and disqualify the asset for windows that
// touch them. Immutable after construction and safely shareable.
class PriceTable {
public:
    static PriceTable load(const std::string& price_path);

    const std::vector<Date>& calendar() const { return calendar_; }
    std::optional<std::size_t> index_of(Date d) const;
    bool has_asset(const std::string& asset_id) const { return series_.count(asset_id) > 0; }

    // Aligned close series for one asset; NaN marks missing days.
    const std::vector<double>& series(const std::string& asset_id) const;

    // True when the asset has prices at every calendar index in
    // [start, end] inclusive.
    bool complete_window(const std::string& asset_id, std::size_t start, std::size_t end) const;

    double price_at(const std::string& asset_id, std::size_t index) const;

    // Most recent available price at or before `index` (force-sell rule);
    // nullopt when the asset has no price up to that day.
    std::optional<double> last_price_at_or_before(const std::string& asset_id,
                                                  std::size_t index) const;

private:
    std::vector<Date> calendar_;
    std::unordered_map<std::string, std::vector<double>> series_;
};

struct ExclusionLog {
    std::string asset_id;
    std::string reason;
};

// Candidates joined to price history at one rebalance date. Candidates are
// sorted by asset id; genome index i in Phase I refers to candidates[i].
struct UniverseSnapshot {
    Date as_of{};
    std::size_t as_of_index = 0; // calendar position of as_of
    std::vector<fin::Candidate> candidates;
    std::shared_ptr<const PriceTable> prices;
    std::vector<ExclusionLog> exclusions;
};

// History requirements relative to the rebalance date: 287 daily closes
// strictly before it (Phase II lookback), the close on the date itself,
// and 63 closes strictly after it (forward performance window).
inline constexpr std::size_t kLookbackDays = 287;
inline constexpr std::size_t kForwardDays = 63;

UniverseSnapshot load_universe(const std::string& score_path, const std::string& price_path,
                               Date as_of);

// Variant reusing an already-loaded price table (the backtester's loop).
UniverseSnapshot load_universe(const std::string& score_path,
                               std::shared_ptr<const PriceTable> prices, Date as_of);

// Pre-filters: drop scores below score_floor, then remove the bottom
// cap_fraction of candidates by market cap -- unless the market cap at that
// rank exceeds cap_floor_usd, in which case only candidates below the floor
// are removed. Ties in market cap break by asset id.
UniverseSnapshot filter_universe(const UniverseSnapshot& snapshot, double score_floor = 20.0,
                                 double cap_fraction = 0.12, double cap_floor_usd = 750e6);

struct UniverseTargets {
    double avg_market_cap_usd = 0.0;
    double avg_book_to_price = 0.0;
};

// Unweighted arithmetic means over the snapshot's candidates.
UniverseTargets universe_targets(const UniverseSnapshot& snapshot);

// Daily risk-free rate whose date is nearest to as_of; ties resolve to the
// earlier date.
double load_risk_free(const std::string& rf_path, Date as_of);

} // namespace evoport::data
