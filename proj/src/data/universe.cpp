#include "evoport/data/universe.hpp"

#include "evoport/data/csv.hpp"
#include "evoport/errors.hpp"
#include "evoport/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

namespace evoport::data {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMaxForwardFill = 5;

} // namespace

PriceTable PriceTable::load(const std::string& price_path) {
    CsvTable csv = read_csv(price_path);
    const std::size_t c_date = csv.column("date");
    const std::size_t c_id = csv.column("asset_id");
    const std::size_t c_close = csv.column("close_usd");

    // First pass: the trading calendar is the union of dates present.
    std::set<Date> dates;
    for (const auto& row : csv.rows)
        dates.insert(parse_date(row[c_date]));

    PriceTable table;
    table.calendar_.assign(dates.begin(), dates.end());
    std::unordered_map<std::int32_t, std::size_t> date_index;
    date_index.reserve(table.calendar_.size());
    for (std::size_t i = 0; i < table.calendar_.size(); ++i)
        date_index.emplace(table.calendar_[i].serial, i);

    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        Date d{};
        double close = 0.0;
        try {
            d = parse_date(row[c_date]);
            close = parse_double(row[c_close]);
        } catch (const ParseError& e) {
            throw ParseError(price_path, csv.row_lines[r], e.what());
        }
        if (!(close > 0.0) || !std::isfinite(close))
            throw ParseError(price_path, csv.row_lines[r], "close must be a positive number");
        auto& series = table.series_[row[c_id]];
        if (series.empty())
            series.assign(table.calendar_.size(), kMissing);
        double& slot = series[date_index.at(d.serial)];
        if (!std::isnan(slot))
            throw ParseError(price_path, csv.row_lines[r],
                             "duplicate price for asset '" + row[c_id] + "' on " + row[c_date]);
        slot = close;
    }

    // Forward-fill gaps of at most kMaxForwardFill consecutive days.
    for (auto& [id, series] : table.series_) {
        (void)id;
        std::size_t gap = 0;
        double last = kMissing;
        for (double& px : series) {
            if (!std::isnan(px)) {
                last = px;
                gap = 0;
            } else if (!std::isnan(last) && gap < kMaxForwardFill) {
                px = last;
                ++gap;
            } else {
                ++gap;
            }
        }
    }
    return table;
}

std::optional<std::size_t> PriceTable::index_of(Date d) const {
    auto it = std::lower_bound(calendar_.begin(), calendar_.end(), d);
    if (it == calendar_.end() || !(*it == d))
        return std::nullopt;
    return static_cast<std::size_t>(it - calendar_.begin());
}

const std::vector<double>& PriceTable::series(const std::string& asset_id) const {
    auto it = series_.find(asset_id);
    if (it == series_.end())
        throw DataConsistencyError("no price series for asset '" + asset_id + "'");
    return it->second;
}

bool PriceTable::complete_window(const std::string& asset_id, std::size_t start,
                                 std::size_t end) const {
    auto it = series_.find(asset_id);
    if (it == series_.end() || end >= it->second.size())
        return false;
    for (std::size_t i = start; i <= end; ++i)
        if (std::isnan(it->second[i]))
            return false;
    return true;
}

double PriceTable::price_at(const std::string& asset_id, std::size_t index) const {
    const auto& s = series(asset_id);
    if (index >= s.size() || std::isnan(s[index]))
        throw DataConsistencyError("no price for asset '" + asset_id + "' at calendar index " +
                                   std::to_string(index));
    return s[index];
}

std::optional<double> PriceTable::last_price_at_or_before(const std::string& asset_id,
                                                          std::size_t index) const {
    auto it = series_.find(asset_id);
    if (it == series_.end())
        return std::nullopt;
    const auto& s = it->second;
    for (std::size_t i = std::min(index, s.size() - 1) + 1; i-- > 0;)
        if (!std::isnan(s[i]))
            return s[i];
    return std::nullopt;
}

UniverseSnapshot load_universe(const std::string& score_path, const std::string& price_path,
                               Date as_of) {
    auto prices = std::make_shared<PriceTable>(PriceTable::load(price_path));
    return load_universe(score_path, std::move(prices), as_of);
}

UniverseSnapshot load_universe(const std::string& score_path,
                               std::shared_ptr<const PriceTable> prices, Date as_of) {
    CsvTable csv = read_csv(score_path);
    const std::size_t c_id = csv.column("asset_id");
    const std::size_t c_score = csv.column("score");
    const std::size_t c_cap = csv.column("market_cap_usd");
    const std::size_t c_b2p = csv.column("book_to_price");

    UniverseSnapshot snapshot;
    snapshot.as_of = as_of;
    snapshot.prices = std::move(prices);

    const auto as_of_index = snapshot.prices->index_of(as_of);
    if (!as_of_index)
        throw DataError("rebalance date " + format_date(as_of) + " is not a trading day in the price file");
    snapshot.as_of_index = *as_of_index;
    if (snapshot.as_of_index < kLookbackDays)
        throw DataError("rebalance date " + format_date(as_of) + " has fewer than " +
                        std::to_string(kLookbackDays) + " calendar days of history");

    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        fin::Candidate cand;
        cand.asset_id = row[c_id];
        try {
            cand.score = parse_double(row[c_score]);
            cand.market_cap_usd = parse_double(row[c_cap]);
            cand.book_to_price = parse_double(row[c_b2p]);
        } catch (const ParseError& e) {
            throw ParseError(score_path, csv.row_lines[r], e.what());
        }
        if (!seen.insert(cand.asset_id).second)
            throw ParseError(score_path, csv.row_lines[r],
                             "duplicate asset_id '" + cand.asset_id + "'");
        if (!std::isfinite(cand.score))
            throw ParseError(score_path, csv.row_lines[r], "score must be finite");
        if (!(cand.market_cap_usd > 0.0))
            throw ParseError(score_path, csv.row_lines[r], "market_cap_usd must be positive");
        if (!(cand.book_to_price > 0.0))
            throw ParseError(score_path, csv.row_lines[r], "book_to_price must be positive");

        if (!snapshot.prices->has_asset(cand.asset_id)) {
            snapshot.exclusions.push_back({cand.asset_id, "no price series"});
            continue;
        }
        const std::size_t start = snapshot.as_of_index - kLookbackDays;
        const std::size_t end = snapshot.as_of_index + kForwardDays;
        if (end >= snapshot.prices->calendar().size()) {
            snapshot.exclusions.push_back({cand.asset_id, "calendar too short for forward window"});
            continue;
        }
        if (!snapshot.prices->complete_window(cand.asset_id, start, end)) {
            snapshot.exclusions.push_back(
                {cand.asset_id, "incomplete price history around " + format_date(as_of)});
            continue;
        }
        snapshot.candidates.push_back(std::move(cand));
    }

    std::sort(snapshot.candidates.begin(), snapshot.candidates.end(),
              [](const fin::Candidate& a, const fin::Candidate& b) { return a.asset_id < b.asset_id; });

    if (snapshot.candidates.empty())
        throw EmptyUniverseError("no candidates with sufficient history in '" + score_path + "'");
    return snapshot;
}

UniverseSnapshot filter_universe(const UniverseSnapshot& snapshot, double score_floor,
                                 double cap_fraction, double cap_floor_usd) {
    if (snapshot.candidates.empty())
        throw EmptyUniverseError("filter_universe: empty input snapshot");

    UniverseSnapshot out;
    out.as_of = snapshot.as_of;
    out.as_of_index = snapshot.as_of_index;
    out.prices = snapshot.prices;
    out.exclusions = snapshot.exclusions;

    std::vector<fin::Candidate> kept;
    for (const auto& c : snapshot.candidates) {
        if (c.score < score_floor)
            out.exclusions.push_back({c.asset_id, "score below floor"});
        else
            kept.push_back(c);
    }

    const std::size_t k = static_cast<std::size_t>(
        std::floor(cap_fraction * static_cast<double>(kept.size())));
    if (k > 0 && !kept.empty()) {
        std::vector<std::size_t> order(kept.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (kept[a].market_cap_usd != kept[b].market_cap_usd)
                return kept[a].market_cap_usd < kept[b].market_cap_usd;
            return kept[a].asset_id < kept[b].asset_id;
        });
        std::vector<bool> drop(kept.size(), false);
        const double cutoff_cap = kept[order[k - 1]].market_cap_usd;
        if (cutoff_cap > cap_floor_usd) {
            // The percentile lands above the small-cap floor: cut at the
            // floor instead.
            for (std::size_t i = 0; i < kept.size(); ++i)
                if (kept[i].market_cap_usd < cap_floor_usd)
                    drop[i] = true;
        } else {
            for (std::size_t r = 0; r < k; ++r)
                drop[order[r]] = true;
        }
        std::vector<fin::Candidate> final_set;
        for (std::size_t i = 0; i < kept.size(); ++i) {
            if (drop[i])
                out.exclusions.push_back({kept[i].asset_id, "market cap cutoff"});
            else
                final_set.push_back(kept[i]);
        }
        kept = std::move(final_set);
    }

    if (kept.empty())
        throw EmptyUniverseError("filter_universe: all candidates filtered out");
    out.candidates = std::move(kept);
    return out;
}

UniverseTargets universe_targets(const UniverseSnapshot& snapshot) {
    if (snapshot.candidates.empty())
        throw EmptyUniverseError("universe_targets: empty snapshot");
    UniverseTargets t;
    for (const auto& c : snapshot.candidates) {
        t.avg_market_cap_usd += c.market_cap_usd;
        t.avg_book_to_price += c.book_to_price;
    }
    const double n = static_cast<double>(snapshot.candidates.size());
    t.avg_market_cap_usd /= n;
    t.avg_book_to_price /= n;
    return t;
}

double load_risk_free(const std::string& rf_path, Date as_of) {
    CsvTable csv = read_csv(rf_path);
    const std::size_t c_date = csv.column("date");
    const std::size_t c_rate = csv.column("daily_rate");
    if (csv.rows.empty())
        throw DataError("risk-free file '" + rf_path + "' has no rows");

    bool found = false;
    Date best{};
    double best_rate = 0.0;
    for (const auto& row : csv.rows) {
        const Date d = parse_date(row[c_date]);
        const double rate = parse_double(row[c_rate]);
        if (!found) {
            found = true;
            best = d;
            best_rate = rate;
            continue;
        }
        const auto dist = [&](Date x) { return std::abs(x.serial - as_of.serial); };
        if (dist(d) < dist(best) || (dist(d) == dist(best) && d < best)) {
            best = d;
            best_rate = rate;
        }
    }
    return best_rate;
}

} // namespace evoport::data
