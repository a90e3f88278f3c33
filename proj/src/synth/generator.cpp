#include "evoport/synth/generator.hpp"

#include "evoport/backtest/backtester.hpp"
#include "evoport/data/csv.hpp"
#include "evoport/data/universe.hpp"
#include "evoport/errors.hpp"
#include "evoport/rng.hpp"
#include "evoport/text.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <stdexcept>

namespace evoport::synth {

void SyntheticSpec::validate() const {
    if (n_assets < 2)
        throw std::invalid_argument("SyntheticSpec: n_assets must be >= 2");
    if (n_periods < 1)
        throw std::invalid_argument("SyntheticSpec: n_periods must be >= 1");
    if (n_days != 0 && n_days < required_days())
        throw std::invalid_argument("SyntheticSpec: n_days must be >= " +
                                    std::to_string(required_days()) + " for " +
                                    std::to_string(n_periods) + " periods");
    if (n_factors < 1)
        throw std::invalid_argument("SyntheticSpec: n_factors must be >= 1");
    if (information_coefficient < -1.0 || information_coefficient > 1.0)
        throw std::invalid_argument("SyntheticSpec: information_coefficient must be in [-1,1]");
    if (score_autocorr < 0.0 || score_autocorr >= 1.0)
        throw std::invalid_argument("SyntheticSpec: score_autocorr must be in [0,1)");
    if (!(cap_median_usd > 0.0) || !(b2p_median > 0.0))
        throw std::invalid_argument("SyntheticSpec: medians must be positive");
}

std::string score_file_path(const std::string& dir, Date as_of) {
    return dir + "/scores_" + format_date(as_of) + ".csv";
}

namespace {

std::string asset_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "A%04d", i);
    return buf;
}

// Weekday calendar starting at spec.start_date.
std::vector<Date> trading_calendar(Date start, int n_days) {
    std::vector<Date> days;
    days.reserve(static_cast<std::size_t>(n_days));
    std::int32_t serial = start.serial;
    while (static_cast<int>(days.size()) < n_days) {
        // serial 0 = 1970-01-01, a Thursday; weekday = (serial + 4) mod 7.
        const int weekday = ((serial + 4) % 7 + 7) % 7;
        if (weekday != 0 && weekday != 6)
            days.push_back(Date{serial});
        ++serial;
    }
    return days;
}

std::vector<double> zscore(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double var = 0.0;
    for (double v : values)
        var += (v - mean) * (v - mean);
    var /= n;
    const double sd = std::sqrt(var);
    std::vector<double> out(values.size(), 0.0);
    if (sd <= 0.0)
        return out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = (values[i] - mean) / sd;
    return out;
}

} // namespace

GeneratedFiles generate_universe(const SyntheticSpec& spec, const std::string& out_dir) {
    spec.validate();
    std::filesystem::create_directories(out_dir);

    const int n_days = spec.n_days == 0 ? spec.required_days() : spec.n_days;
    const int n = spec.n_assets;
    const auto calendar = trading_calendar(spec.start_date, n_days);

    Rng master(spec.rng_seed);
    Rng asset_rng = master.child(1);
    Rng factor_rng = master.child(2);
    Rng idio_rng = master.child(3);
    Rng score_rng = master.child(4);

    // Per-asset parameters.
    std::vector<double> drift(n), p0(n), cap_base(n), b2p(n);
    std::vector<std::vector<double>> loadings(n, std::vector<double>(spec.n_factors));
    for (int i = 0; i < n; ++i) {
        drift[i] = (spec.annual_drift_mean + spec.annual_drift_sigma * asset_rng.normal()) / 252.0;
        p0[i] = 50.0 * std::exp(0.6 * asset_rng.normal());
        cap_base[i] = spec.cap_median_usd * std::exp(spec.cap_sigma * asset_rng.normal());
        b2p[i] = spec.b2p_median * std::exp(spec.b2p_sigma * asset_rng.normal());
        loadings[i][0] = 1.0 + spec.market_beta_sigma * asset_rng.normal(); // market factor
        for (int k = 1; k < spec.n_factors; ++k)
            loadings[i][static_cast<std::size_t>(k)] = 0.5 * asset_rng.normal();
    }

    // Price paths: daily return = drift + loadings . factor returns + noise.
    std::vector<std::vector<double>> prices(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        prices[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(n_days));
        prices[static_cast<std::size_t>(i)][0] = p0[static_cast<std::size_t>(i)];
    }
    std::vector<double> factor_step(static_cast<std::size_t>(spec.n_factors));
    for (int t = 1; t < n_days; ++t) {
        for (int k = 0; k < spec.n_factors; ++k)
            factor_step[static_cast<std::size_t>(k)] = spec.factor_vol_daily * factor_rng.normal();
        for (int i = 0; i < n; ++i) {
            double r = drift[static_cast<std::size_t>(i)] + spec.idio_vol_daily * idio_rng.normal();
            for (int k = 0; k < spec.n_factors; ++k)
                r += loadings[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                     factor_step[static_cast<std::size_t>(k)];
            r = std::max(r, -0.9);
            prices[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] =
                prices[static_cast<std::size_t>(i)][static_cast<std::size_t>(t - 1)] * (1.0 + r);
        }
    }

    GeneratedFiles files;
    files.prices_path = out_dir + "/prices.csv";
    files.riskfree_path = out_dir + "/riskfree.csv";
    files.config_path = out_dir + "/backtest.toml";

    {
        std::vector<std::string> lines;
        lines.reserve(static_cast<std::size_t>(n_days) * static_cast<std::size_t>(n) + 1);
        lines.emplace_back("date,asset_id,close_usd");
        for (int t = 0; t < n_days; ++t) {
            const std::string day = format_date(calendar[static_cast<std::size_t>(t)]);
            for (int i = 0; i < n; ++i)
                lines.push_back(day + "," + asset_name(i) + "," +
                                fmt_double(prices[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)]));
        }
        data::write_lines(files.prices_path, lines);
    }

    {
        std::vector<std::string> lines;
        lines.reserve(static_cast<std::size_t>(n_days) + 1);
        lines.emplace_back("date,daily_rate");
        for (int t = 0; t < n_days; ++t)
            lines.push_back(format_date(calendar[static_cast<std::size_t>(t)]) + "," +
                            fmt_double(spec.risk_free_daily));
        data::write_lines(files.riskfree_path, lines);
    }

    // Rebalance dates: first at calendar index 287 (full lookback available),
    // then every 63 trading days.
    for (int k = 0; k < spec.n_periods; ++k)
        files.rebalance_dates.push_back(
            calendar[static_cast<std::size_t>(data::kLookbackDays) + static_cast<std::size_t>(63 * k)]);

    // Scores: ic-weighted blend of the standardized forward 63-day return
    // and an AR(1) noise state, mapped to [0, 100].
    const double ic = spec.information_coefficient;
    const double noise_weight = std::sqrt(std::max(0.0, 1.0 - ic * ic));
    std::vector<double> noise_state(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        noise_state[static_cast<std::size_t>(i)] = score_rng.normal();

    for (int k = 0; k < spec.n_periods; ++k) {
        const std::size_t t0 = data::kLookbackDays + static_cast<std::size_t>(63 * k);
        std::vector<double> forward(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            forward[static_cast<std::size_t>(i)] =
                prices[static_cast<std::size_t>(i)][t0 + data::kForwardDays] /
                    prices[static_cast<std::size_t>(i)][t0] -
                1.0;
        const auto signal = zscore(forward);

        if (k > 0) {
            const double rho = spec.score_autocorr;
            const double innov = std::sqrt(1.0 - rho * rho);
            for (int i = 0; i < n; ++i)
                noise_state[static_cast<std::size_t>(i)] =
                    rho * noise_state[static_cast<std::size_t>(i)] + innov * score_rng.normal();
        }

        std::vector<std::string> lines;
        lines.reserve(static_cast<std::size_t>(n) + 1);
        lines.emplace_back("asset_id,score,market_cap_usd,book_to_price");
        for (int i = 0; i < n; ++i) {
            const double raw = ic * signal[static_cast<std::size_t>(i)] +
                               noise_weight * noise_state[static_cast<std::size_t>(i)];
            const double score = std::clamp(50.0 + 15.0 * raw, 0.0, 100.0);
            const double cap = cap_base[static_cast<std::size_t>(i)] *
                               prices[static_cast<std::size_t>(i)][t0] /
                               prices[static_cast<std::size_t>(i)][0];
            lines.push_back(asset_name(i) + "," + fmt_double(score) + "," + fmt_double(cap) + "," +
                            fmt_double(b2p[static_cast<std::size_t>(i)]));
        }
        const std::string path = score_file_path(out_dir, files.rebalance_dates[static_cast<std::size_t>(k)]);
        data::write_lines(path, lines);
        files.score_paths.push_back(path);
    }

    {
        std::vector<std::string> lines;
        lines.emplace_back("# generated synthetic-market backtest configuration");
        lines.emplace_back("mandate = \"large-cap\"");
        lines.emplace_back("seed = " + std::to_string(spec.rng_seed));
        lines.emplace_back("scores_dir = \".\"");
        lines.emplace_back("prices = \"prices.csv\"");
        lines.emplace_back("riskfree = \"riskfree.csv\"");
        lines.emplace_back("out_prefix = \"out/backtest\"");
        std::string dates = "rebalance_dates = [";
        for (std::size_t i = 0; i < files.rebalance_dates.size(); ++i) {
            if (i)
                dates += ", ";
            dates += "\"" + format_date(files.rebalance_dates[i]) + "\"";
        }
        dates += "]";
        lines.push_back(std::move(dates));
        data::write_lines(files.config_path, lines);
    }

    return files;
}

std::vector<double> cap_weighted_benchmark(const std::string& price_path,
                                           const std::string& scores_dir,
                                           const std::vector<Date>& rebalance_dates) {
    auto prices = std::make_shared<data::PriceTable>(data::PriceTable::load(price_path));
    std::vector<double> returns;
    returns.reserve(rebalance_dates.size());
    for (Date d : rebalance_dates) {
        const auto snapshot = data::load_universe(score_file_path(scores_dir, d), prices, d);
        returns.push_back(backtest::benchmark_period_return(snapshot));
    }
    return returns;
}

} // namespace evoport::synth
