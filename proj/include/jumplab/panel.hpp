#pragma once

// Intraday return grids: the data model shared by every other module, plus
// ingestion of equally spaced price files.

#include <jumplab/error.hpp>

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace jumplab {

/// Simulated ground truth for one day.
struct GroundTruth {
    std::size_t day_index = 0;
    int dN_p = 0;         // price jump occurred
    double z_p = 0.0;     // signed price jump, log-return units
    int dN_v = 0;         // volatility jump occurred
    double z_v = 0.0;     // volatility jump, variance units
    double v_open = 0.0;
    double v_close = 0.0;
    double delta_p = 0.0;  // intensities in effect for the day
    double delta_v = 0.0;
    std::optional<std::size_t> jump_step;  // fine-grid step (1-based) carrying the price jump
};

/// One trading day of equally spaced log-returns.
class IntradayDay {
public:
    static constexpr std::size_t min_returns = 4;

    IntradayDay(std::size_t day_index, std::vector<double> returns,
                std::optional<GroundTruth> truth = std::nullopt, std::string label = {})
        : day_index_(day_index), returns_(std::move(returns)), truth_(std::move(truth)),
          label_(std::move(label)) {
        if (returns_.size() < min_returns)
            throw InsufficientData("IntradayDay: at least 4 returns required, got " +
                                   std::to_string(returns_.size()));
        for (double r : returns_)
            if (!std::isfinite(r)) throw DataError("IntradayDay: non-finite return on day " + std::to_string(day_index_));
        if (truth_ && truth_->day_index != day_index_)
            throw DataError("IntradayDay: ground truth day index does not match");
    }

    std::size_t day_index() const { return day_index_; }
    std::span<const double> returns() const { return returns_; }
    std::size_t M() const { return returns_.size(); }
    const std::optional<GroundTruth>& truth() const { return truth_; }
    const std::string& label() const { return label_; }

    double daily_return() const {
        double s = 0.0;
        for (double r : returns_) s += r;
        return s;
    }

private:
    std::size_t day_index_;
    std::vector<double> returns_;
    std::optional<GroundTruth> truth_;
    std::string label_;
};

/// An ordered run of days sharing one intraday grid.
class Panel {
public:
    Panel() = default;

    void push_back(IntradayDay day) {
        if (!days_.empty()) {
            if (day.day_index() <= days_.back().day_index())
                throw DataError("Panel: day indices must be strictly increasing");
            if (day.M() != days_.front().M())
                throw DataError("Panel: all days must share the same number of returns");
        }
        days_.push_back(std::move(day));
    }

    std::span<const IntradayDay> days() const { return days_; }
    std::size_t T() const { return days_.size(); }
    bool empty() const { return days_.empty(); }
    const IntradayDay& operator[](std::size_t t) const { return days_[t]; }

private:
    std::vector<IntradayDay> days_;
};

/// Log-returns ln(p[i+1]) - ln(p[i]) from a sequence of positive price levels.
inline std::vector<double> returns_from_prices(std::span<const double> prices) {
    if (prices.size() < 5)
        throw InsufficientData("returns_from_prices: need at least 5 prices, got " + std::to_string(prices.size()));
    for (std::size_t i = 0; i < prices.size(); ++i)
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i]))
            throw DataError("returns_from_prices: price #" + std::to_string(i) + " is not a positive finite number");
    std::vector<double> out(prices.size() - 1);
    for (std::size_t i = 0; i + 1 < prices.size(); ++i) out[i] = std::log(prices[i + 1]) - std::log(prices[i]);
    return out;
}

/// Aggregates consecutive blocks of k returns by summation.
inline std::vector<double> thin(std::span<const double> returns, std::size_t k) {
    if (k == 0) throw DomainError("thin: k must be positive");
    if (returns.size() % k != 0)
        throw DomainError("thin: k=" + std::to_string(k) + " does not divide M=" + std::to_string(returns.size()));
    std::vector<double> out(returns.size() / k, 0.0);
    for (std::size_t j = 0; j < out.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = j * k; i < (j + 1) * k; ++i) s += returns[i];
        out[j] = s;
    }
    return out;
}

/// Thins a whole day; ground truth is carried over unchanged.
inline IntradayDay thin(const IntradayDay& day, std::size_t k) {
    return IntradayDay(day.day_index(), thin(day.returns(), k), day.truth(), day.label());
}

struct CsvLoadResult {
    Panel panel;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return fields;
}

inline bool valid_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

inline bool valid_time(std::string_view s) {
    if (s.size() != 8 || s[2] != ':' || s[5] != ':') return false;
    for (std::size_t i : {0, 1, 3, 4, 6, 7})
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

}  // namespace detail

/// Reads a `date,time,price` file into one IntradayDay per date.
///
/// Every date must carry exactly `grid` prices. With `pad_forward`, dates
/// missing interior grid times are forward-filled and a warning is recorded;
/// the grid times are the distinct times observed across the file.
inline CsvLoadResult load_intraday_csv(const std::string& path, std::size_t grid, bool pad_forward = false) {
    if (grid < IntradayDay::min_returns + 1)
        throw DomainError("load_intraday_csv: grid must be at least 5 observations per day");
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    {
        const auto header = detail::split_csv(line);
        if (header.size() != 3 || header[0] != "date" || header[1] != "time" || header[2] != "price")
            throw DataError(path + ": expected header 'date,time,price'");
    }

    // date -> time -> price; std::map keeps both levels sorted.
    std::map<std::string, std::map<std::string, double>> rows;
    std::size_t line_no = 1;
    std::pair<std::string, std::string> last;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv(line);
        const std::string where = path + ":" + std::to_string(line_no);
        if (f.size() != 3) throw DataError(where + ": expected 3 fields");
        if (!detail::valid_date(f[0])) throw DataError(where + ": bad date '" + std::string(f[0]) + "'");
        if (!detail::valid_time(f[1])) throw DataError(where + ": bad time '" + std::string(f[1]) + "'");
        double price = 0.0;
        const auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), price);
        if (ec != std::errc{} || ptr != f[2].data() + f[2].size())
            throw DataError(where + ": bad price '" + std::string(f[2]) + "'");
        if (!(price > 0.0) || !std::isfinite(price))
            throw DataError(where + ": price must be positive and finite, got " + std::string(f[2]));
        std::pair<std::string, std::string> key{std::string(f[0]), std::string(f[1])};
        if (line_no > 2 && key <= last) throw DataError(where + ": rows must be sorted by (date,time) without duplicates");
        last = key;
        rows[key.first][key.second] = price;
    }

    std::vector<std::string> grid_times;
    if (pad_forward) {
        std::set<std::string> all;
        for (const auto& [date, prices] : rows)
            for (const auto& [time, price] : prices) all.insert(time);
        if (all.size() != grid)
            throw DataError(path + ": found " + std::to_string(all.size()) + " distinct times, grid expects " +
                            std::to_string(grid));
        grid_times.assign(all.begin(), all.end());
    }

    CsvLoadResult result;
    std::vector<std::string> bad_dates;
    std::size_t index = 0;
    for (const auto& [date, prices] : rows) {
        std::vector<double> levels;
        levels.reserve(grid);
        if (prices.size() == grid) {
            for (const auto& [time, price] : prices) levels.push_back(price);
        } else if (pad_forward && prices.size() < grid) {
            if (!prices.contains(grid_times.front()) || !prices.contains(grid_times.back())) {
                bad_dates.push_back(date);
                continue;
            }
            double carry = 0.0;
            std::size_t filled = 0;
            for (const auto& t : grid_times) {
                const auto it = prices.find(t);
                if (it != prices.end()) {
                    carry = it->second;
                } else {
                    ++filled;
                }
                levels.push_back(carry);
            }
            result.warnings.push_back(date + ": forward-filled " + std::to_string(filled) + " missing price(s)");
        } else {
            bad_dates.push_back(date);
            continue;
        }
        result.panel.push_back(IntradayDay(index++, returns_from_prices(levels), std::nullopt, date));
    }
    if (!bad_dates.empty()) {
        std::string msg = path + ": wrong number of observations (expected " + std::to_string(grid) + ") on";
        for (const auto& d : bad_dates) msg += " " + d;
        throw DataError(msg);
    }
    return result;
}

}  // namespace jumplab
