#pragma once

#include "anomalyscan/month.hpp"

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace anomalyscan {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// Months x stocks matrix of simple monthly returns on a gap-free month axis.
// Missing cells are NaN. Stocks are kept in lexicographic id order, which is
// the canonical tie-break order for every downstream ranking.
class MonthlyPanel {
public:
    MonthlyPanel() = default;
    // Validates all invariants; throws ValidationError.
    MonthlyPanel(MonthKey first_month, std::size_t n_months, std::vector<std::string> stocks,
                 std::vector<double> returns);

    std::size_t n_months() const noexcept { return n_months_; }
    std::size_t n_stocks() const noexcept { return stocks_.size(); }
    MonthKey first_month() const noexcept { return first_; }
    MonthKey last_month() const noexcept { return first_ + static_cast<std::int64_t>(n_months_) - 1; }
    MonthKey month(std::size_t i) const noexcept { return first_ + static_cast<std::int64_t>(i); }
    std::optional<std::size_t> month_index(MonthKey m) const noexcept;

    const std::vector<std::string>& stocks() const noexcept { return stocks_; }
    std::optional<std::size_t> stock_index(const std::string& id) const;

    // Contiguous cross-section for month i.
    std::span<const double> row(std::size_t i) const noexcept {
        return {returns_.data() + i * stocks_.size(), stocks_.size()};
    }
    double at(std::size_t month_idx, std::size_t stock_idx) const noexcept {
        return returns_[month_idx * stocks_.size() + stock_idx];
    }
    static bool missing(double r) noexcept { return r != r; }

    // Sub-panel over [first, last] (clamped to the axis); throws if empty.
    MonthlyPanel slice(MonthKey first, MonthKey last) const;

    bool operator==(const MonthlyPanel& other) const;

private:
    MonthKey first_{};
    std::size_t n_months_ = 0;
    std::vector<std::string> stocks_;
    std::vector<double> returns_;
};

struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    MonthKey month_key() const { return MonthKey(year, month); }
    auto operator<=>(const Date&) const = default;
    std::string to_string() const;
};

struct DailyBar {
    Date date;
    double ret = 0.0;
    double volume = 0.0; // currency units
};

struct StockBars {
    std::string stock;
    std::vector<DailyBar> bars; // strictly increasing dates
};

// Per-stock daily bars, stocks in lexicographic order.
class DailyBarSet {
public:
    DailyBarSet() = default;
    explicit DailyBarSet(std::vector<StockBars> stocks);

    const std::vector<StockBars>& stocks() const noexcept { return stocks_; }
    std::size_t bar_count() const noexcept;

private:
    std::vector<StockBars> stocks_;
};

// Monthly factor returns on a gap-free month axis.
struct FactorSeries {
    MonthKey first_month{};
    std::vector<double> mkt;
    std::vector<double> smb;
    std::vector<double> hml;
    std::optional<std::vector<double>> index_logret;
    std::optional<std::vector<double>> macro_index;

    std::size_t n_months() const noexcept { return mkt.size(); }
    MonthKey month(std::size_t i) const noexcept { return first_month + static_cast<std::int64_t>(i); }
    MonthKey last_month() const noexcept { return first_month + static_cast<std::int64_t>(mkt.size()) - 1; }
    std::optional<std::size_t> month_index(MonthKey m) const noexcept;

    void validate() const;
    FactorSeries slice(MonthKey first, MonthKey last) const;
    bool operator==(const FactorSeries&) const = default;
};

struct AlignedSample {
    MonthlyPanel panel;
    FactorSeries factors;
};

struct IngestConfig {
    // Return tokens read as an explicit missing cell.
    std::vector<std::string> missing_tokens{"", "NA", "NaN", "nan"};
    bool drop_empty_stocks = true;
};

struct LoadReport {
    std::vector<std::string> dropped_stocks;
    std::vector<std::string> warnings;
};

MonthlyPanel parse_monthly_panel(std::istream& in, const IngestConfig& config = {},
                                 LoadReport* report = nullptr, const std::string& source = "<stream>");
MonthlyPanel load_monthly_panel(const std::filesystem::path& path, const IngestConfig& config = {},
                                LoadReport* report = nullptr);

DailyBarSet parse_daily_bars(std::istream& in, const std::string& source = "<stream>");
DailyBarSet load_daily_bars(const std::filesystem::path& path);

FactorSeries parse_factors(std::istream& in, const std::string& source = "<stream>");
FactorSeries load_factors(const std::filesystem::path& path);

// Restricts both inputs to the intersection of their month axes.
AlignedSample align_months(const MonthlyPanel& panel, const FactorSeries& factors);

// Writers emit the same schemas the loaders accept, at round-trip precision.
void write_monthly_panel(std::ostream& out, const MonthlyPanel& panel);
void write_daily_bars(std::ostream& out, const DailyBarSet& bars);
void write_factors(std::ostream& out, const FactorSeries& factors);

} // namespace anomalyscan
