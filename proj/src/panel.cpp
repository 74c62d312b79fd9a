#include "anomalyscan/panel.hpp"

#include "anomalyscan/errors.hpp"
#include "csv_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace anomalyscan {

// ---------------------------------------------------------------------------
// MonthKey / Date
// ---------------------------------------------------------------------------

MonthKey::MonthKey(int year, int month) {
    if (month < 1 || month > 12) {
        throw ValidationError("month out of range 1..12: " + std::to_string(month));
    }
    index_ = static_cast<std::int64_t>(year) * 12 + (month - 1);
}

std::string MonthKey::to_string() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year(), month());
    return buf;
}

std::string Date::to_string() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

// ---------------------------------------------------------------------------
// MonthlyPanel
// ---------------------------------------------------------------------------

MonthlyPanel::MonthlyPanel(MonthKey first_month, std::size_t n_months, std::vector<std::string> stocks,
                           std::vector<double> returns)
    : first_(first_month), n_months_(n_months), stocks_(std::move(stocks)), returns_(std::move(returns)) {
    if (returns_.size() != n_months_ * stocks_.size()) {
        throw ValidationError("panel matrix has " + std::to_string(returns_.size()) + " cells, expected " +
                              std::to_string(n_months_) + " x " + std::to_string(stocks_.size()));
    }
    for (std::size_t i = 1; i < stocks_.size(); ++i) {
        if (!(stocks_[i - 1] < stocks_[i])) {
            throw ValidationError("panel stocks must be unique and sorted; offending id '" + stocks_[i] + "'");
        }
    }
    for (std::size_t c = 0; c < returns_.size(); ++c) {
        const double r = returns_[c];
        if (missing(r)) continue;
        if (!std::isfinite(r) || r <= -1.0) {
            throw ValidationError("return " + std::to_string(r) + " for " + stocks_[c % stocks_.size()] + " in " +
                                  month(c / stocks_.size()).to_string() + " is not a valid simple return (> -1)");
        }
    }
}

std::optional<std::size_t> MonthlyPanel::month_index(MonthKey m) const noexcept {
    const auto d = m - first_;
    if (d < 0 || d >= static_cast<std::int64_t>(n_months_)) return std::nullopt;
    return static_cast<std::size_t>(d);
}

std::optional<std::size_t> MonthlyPanel::stock_index(const std::string& id) const {
    auto it = std::lower_bound(stocks_.begin(), stocks_.end(), id);
    if (it == stocks_.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - stocks_.begin());
}

MonthlyPanel MonthlyPanel::slice(MonthKey first, MonthKey last) const {
    const MonthKey lo = std::max(first, first_);
    const MonthKey hi = std::min(last, last_month());
    if (n_months_ == 0 || hi < lo) throw ValidationError("panel slice is empty");
    const auto off = static_cast<std::size_t>(lo - first_);
    const auto count = static_cast<std::size_t>(hi - lo + 1);
    const std::size_t n = stocks_.size();
    std::vector<double> cells(returns_.begin() + static_cast<std::ptrdiff_t>(off * n),
                              returns_.begin() + static_cast<std::ptrdiff_t>((off + count) * n));
    return MonthlyPanel(lo, count, stocks_, std::move(cells));
}

bool MonthlyPanel::operator==(const MonthlyPanel& other) const {
    if (first_ != other.first_ || n_months_ != other.n_months_ || stocks_ != other.stocks_) return false;
    for (std::size_t i = 0; i < returns_.size(); ++i) {
        const double a = returns_[i];
        const double b = other.returns_[i];
        if (missing(a) != missing(b)) return false;
        if (!missing(a) && a != b) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// DailyBarSet / FactorSeries
// ---------------------------------------------------------------------------

DailyBarSet::DailyBarSet(std::vector<StockBars> stocks) : stocks_(std::move(stocks)) {
    std::sort(stocks_.begin(), stocks_.end(), [](const auto& a, const auto& b) { return a.stock < b.stock; });
    for (std::size_t s = 0; s < stocks_.size(); ++s) {
        if (s > 0 && stocks_[s - 1].stock == stocks_[s].stock) {
            throw ValidationError("stock '" + stocks_[s].stock + "' appears twice in daily bars");
        }
        const auto& bars = stocks_[s].bars;
        for (std::size_t i = 0; i < bars.size(); ++i) {
            if (i > 0 && !(bars[i - 1].date < bars[i].date)) {
                throw ValidationError("daily bars for '" + stocks_[s].stock + "' are not strictly increasing at " +
                                      bars[i].date.to_string());
            }
            if (!(bars[i].volume >= 0.0)) {
                throw ValidationError("negative volume for '" + stocks_[s].stock + "' on " + bars[i].date.to_string());
            }
        }
    }
}

std::size_t DailyBarSet::bar_count() const noexcept {
    std::size_t n = 0;
    for (const auto& s : stocks_) n += s.bars.size();
    return n;
}

std::optional<std::size_t> FactorSeries::month_index(MonthKey m) const noexcept {
    const auto d = m - first_month;
    if (d < 0 || d >= static_cast<std::int64_t>(n_months())) return std::nullopt;
    return static_cast<std::size_t>(d);
}

void FactorSeries::validate() const {
    const std::size_t n = mkt.size();
    if (smb.size() != n || hml.size() != n || (index_logret && index_logret->size() != n) ||
        (macro_index && macro_index->size() != n)) {
        throw ValidationError("factor series do not share one month axis");
    }
}

FactorSeries FactorSeries::slice(MonthKey first, MonthKey last) const {
    const MonthKey lo = std::max(first, first_month);
    const MonthKey hi = std::min(last, last_month());
    if (n_months() == 0 || hi < lo) throw ValidationError("factor slice is empty");
    const auto off = static_cast<std::size_t>(lo - first_month);
    const auto count = static_cast<std::size_t>(hi - lo + 1);
    auto cut = [&](const std::vector<double>& v) {
        return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(off),
                                   v.begin() + static_cast<std::ptrdiff_t>(off + count));
    };
    FactorSeries out;
    out.first_month = lo;
    out.mkt = cut(mkt);
    out.smb = cut(smb);
    out.hml = cut(hml);
    if (index_logret) out.index_logret = cut(*index_logret);
    if (macro_index) out.macro_index = cut(*macro_index);
    return out;
}

AlignedSample align_months(const MonthlyPanel& panel, const FactorSeries& factors) {
    factors.validate();
    if (panel.n_months() == 0 || factors.n_months() == 0) {
        throw ValidationError("cannot align: empty month axis");
    }
    const MonthKey lo = std::max(panel.first_month(), factors.first_month);
    const MonthKey hi = std::min(panel.last_month(), factors.last_month());
    if (hi < lo) {
        throw ValidationError("month axes do not overlap: panel " + panel.first_month().to_string() + ".." +
                              panel.last_month().to_string() + ", factors " + factors.first_month.to_string() +
                              ".." + factors.last_month().to_string());
    }
    return AlignedSample{panel.slice(lo, hi), factors.slice(lo, hi)};
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

using csv::LineReader;

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input file: " + path.string());
    return in;
}

int parse_month_field(const LineReader& r, std::string_view field) {
    const int m = r.to_int(field, "month");
    if (m < 1 || m > 12) r.fail("month out of range 1..12");
    return m;
}

Date parse_date(const LineReader& r, std::string_view field) {
    // YYYY-MM-DD
    if (field.size() != 10 || field[4] != '-' || field[7] != '-') r.fail("date must be YYYY-MM-DD");
    Date d;
    d.year = r.to_int(field.substr(0, 4), "year");
    d.month = r.to_int(field.substr(5, 2), "month");
    d.day = r.to_int(field.substr(8, 2), "day");
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) r.fail("invalid calendar date");
    return d;
}

} // namespace

MonthlyPanel parse_monthly_panel(std::istream& in, const IngestConfig& config, LoadReport* report,
                                 const std::string& source) {
    LineReader reader(in, source);
    reader.expect_header({"stock", "year", "month", "return"});

    // (stock, month index) -> value; NaN marks an explicit missing token.
    std::map<std::string, std::map<std::int64_t, double>> cells;
    std::vector<std::string_view> f;
    while (reader.next(f)) {
        if (f.size() != 4) reader.fail("expected 4 fields, got " + std::to_string(f.size()));
        std::string stock(csv::trim(f[0]));
        if (stock.empty()) reader.fail("empty stock id");
        const MonthKey month(reader.to_int(f[1], "year"), parse_month_field(reader, f[2]));
        const auto token = csv::trim(f[3]);
        double value = kMissing;
        if (std::find(config.missing_tokens.begin(), config.missing_tokens.end(), token) ==
            config.missing_tokens.end()) {
            value = reader.to_double(token, "return");
            if (!std::isfinite(value)) reader.fail("non-finite return");
            if (value <= -1.0) reader.fail("return " + std::string(token) + " <= -1 for " + stock);
        }
        auto& by_month = cells[stock];
        if (!by_month.emplace(month.index(), value).second) {
            reader.fail("duplicate cell for " + stock + "/" + month.to_string());
        }
    }

    std::vector<std::string> stocks;
    std::int64_t lo = 0;
    std::int64_t hi = -1;
    bool any = false;
    for (const auto& [stock, by_month] : cells) {
        const bool has_value = std::any_of(by_month.begin(), by_month.end(),
                                           [](const auto& kv) { return !MonthlyPanel::missing(kv.second); });
        if (!has_value && config.drop_empty_stocks) {
            if (report) {
                report->dropped_stocks.push_back(stock);
                report->warnings.push_back(source + ": dropped stock " + stock + " (no valid observations)");
            }
            continue;
        }
        stocks.push_back(stock);
        for (const auto& [idx, v] : by_month) {
            if (!any) {
                lo = hi = idx;
                any = true;
            }
            lo = std::min(lo, idx);
            hi = std::max(hi, idx);
        }
    }
    if (!any || stocks.empty()) throw ValidationError(source + ": no usable observations");

    const auto n_months = static_cast<std::size_t>(hi - lo + 1);
    std::vector<double> matrix(n_months * stocks.size(), kMissing);
    for (std::size_t s = 0; s < stocks.size(); ++s) {
        for (const auto& [idx, v] : cells[stocks[s]]) {
            matrix[static_cast<std::size_t>(idx - lo) * stocks.size() + s] = v;
        }
    }
    return MonthlyPanel(MonthKey::from_index(lo), n_months, std::move(stocks), std::move(matrix));
}

MonthlyPanel load_monthly_panel(const std::filesystem::path& path, const IngestConfig& config, LoadReport* report) {
    auto in = open_or_throw(path);
    return parse_monthly_panel(in, config, report, path.string());
}

DailyBarSet parse_daily_bars(std::istream& in, const std::string& source) {
    LineReader reader(in, source);
    reader.expect_header({"stock", "date", "return", "volume"});
    std::map<std::string, std::vector<DailyBar>> by_stock;
    std::vector<std::string_view> f;
    while (reader.next(f)) {
        if (f.size() != 4) reader.fail("expected 4 fields, got " + std::to_string(f.size()));
        std::string stock(csv::trim(f[0]));
        if (stock.empty()) reader.fail("empty stock id");
        DailyBar bar;
        bar.date = parse_date(reader, csv::trim(f[1]));
        bar.ret = reader.to_double(f[2], "return");
        bar.volume = reader.to_double(f[3], "volume");
        if (!std::isfinite(bar.ret) || bar.ret <= -1.0) reader.fail("daily return must be finite and > -1");
        if (!std::isfinite(bar.volume)) reader.fail("non-finite volume");
        if (bar.volume < 0.0) reader.fail("negative volume for " + stock);
        auto& bars = by_stock[stock];
        if (!bars.empty() && !(bars.back().date < bar.date)) {
            reader.fail("dates for " + stock + " not strictly increasing (" + bar.date.to_string() + " after " +
                        bars.back().date.to_string() + ")");
        }
        bars.push_back(bar);
    }
    std::vector<StockBars> stocks;
    for (auto& [stock, bars] : by_stock) stocks.push_back({stock, std::move(bars)});
    return DailyBarSet(std::move(stocks));
}

DailyBarSet load_daily_bars(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_daily_bars(in, path.string());
}

FactorSeries parse_factors(std::istream& in, const std::string& source) {
    LineReader reader(in, source);
    const auto header = reader.header();
    const std::vector<std::string> required{"year", "month", "mkt", "smb", "hml"};
    if (header.size() < required.size() || !std::equal(required.begin(), required.end(), header.begin())) {
        reader.fail("factor header must start with year,month,mkt,smb,hml");
    }
    int index_col = -1;
    int macro_col = -1;
    for (std::size_t c = required.size(); c < header.size(); ++c) {
        if (header[c] == "index_logret" && index_col < 0) {
            index_col = static_cast<int>(c);
        } else if (header[c] == "macro_index" && macro_col < 0) {
            macro_col = static_cast<int>(c);
        } else {
            reader.fail("unexpected factor column '" + header[c] + "'");
        }
    }

    FactorSeries out;
    std::vector<double> index_values;
    std::vector<double> macro_values;
    std::vector<std::string_view> f;
    bool first = true;
    MonthKey expected{};
    while (reader.next(f)) {
        if (f.size() != header.size()) {
            reader.fail("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
        }
        const MonthKey month(reader.to_int(f[0], "year"), parse_month_field(reader, f[1]));
        if (first) {
            out.first_month = month;
            first = false;
        } else if (month != expected) {
            reader.fail("factor months must be consecutive; expected " + expected.to_string() + ", got " +
                        month.to_string());
        }
        expected = month + 1;
        out.mkt.push_back(reader.to_double(f[2], "mkt"));
        out.smb.push_back(reader.to_double(f[3], "smb"));
        out.hml.push_back(reader.to_double(f[4], "hml"));
        if (index_col >= 0) index_values.push_back(reader.to_double(f[static_cast<std::size_t>(index_col)], "index_logret"));
        if (macro_col >= 0) {
            const double level = reader.to_double(f[static_cast<std::size_t>(macro_col)], "macro_index");
            if (!(level > 0.0)) reader.fail("macro_index level must be positive");
            macro_values.push_back(level);
        }
    }
    if (first) throw ValidationError(source + ": no factor rows");
    if (index_col >= 0) out.index_logret = std::move(index_values);
    if (macro_col >= 0) out.macro_index = std::move(macro_values);
    out.validate();
    return out;
}

FactorSeries load_factors(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_factors(in, path.string());
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

void write_monthly_panel(std::ostream& out, const MonthlyPanel& panel) {
    out << "stock,year,month,return\n";
    for (std::size_t s = 0; s < panel.n_stocks(); ++s) {
        for (std::size_t t = 0; t < panel.n_months(); ++t) {
            const double r = panel.at(t, s);
            if (MonthlyPanel::missing(r)) continue;
            const MonthKey m = panel.month(t);
            out << panel.stocks()[s] << ',' << m.year() << ',' << m.month() << ',' << csv::exact(r) << '\n';
        }
    }
}

void write_daily_bars(std::ostream& out, const DailyBarSet& bars) {
    out << "stock,date,return,volume\n";
    for (const auto& s : bars.stocks()) {
        for (const auto& b : s.bars) {
            out << s.stock << ',' << b.date.to_string() << ',' << csv::exact(b.ret) << ',' << csv::exact(b.volume)
                << '\n';
        }
    }
}

void write_factors(std::ostream& out, const FactorSeries& factors) {
    factors.validate();
    out << "year,month,mkt,smb,hml";
    if (factors.index_logret) out << ",index_logret";
    if (factors.macro_index) out << ",macro_index";
    out << '\n';
    for (std::size_t t = 0; t < factors.n_months(); ++t) {
        const MonthKey m = factors.month(t);
        out << m.year() << ',' << m.month() << ',' << csv::exact(factors.mkt[t]) << ',' << csv::exact(factors.smb[t])
            << ',' << csv::exact(factors.hml[t]);
        if (factors.index_logret) out << ',' << csv::exact((*factors.index_logret)[t]);
        if (factors.macro_index) out << ',' << csv::exact((*factors.macro_index)[t]);
        out << '\n';
    }
}

} // namespace anomalyscan
