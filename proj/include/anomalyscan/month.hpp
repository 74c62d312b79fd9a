#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace anomalyscan {

// Calendar month as (year, month). Arithmetic is done on a linear month
// index, so adding n months never drifts.
class MonthKey {
public:
    constexpr MonthKey() = default;
    MonthKey(int year, int month);

    static constexpr MonthKey from_index(std::int64_t index) noexcept {
        MonthKey m;
        m.index_ = index;
        return m;
    }

    constexpr int year() const noexcept {
        return static_cast<int>(floor_div(index_, 12));
    }
    constexpr int month() const noexcept {
        return static_cast<int>(index_ - floor_div(index_, 12) * 12) + 1;
    }
    // Months since 0000-01.
    constexpr std::int64_t index() const noexcept { return index_; }

    constexpr MonthKey operator+(std::int64_t n) const noexcept { return from_index(index_ + n); }
    constexpr MonthKey operator-(std::int64_t n) const noexcept { return from_index(index_ - n); }
    constexpr std::int64_t operator-(MonthKey other) const noexcept { return index_ - other.index_; }
    MonthKey& operator+=(std::int64_t n) noexcept {
        index_ += n;
        return *this;
    }

    constexpr auto operator<=>(const MonthKey&) const = default;

    // "YYYY-MM"
    std::string to_string() const;

private:
    static constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
        return a / b - ((a % b != 0) && ((a < 0) != (b < 0)));
    }

    std::int64_t index_ = 0;
};

} // namespace anomalyscan
