#pragma once

#include "anomalyscan/econometrics.hpp"
#include "anomalyscan/month.hpp"
#include "anomalyscan/panel.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace anomalyscan {

std::vector<int> default_scan_horizons(); // {1, 6, 12, ..., 60}

struct ScanConfig {
    int window = 60; // M, months
    int step = 12;   // a, months
    std::optional<std::vector<std::pair<int, int>>> grid; // (J, K) rows; unset means the default 11x11 cross
    double critical = kCritical5;
    int skip = 1;
    std::optional<int> lag; // HAC lag; automatic per window when unset
    unsigned threads = 1;

    // Grid with the default applied.
    std::vector<std::pair<int, int>> effective_grid() const;
    void validate() const; // throws ValidationError
};

enum class CellClass { SP, SN, NSP, NSN, NA };

std::string_view cell_class_name(CellClass c) noexcept;
CellClass parse_cell_class(std::string_view s);

struct ScanCell {
    CellClass cls = CellClass::NA;
    double mean = kMissing;
    double t = kMissing;
    std::size_t n = 0;
};

struct ScanWindow {
    MonthKey start;
    MonthKey end; // inclusive
    std::string label;
};

struct ScanGrid {
    std::vector<std::pair<int, int>> rows;
    std::vector<ScanWindow> windows;
    std::vector<ScanCell> cells; // rows x windows, row-major

    const ScanCell& at(std::size_t row, std::size_t window) const { return cells[row * windows.size() + window]; }
};

// Windows [start, start+M-1] starting at the panel's first month, advancing
// by `step`, while the end stays inside the panel. Labels are the end year
// when step is a multiple of 12, else the end month (YYYY-MM).
std::vector<ScanWindow> scan_windows(const MonthlyPanel& panel, int window, int step);

// Classifies a window's observations: NA with fewer than 2 or a constant series.
ScanCell classify(std::span<const double> values, double critical, std::optional<int> lag);

// One contrarian series per (J,K) over the full panel; each window tests the
// observations whose formation month lies in it.
ScanGrid run_scan(const MonthlyPanel& panel, const ScanConfig& config);

// j,k,<label>... with one class per window.
void emit_grid(std::ostream& out, const ScanGrid& grid);
// Long format: j,k,window_start,window_end,label,n,mean,t,class.
void emit_values(std::ostream& out, const ScanGrid& grid, bool raw = false);

// Class table parsed back from emit_grid output ('#' lines skipped).
struct GridTable {
    std::vector<std::string> labels;
    std::vector<std::pair<int, int>> rows;
    std::vector<CellClass> cells;
    bool operator==(const GridTable&) const = default;
};

GridTable grid_table(const ScanGrid& grid);
GridTable read_grid(std::istream& in, const std::string& source = "<stream>");

} // namespace anomalyscan
