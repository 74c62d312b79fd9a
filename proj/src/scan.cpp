#include "anomalyscan/scan.hpp"

#include "anomalyscan/errors.hpp"
#include "anomalyscan/parallel.hpp"
#include "anomalyscan/portfolio.hpp"
#include "anomalyscan/report.hpp"
#include "csv_util.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace anomalyscan {

std::vector<int> default_scan_horizons() { return {1, 6, 12, 18, 24, 30, 36, 42, 48, 54, 60}; }

std::vector<std::pair<int, int>> ScanConfig::effective_grid() const {
    if (grid) return *grid;
    std::vector<std::pair<int, int>> g;
    for (int j : default_scan_horizons()) {
        for (int k : default_scan_horizons()) g.emplace_back(j, k);
    }
    return g;
}

void ScanConfig::validate() const {
    if (window < 24) throw ValidationError("scan window must be >= 24 months, got " + std::to_string(window));
    if (step < 1) throw ValidationError("scan step must be >= 1, got " + std::to_string(step));
    if (!(critical > 0.0)) throw ValidationError("scan critical value must be positive");
    if (skip < 0) throw ValidationError("skip must be >= 0");
    for (auto [j, k] : effective_grid()) {
        if (j < 1 || k < 1) {
            throw ValidationError("scan grid entry (" + std::to_string(j) + "," + std::to_string(k) + ") must be >= 1");
        }
    }
}

std::string_view cell_class_name(CellClass c) noexcept {
    switch (c) {
    case CellClass::SP: return "SP";
    case CellClass::SN: return "SN";
    case CellClass::NSP: return "NSP";
    case CellClass::NSN: return "NSN";
    case CellClass::NA: return "NA";
    }
    return "NA";
}

CellClass parse_cell_class(std::string_view s) {
    for (CellClass c : {CellClass::SP, CellClass::SN, CellClass::NSP, CellClass::NSN, CellClass::NA}) {
        if (cell_class_name(c) == s) return c;
    }
    throw ValidationError("unknown grid class '" + std::string(s) + "'");
}

std::vector<ScanWindow> scan_windows(const MonthlyPanel& panel, int window, int step) {
    std::vector<ScanWindow> out;
    if (panel.n_months() == 0) return out;
    for (MonthKey start = panel.first_month(); start + (window - 1) <= panel.last_month(); start += step) {
        ScanWindow w{start, start + (window - 1), {}};
        if (step % 12 == 0) {
            w.label = std::to_string(w.end.year());
        } else {
            w.label = w.end.to_string();
        }
        out.push_back(std::move(w));
    }
    return out;
}

ScanCell classify(std::span<const double> values, double critical, std::optional<int> lag) {
    ScanCell cell;
    cell.n = values.size();
    if (values.size() < 2) return cell;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi) return cell;
    const MeanTestResult r = nw_mean_test(values, lag);
    cell.mean = r.mean;
    cell.t = r.hac_t;
    const bool sig = std::abs(r.hac_t) >= critical;
    if (r.mean > 0.0) {
        cell.cls = sig ? CellClass::SP : CellClass::NSP;
    } else {
        cell.cls = sig ? CellClass::SN : CellClass::NSN;
    }
    return cell;
}

ScanGrid run_scan(const MonthlyPanel& panel, const ScanConfig& config) {
    config.validate();
    ScanGrid grid;
    grid.rows = config.effective_grid();
    grid.windows = scan_windows(panel, config.window, config.step);
    grid.cells.assign(grid.rows.size() * grid.windows.size(), ScanCell{});
    if (grid.rows.empty() || grid.windows.empty()) return grid;

    std::set<int> js;
    std::set<int> ks;
    for (auto [j, k] : grid.rows) {
        js.insert(j);
        ks.insert(k);
    }
    const std::vector<int> jv(js.begin(), js.end());
    const std::vector<int> kv(ks.begin(), ks.end());
    StrategyEngine engine(panel);
    engine.prepare(jv, kv, config.threads);

    const std::size_t n_windows = grid.windows.size();
    parallel_for(grid.rows.size(), config.threads, [&](std::size_t row) {
        StrategySpec spec;
        spec.j = grid.rows[row].first;
        spec.k = grid.rows[row].second;
        spec.skip = config.skip;
        const StrategyReturnSeries series = engine.series(spec);
        std::vector<double> subset;
        for (std::size_t w = 0; w < n_windows; ++w) {
            const ScanWindow& win = grid.windows[w];
            subset.clear();
            for (const auto& obs : series.observations) {
                if (obs.formation_month >= win.start && obs.formation_month <= win.end) subset.push_back(obs.bh_return);
            }
            grid.cells[row * n_windows + w] = classify(subset, config.critical, config.lag);
        }
    });
    return grid;
}

void emit_grid(std::ostream& out, const ScanGrid& grid) {
    out << "j,k";
    for (const auto& w : grid.windows) out << ',' << w.label;
    out << '\n';
    for (std::size_t r = 0; r < grid.rows.size(); ++r) {
        out << grid.rows[r].first << ',' << grid.rows[r].second;
        for (std::size_t w = 0; w < grid.windows.size(); ++w) out << ',' << cell_class_name(grid.at(r, w).cls);
        out << '\n';
    }
}

void emit_values(std::ostream& out, const ScanGrid& grid, bool raw) {
    out << "j,k,window_start,window_end,label,n,mean,t,class\n";
    for (std::size_t r = 0; r < grid.rows.size(); ++r) {
        for (std::size_t w = 0; w < grid.windows.size(); ++w) {
            const auto& win = grid.windows[w];
            const auto& c = grid.at(r, w);
            out << grid.rows[r].first << ',' << grid.rows[r].second << ',' << win.start.to_string() << ','
                << win.end.to_string() << ',' << win.label << ',' << c.n << ',' << format_number(c.mean, raw) << ','
                << format_number(c.t, raw) << ',' << cell_class_name(c.cls) << '\n';
        }
    }
}

GridTable grid_table(const ScanGrid& grid) {
    GridTable t;
    for (const auto& w : grid.windows) t.labels.push_back(w.label);
    t.rows = grid.rows;
    for (const auto& c : grid.cells) t.cells.push_back(c.cls);
    return t;
}

GridTable read_grid(std::istream& in, const std::string& source) {
    csv::LineReader reader(in, source);
    const auto header = reader.header();
    if (header.size() < 2 || header[0] != "j" || header[1] != "k") reader.fail("grid header must start with 'j,k'");
    GridTable t;
    t.labels.assign(header.begin() + 2, header.end());
    std::vector<std::string_view> f;
    while (reader.next(f)) {
        if (f.size() != header.size()) reader.fail("expected " + std::to_string(header.size()) + " fields");
        t.rows.emplace_back(reader.to_int(f[0], "j"), reader.to_int(f[1], "k"));
        for (std::size_t i = 2; i < f.size(); ++i) {
            try {
                t.cells.push_back(parse_cell_class(f[i]));
            } catch (const ValidationError& e) {
                reader.fail(e.what());
            }
        }
    }
    return t;
}

} // namespace anomalyscan
