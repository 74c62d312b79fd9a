#include "anomalyscan/portfolio.hpp"

#include "anomalyscan/errors.hpp"
#include "anomalyscan/kernels.hpp"
#include "anomalyscan/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace anomalyscan {

std::string_view side_name(Side side) noexcept {
    return side == Side::Contrarian ? "CSCON" : "CSMOM";
}

Side parse_side(std::string_view name) {
    if (name == "CSCON") return Side::Contrarian;
    if (name == "CSMOM") return Side::Momentum;
    throw ValidationError("unknown strategy side '" + std::string(name) + "' (expected CSCON or CSMOM)");
}

void StrategySpec::validate() const {
    if (j < 1) throw ValidationError("estimation period J must be >= 1, got " + std::to_string(j));
    if (k < 1) throw ValidationError("holding period K must be >= 1, got " + std::to_string(k));
    if (skip < 0) throw ValidationError("skip must be >= 0, got " + std::to_string(skip));
    if (decile_count < 2) throw ValidationError("decile_count must be >= 2, got " + std::to_string(decile_count));
}

std::vector<double> StrategyReturnSeries::values() const {
    std::vector<double> v;
    v.reserve(observations.size());
    for (const auto& o : observations) v.push_back(o.bh_return);
    return v;
}

std::vector<MonthKey> StrategyReturnSeries::months() const {
    std::vector<MonthKey> v;
    v.reserve(observations.size());
    for (const auto& o : observations) v.push_back(o.formation_month);
    return v;
}

namespace {

struct Ranked {
    double mean;
    std::size_t stock;
};

bool rank_less(const Ranked& a, const Ranked& b) noexcept {
    if (a.mean != b.mean) return a.mean < b.mean;
    return a.stock < b.stock;
}

struct Selection {
    std::vector<std::size_t> loser;
    std::vector<std::size_t> winner;
    std::size_t eligible = 0;
};

// Bottom and top floor(N/deciles) of `ranked`; empty when N < deciles.
Selection select_extremes(std::vector<Ranked>& ranked, int deciles) {
    Selection sel;
    sel.eligible = ranked.size();
    if (ranked.size() < static_cast<std::size_t>(deciles)) return sel;
    const std::size_t n = ranked.size() / static_cast<std::size_t>(deciles);
    const std::size_t total = ranked.size();
    std::nth_element(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n - 1), ranked.end(), rank_less);
    // After the first partition the top n lie in (n, total]; select among those.
    std::nth_element(ranked.begin() + static_cast<std::ptrdiff_t>(n), ranked.begin() + static_cast<std::ptrdiff_t>(total - n),
                     ranked.end(), rank_less);
    for (std::size_t i = 0; i < n; ++i) sel.loser.push_back(ranked[i].stock);
    for (std::size_t i = total - n; i < total; ++i) sel.winner.push_back(ranked[i].stock);
    std::sort(sel.loser.begin(), sel.loser.end());
    std::sort(sel.winner.begin(), sel.winner.end());
    return sel;
}

double mean_excess(std::span<const double> gross_row, const std::vector<std::size_t>& members) {
    double s = 0.0;
    for (std::size_t i : members) s += gross_row[i] - 1.0;
    return s / static_cast<double>(members.size());
}

std::vector<std::string> ids_of(const MonthlyPanel& panel, const std::vector<std::size_t>& idx) {
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(panel.stocks()[i]);
    return out;
}

// Formation month index f and holding start h = f + skip, or nothing when
// the windows do not fit on the axis.
bool window_fits(const MonthlyPanel& panel, std::int64_t f, const StrategySpec& spec) {
    const auto t = static_cast<std::int64_t>(panel.n_months());
    return f - spec.j >= 0 && f + spec.skip + spec.k <= t;
}

std::vector<Ranked> rank_row(std::span<const double> sums, std::span<const double> gross, int j) {
    std::vector<Ranked> ranked;
    ranked.reserve(sums.size());
    for (std::size_t i = 0; i < sums.size(); ++i) {
        if (std::isfinite(sums[i]) && std::isfinite(gross[i])) ranked.push_back({sums[i] / j, i});
    }
    return ranked;
}

std::vector<double> row_window_sum(const MonthlyPanel& panel, std::int64_t first, int len) {
    std::vector<double> acc(panel.n_stocks(), 0.0);
    for (int t = 0; t < len; ++t) kernels::accumulate(acc, panel.row(static_cast<std::size_t>(first + t)));
    return acc;
}

std::vector<double> row_gross(const MonthlyPanel& panel, std::int64_t first, int len) {
    std::vector<double> acc(panel.n_stocks(), 1.0);
    for (int t = 0; t < len; ++t) kernels::compound(acc, panel.row(static_cast<std::size_t>(first + t)));
    return acc;
}

Selection formation_selection(const MonthlyPanel& panel, std::int64_t f, const StrategySpec& spec) {
    auto sums = row_window_sum(panel, f - spec.j, spec.j);
    auto gross = row_gross(panel, f + spec.skip, spec.k);
    auto ranked = rank_row(sums, gross, spec.j);
    return select_extremes(ranked, spec.decile_count);
}

} // namespace

std::vector<std::string> eligible_stocks(const MonthlyPanel& panel, MonthKey formation_month,
                                         const StrategySpec& spec) {
    spec.validate();
    const auto f = formation_month - panel.first_month();
    if (f - spec.j < 0 || f > static_cast<std::int64_t>(panel.n_months())) {
        throw ValidationError("estimation window of " + formation_month.to_string() + " lies outside the panel");
    }
    if (!window_fits(panel, f, spec)) return {};
    auto sums = row_window_sum(panel, f - spec.j, spec.j);
    auto gross = row_gross(panel, f + spec.skip, spec.k);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < panel.n_stocks(); ++i) {
        if (std::isfinite(sums[i]) && std::isfinite(gross[i])) out.push_back(panel.stocks()[i]);
    }
    return out;
}

FormationResult form_portfolio(const MonthlyPanel& panel, MonthKey formation_month, const StrategySpec& spec) {
    spec.validate();
    const auto f = formation_month - panel.first_month();
    FormationResult result;
    result.formation_month = formation_month;
    if (!window_fits(panel, f, spec)) {
        throw InsufficientDataError("formation month " + formation_month.to_string() +
                                    ": estimation or holding window outside the panel");
    }
    auto sel = formation_selection(panel, f, spec);
    result.eligible_count = sel.eligible;
    if (sel.loser.empty()) {
        throw InsufficientDataError("formation month " + formation_month.to_string() + ": " +
                                    std::to_string(sel.eligible) + " eligible stocks, need at least " +
                                    std::to_string(spec.decile_count));
    }
    result.loser = ids_of(panel, sel.loser);
    result.winner = ids_of(panel, sel.winner);
    return result;
}

double buy_and_hold_return(const MonthlyPanel& panel, std::span<const std::string> members, MonthKey start_month,
                           int k) {
    if (members.empty()) throw std::invalid_argument("buy_and_hold_return: empty portfolio");
    if (k < 1) throw std::invalid_argument("buy_and_hold_return: K must be >= 1");
    const auto h = start_month - panel.first_month();
    if (h < 0 || h + k > static_cast<std::int64_t>(panel.n_months())) {
        throw std::logic_error("buy_and_hold_return: holding window outside the panel");
    }
    double total = 0.0;
    for (const auto& id : members) {
        const auto s = panel.stock_index(id);
        if (!s) throw std::logic_error("buy_and_hold_return: unknown stock " + id);
        double gross = 1.0;
        for (int t = 0; t < k; ++t) {
            const double r = panel.at(static_cast<std::size_t>(h + t), *s);
            if (MonthlyPanel::missing(r)) {
                throw std::logic_error("buy_and_hold_return: " + id + " has no return in " +
                                       (start_month + t).to_string() + " (eligibility violated)");
            }
            gross *= 1.0 + r;
        }
        total += gross - 1.0;
    }
    return total / static_cast<double>(members.size());
}

StrategyReturnSeries strategy_series(const MonthlyPanel& panel, const StrategySpec& spec) {
    spec.validate();
    StrategyEngine engine(panel);
    const int j[] = {spec.j};
    const int k[] = {spec.k};
    engine.prepare(j, k);
    return engine.series(spec);
}

// ---------------------------------------------------------------------------
// StrategyEngine
// ---------------------------------------------------------------------------

StrategyEngine::StrategyEngine(const MonthlyPanel& panel) : panel_(panel) {}

std::vector<double> StrategyEngine::window_sums(int j) const {
    const std::size_t t = panel_.n_months();
    const std::size_t n = panel_.n_stocks();
    std::vector<double> out(t * n, kMissing);
    for (std::size_t f = static_cast<std::size_t>(j); f < t; ++f) {
        auto row = row_window_sum(panel_, static_cast<std::int64_t>(f) - j, j);
        std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(f * n));
    }
    return out;
}

std::vector<double> StrategyEngine::holding_gross(int k) const {
    const std::size_t t = panel_.n_months();
    const std::size_t n = panel_.n_stocks();
    std::vector<double> out(t * n, kMissing);
    for (std::size_t h = 0; h + static_cast<std::size_t>(k) <= t; ++h) {
        auto row = row_gross(panel_, static_cast<std::int64_t>(h), k);
        std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(h * n));
    }
    return out;
}

void StrategyEngine::prepare(std::span<const int> js, std::span<const int> ks, unsigned threads) {
    std::vector<std::pair<bool, int>> jobs; // (is_sum, length)
    for (int j : js) {
        if (j >= 1 && !sums_.count(j)) jobs.emplace_back(true, j);
    }
    for (int k : ks) {
        if (k >= 1 && !gross_.count(k)) jobs.emplace_back(false, k);
    }
    std::sort(jobs.begin(), jobs.end());
    jobs.erase(std::unique(jobs.begin(), jobs.end()), jobs.end());
    std::vector<std::vector<double>> results(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t i) {
        results[i] = jobs[i].first ? window_sums(jobs[i].second) : holding_gross(jobs[i].second);
    });
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        (jobs[i].first ? sums_ : gross_)[jobs[i].second] = std::move(results[i]);
    }
}

StrategyReturnSeries StrategyEngine::series(const StrategySpec& spec) const {
    spec.validate();
    StrategyReturnSeries out;
    out.spec = spec;

    const auto t = static_cast<std::int64_t>(panel_.n_months());
    if (spec.j + spec.skip + spec.k > t) return out;

    std::vector<double> local_sums;
    std::vector<double> local_gross;
    const std::vector<double>* sums = nullptr;
    const std::vector<double>* gross = nullptr;
    if (auto it = sums_.find(spec.j); it != sums_.end()) {
        sums = &it->second;
    } else {
        local_sums = window_sums(spec.j);
        sums = &local_sums;
    }
    if (auto it = gross_.find(spec.k); it != gross_.end()) {
        gross = &it->second;
    } else {
        local_gross = holding_gross(spec.k);
        gross = &local_gross;
    }

    const std::size_t n = panel_.n_stocks();
    for (std::int64_t f = spec.j; f + spec.skip + spec.k <= t; ++f) {
        const std::span<const double> sum_row(sums->data() + static_cast<std::size_t>(f) * n, n);
        const std::span<const double> gross_row(gross->data() + static_cast<std::size_t>(f + spec.skip) * n, n);
        auto ranked = rank_row(sum_row, gross_row, spec.j);
        auto sel = select_extremes(ranked, spec.decile_count);
        if (sel.loser.empty()) continue;
        const double contrarian = mean_excess(gross_row, sel.loser) - mean_excess(gross_row, sel.winner);
        const double value = spec.side == Side::Contrarian ? contrarian : -contrarian;
        out.observations.push_back({panel_.month(static_cast<std::size_t>(f)), value});
    }
    return out;
}

} // namespace anomalyscan
