#pragma once

#include "anomalyscan/month.hpp"
#include "anomalyscan/panel.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace anomalyscan {

// Contrarian: long losers, short winners. Momentum: the reverse.
enum class Side { Contrarian, Momentum };

std::string_view side_name(Side side) noexcept; // "CSCON" / "CSMOM"
Side parse_side(std::string_view name);

// J-K strategy. For formation month m the estimation window is m-J .. m-1,
// the skip months are m .. m+skip-1 and the holding months are
// m+skip .. m+skip+K-1 (with the default skip=1: m+1 .. m+K).
struct StrategySpec {
    int j = 1;
    int k = 1;
    int skip = 1;
    Side side = Side::Contrarian;
    int decile_count = 10;

    void validate() const; // throws ValidationError
    bool operator==(const StrategySpec&) const = default;
};

struct FormationResult {
    MonthKey formation_month;
    std::vector<std::string> winner; // canonical id order
    std::vector<std::string> loser;
    std::size_t eligible_count = 0;
};

struct StrategyObservation {
    MonthKey formation_month;
    double bh_return = 0.0;
    bool operator==(const StrategyObservation&) const = default;
};

struct StrategyReturnSeries {
    StrategySpec spec;
    std::vector<StrategyObservation> observations; // ascending formation month

    std::vector<double> values() const;
    std::vector<MonthKey> months() const;
};

// Stocks with a complete estimation window and every holding month present.
std::vector<std::string> eligible_stocks(const MonthlyPanel& panel, MonthKey formation_month,
                                         const StrategySpec& spec);

// Ranks eligible stocks by mean estimation-window return (ties by id) and
// takes floor(N / decile_count) names from each end. Throws
// InsufficientDataError with fewer than decile_count eligible stocks.
FormationResult form_portfolio(const MonthlyPanel& panel, MonthKey formation_month,
                               const StrategySpec& spec);

// Equal weight at start_month, no rebalancing:
// mean over members of prod_k (1 + r_{i,k}) - 1.
double buy_and_hold_return(const MonthlyPanel& panel, std::span<const std::string> members,
                           MonthKey start_month, int k);

StrategyReturnSeries strategy_series(const MonthlyPanel& panel, const StrategySpec& spec);

// Shares estimation-window sums (per J) and holding-period gross returns
// (per K) across many specs on one panel. The panel must outlive the engine.
// After prepare() the engine is read-only and series() may be called from
// several threads.
class StrategyEngine {
public:
    explicit StrategyEngine(const MonthlyPanel& panel);

    // Precomputes the matrices for every listed J and K, using up to
    // `threads` workers.
    void prepare(std::span<const int> js, std::span<const int> ks, unsigned threads = 1);

    StrategyReturnSeries series(const StrategySpec& spec) const;

    const MonthlyPanel& panel() const noexcept { return panel_; }

private:
    // Row f holds sum_{t=f-J}^{f-1} r_t (rows f < J unused).
    std::vector<double> window_sums(int j) const;
    // Row h holds prod_{t=h}^{h+K-1} (1 + r_t) (rows past T-K unused).
    std::vector<double> holding_gross(int k) const;

    const MonthlyPanel& panel_;
    std::map<int, std::vector<double>> sums_;
    std::map<int, std::vector<double>> gross_;
};

} // namespace anomalyscan
