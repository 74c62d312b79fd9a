#pragma once

#include "anomalyscan/synth.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace anomalyscan::cli {

inline constexpr std::string_view kVersion = "0.1.0";

struct SynthConfig {
    int n_stocks = 100;
    int n_months = 240;
    std::string first_month = "2000-01";
    std::vector<RhoSegment> regimes;
    int reversal_lag = 2;
    double noise_sd = 0.08;
    bool index_columns = true;
    bool daily = true;
    int daily_stocks = 30;
    int days_per_month = 20;
    double zero_volume_prob = 0.02;
};

// Everything that determines a run's output. The output directory is kept
// apart so that the same run written to two places hashes the same.
struct RunConfig {
    std::string monthly;
    std::string daily;
    std::string factors;

    std::vector<int> j;
    std::vector<int> k;
    int skip = 1;
    std::string side = "CSCON";

    int window = 60;
    int step = 12;
    std::optional<int> lag;
    double critical = 1.96;

    int lookback = 36;
    int min_days = 10;

    std::uint64_t seed = 1;
    bool raw = false;
    SynthConfig synth;

    RunConfig();

    void validate() const; // throws ValidationError
    nlohmann::ordered_json to_json() const;
    static RunConfig from_json(const nlohmann::json& j); // unknown keys rejected
    static RunConfig load(const std::string& path);
};

MonthKey parse_month_key(std::string_view s); // "YYYY-MM"

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
// 16 lowercase hex digits of the hash of the canonical config JSON.
std::string config_hash(const RunConfig& config);
// "# anomalyscan <version> config=<hash>"
std::string header_line(const RunConfig& config);

} // namespace anomalyscan::cli
