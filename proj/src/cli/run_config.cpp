#include "run_config.hpp"

#include "anomalyscan/errors.hpp"
#include "anomalyscan/portfolio.hpp"
#include "anomalyscan/scan.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

namespace anomalyscan::cli {

using nlohmann::json;

namespace {

template <class T>
T get_as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config: '" + key + "' has the wrong type");
    }
}

std::vector<RhoSegment> parse_segments(const json& v) {
    if (!v.is_array()) throw ValidationError("config: 'synth.regimes' must be an array");
    std::vector<RhoSegment> out;
    for (const auto& s : v) {
        if (!s.is_object()) throw ValidationError("config: 'synth.regimes' entries must be objects");
        RhoSegment seg;
        for (const auto& [key, val] : s.items()) {
            if (key == "begin") seg.begin = get_as<int>(val, "synth.regimes.begin");
            else if (key == "end") seg.end = get_as<int>(val, "synth.regimes.end");
            else if (key == "rho") seg.rho = get_as<double>(val, "synth.regimes.rho");
            else throw ValidationError("config: unknown key 'synth.regimes." + key + "'");
        }
        out.push_back(seg);
    }
    return out;
}

SynthConfig parse_synth(const json& v) {
    if (!v.is_object()) throw ValidationError("config: 'synth' must be an object");
    SynthConfig s;
    for (const auto& [key, val] : v.items()) {
        const std::string name = "synth." + key;
        if (key == "n_stocks") s.n_stocks = get_as<int>(val, name);
        else if (key == "n_months") s.n_months = get_as<int>(val, name);
        else if (key == "first_month") s.first_month = get_as<std::string>(val, name);
        else if (key == "regimes") s.regimes = parse_segments(val);
        else if (key == "reversal_lag") s.reversal_lag = get_as<int>(val, name);
        else if (key == "noise_sd") s.noise_sd = get_as<double>(val, name);
        else if (key == "index_columns") s.index_columns = get_as<bool>(val, name);
        else if (key == "daily") s.daily = get_as<bool>(val, name);
        else if (key == "daily_stocks") s.daily_stocks = get_as<int>(val, name);
        else if (key == "days_per_month") s.days_per_month = get_as<int>(val, name);
        else if (key == "zero_volume_prob") s.zero_volume_prob = get_as<double>(val, name);
        else throw ValidationError("config: unknown key '" + name + "'");
    }
    return s;
}

} // namespace

RunConfig::RunConfig() : j(default_scan_horizons()), k(default_scan_horizons()) {}

void RunConfig::validate() const {
    for (int v : j) {
        if (v < 1) throw ValidationError("config: J values must be >= 1");
    }
    for (int v : k) {
        if (v < 1) throw ValidationError("config: K values must be >= 1");
    }
    if (skip < 0) throw ValidationError("config: skip must be >= 0");
    parse_side(side);
    if (window < 24) throw ValidationError("config: window must be >= 24 months");
    if (step < 1) throw ValidationError("config: step must be >= 1");
    if (lag && *lag < 0) throw ValidationError("config: lag must be >= 0");
    if (!(critical > 0.0)) throw ValidationError("config: critical must be positive");
    if (lookback < 1) throw ValidationError("config: lookback must be >= 1");
    if (min_days < 1) throw ValidationError("config: min_days must be >= 1");
    parse_month_key(synth.first_month);
    if (synth.daily_stocks < 1) throw ValidationError("config: synth.daily_stocks must be >= 1");
    if (synth.days_per_month < 1 || synth.days_per_month > 28) {
        throw ValidationError("config: synth.days_per_month must be in 1..28");
    }
    if (!(synth.zero_volume_prob >= 0.0 && synth.zero_volume_prob < 1.0)) {
        throw ValidationError("config: synth.zero_volume_prob must be in [0, 1)");
    }
}

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json segs = nlohmann::ordered_json::array();
    for (const auto& s : synth.regimes) segs.push_back({{"begin", s.begin}, {"end", s.end}, {"rho", s.rho}});
    nlohmann::ordered_json out;
    out["monthly"] = monthly;
    out["daily"] = daily;
    out["factors"] = factors;
    out["j"] = j;
    out["k"] = k;
    out["skip"] = skip;
    out["side"] = side;
    out["window"] = window;
    out["step"] = step;
    out["lag"] = lag ? nlohmann::ordered_json(*lag) : nlohmann::ordered_json(nullptr);
    out["critical"] = critical;
    out["lookback"] = lookback;
    out["min_days"] = min_days;
    out["seed"] = seed;
    out["raw"] = raw;
    out["synth"] = {
        {"n_stocks", synth.n_stocks},
        {"n_months", synth.n_months},
        {"first_month", synth.first_month},
        {"regimes", segs},
        {"reversal_lag", synth.reversal_lag},
        {"noise_sd", synth.noise_sd},
        {"index_columns", synth.index_columns},
        {"daily", synth.daily},
        {"daily_stocks", synth.daily_stocks},
        {"days_per_month", synth.days_per_month},
        {"zero_volume_prob", synth.zero_volume_prob},
    };
    return out;
}

RunConfig RunConfig::from_json(const json& v) {
    if (!v.is_object()) throw ValidationError("config: top level must be an object");
    RunConfig c;
    for (const auto& [key, val] : v.items()) {
        if (key == "monthly") c.monthly = get_as<std::string>(val, key);
        else if (key == "daily") c.daily = get_as<std::string>(val, key);
        else if (key == "factors") c.factors = get_as<std::string>(val, key);
        else if (key == "j") c.j = get_as<std::vector<int>>(val, key);
        else if (key == "k") c.k = get_as<std::vector<int>>(val, key);
        else if (key == "skip") c.skip = get_as<int>(val, key);
        else if (key == "side") c.side = get_as<std::string>(val, key);
        else if (key == "window") c.window = get_as<int>(val, key);
        else if (key == "step") c.step = get_as<int>(val, key);
        else if (key == "lag") c.lag = val.is_null() ? std::nullopt : std::optional<int>(get_as<int>(val, key));
        else if (key == "critical") c.critical = get_as<double>(val, key);
        else if (key == "lookback") c.lookback = get_as<int>(val, key);
        else if (key == "min_days") c.min_days = get_as<int>(val, key);
        else if (key == "seed") c.seed = get_as<std::uint64_t>(val, key);
        else if (key == "raw") c.raw = get_as<bool>(val, key);
        else if (key == "synth") c.synth = parse_synth(val);
        else throw ValidationError("config: unknown key '" + key + "'");
    }
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    json v;
    try {
        v = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return from_json(v);
}

MonthKey parse_month_key(std::string_view s) {
    int y = 0;
    int m = 0;
    const bool shape = s.size() == 7 && s[4] == '-';
    if (shape) {
        auto a = std::from_chars(s.data(), s.data() + 4, y);
        auto b = std::from_chars(s.data() + 5, s.data() + 7, m);
        if (a.ec == std::errc{} && a.ptr == s.data() + 4 && b.ec == std::errc{} && b.ptr == s.data() + 7 && m >= 1 &&
            m <= 12) {
            return MonthKey(y, m);
        }
    }
    throw ValidationError("malformed month '" + std::string(s) + "' (want YYYY-MM)");
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string config_hash(const RunConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.to_json().dump())));
    return buf;
}

std::string header_line(const RunConfig& config) {
    return "# anomalyscan " + std::string(kVersion) + " config=" + config_hash(config);
}

} // namespace anomalyscan::cli
