#include "anomalyscan/report.hpp"

#include <cmath>
#include <cstdio>

namespace anomalyscan {

std::string format_number(double v, bool raw) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, raw ? "%.17g" : "%.6g", v);
    return buf;
}

} // namespace anomalyscan
