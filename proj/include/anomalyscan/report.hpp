#pragma once

#include <string>

namespace anomalyscan {

// %.6g, or %.17g when raw; NaN prints as NA.
std::string format_number(double v, bool raw = false);

} // namespace anomalyscan
