#include "anomalyscan/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace anomalyscan {

unsigned default_thread_count() {
    if (const char* env = std::getenv("ANOMALYSCAN_THREADS")) {
        unsigned v = 0;
        auto [p, ec] = std::from_chars(env, env + std::strlen(env), v);
        if (ec == std::errc{} && *p == '\0' && v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

} // namespace anomalyscan
