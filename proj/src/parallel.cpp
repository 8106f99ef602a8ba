#include "bcoint/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace bcoint {

unsigned thread_count() {
    if (const char* env = std::getenv("BCOINT_THREADS")) {
        unsigned value = 0;
        const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), value);
        if (ec == std::errc() && *ptr == '\0' && value > 0) return value;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

}  // namespace bcoint
