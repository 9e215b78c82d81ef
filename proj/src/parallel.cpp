#include "tubematch/parallel.hpp"

#include <atomic>
#include <charconv>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tubematch {

namespace {
std::atomic<int> g_thread_cap{0};
}

void set_thread_cap(int cap) {
    g_thread_cap.store(cap < 0 ? 0 : cap);
}

int thread_cap() {
    return g_thread_cap.load();
}

int resolved_threads() {
    const int cap = g_thread_cap.load();
    if (cap > 0) return cap;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

std::optional<int> parse_thread_cap(const std::string& text) {
    int value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || value < 0) {
        return std::nullopt;
    }
    return value;
}

}  // namespace tubematch
