#include "ecx/parallel.hpp"

namespace ecx {

namespace {
int g_threads = 0;
}

void set_thread_count(int n) { g_threads = n; }

int thread_count() {
    if (g_threads > 0) return g_threads;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

} // namespace ecx
