#include "msbem/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace msbem {

namespace {
std::atomic<bool> g_deterministic{false};
std::atomic<int> g_threads{0};

int env_threads() {
    if (const char *s = std::getenv("MSBEM_THREADS")) {
        try {
            int n = std::stoi(s);
            if (n > 0) return n;
        } catch (const std::exception &) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}
}  // namespace

void set_deterministic(bool on) { g_deterministic = on; }
bool deterministic() { return g_deterministic; }
void set_num_threads(int n) { g_threads = std::max(0, n); }

int num_threads() {
    if (g_deterministic) return 1;
    const int n = g_threads;
    return n > 0 ? n : env_threads();
}

void parallel_for(int n, const std::function<void(int, int)> &fn) {
    if (n <= 0) return;
    const int nt = std::min(num_threads(), n);
    if (nt <= 1) {
        fn(0, n);
        return;
    }
    // Interleaved small ranges keep the load balanced for uneven rows.
    const int grain = std::max(1, n / (8 * nt));
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t)
        pool.emplace_back([&] {
            try {
                for (;;) {
                    const int b = next.fetch_add(grain);
                    if (b >= n) break;
                    fn(b, std::min(n, b + grain));
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    for (auto &th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace msbem
