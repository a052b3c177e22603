#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace geomq {

inline int thread_budget() {
    unsigned hw = std::thread::hardware_concurrency();
    int budget = hw == 0 ? 1 : static_cast<int>(hw);
    if (const char* env = std::getenv("GEOMQ_THREADS")) {
        try {
            int v = std::stoi(env);
            if (v >= 1) budget = v;
        } catch (...) {
            budget = 1;
        }
    }
    return budget;
}

// Runs fn(0..count-1), possibly concurrently. Each index owns its output
// slot, so results are deterministic regardless of scheduling. Exceptions
// are captured and the first one (by index) is rethrown.
inline void parallel_for(int count, const std::function<void(int)>& fn) {
    int budget = std::min(thread_budget(), count);
    if (budget <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<size_t>(count));
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < budget; ++t) {
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    errors[static_cast<size_t>(i)] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace geomq
