#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace chaotherm {

// Worker count: explicit value if positive, else CHAOTHERM_THREADS, else hardware.
int resolve_workers(int requested);

// Evaluates f(0..count-1) on a bounded pool. Results come back in index
// order, so any reduction over them is independent of the worker count.
template <class F>
auto parallel_map(std::size_t count, int workers, F&& f) {
    using T = std::invoke_result_t<F&, std::size_t>;
    std::vector<std::optional<T>> slots(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                slots[i].emplace(f(i));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };

    int n = resolve_workers(workers);
    if (n <= 1 || count <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        int spawn = static_cast<int>(std::min<std::size_t>(count, static_cast<std::size_t>(n)));
        pool.reserve(spawn);
        for (int w = 0; w < spawn; ++w) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::vector<T> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace chaotherm
