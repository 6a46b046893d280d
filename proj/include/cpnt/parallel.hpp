// parallel.hpp
// Ordered producer/consumer pipeline: work items are produced concurrently
// by a bounded pool and consumed strictly in index order on the calling
// thread, so results never depend on the worker count.

#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

namespace cpnt {

inline unsigned default_workers() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

// produce(i) -> T may run on any worker; consume(i, T&&) -> bool runs on the
// calling thread for i = first, first+1, ... and returns false to stop early.
template <typename Produce, typename Consume>
void ordered_pipeline(std::size_t first, std::size_t last, unsigned workers, Produce&& produce,
                      Consume&& consume) {
    using T = std::decay_t<std::invoke_result_t<Produce&, std::size_t>>;
    if (first >= last) return;
    if (workers <= 1) {
        for (std::size_t i = first; i < last; ++i)
            if (!consume(i, produce(i))) return;
        return;
    }

    const std::size_t depth = 2 * static_cast<std::size_t>(workers);
    std::vector<std::optional<T>> slots(depth);
    std::mutex mu;
    std::condition_variable cv;
    std::size_t next_task = first;
    std::size_t consumed = first;  // items below this are done
    bool stop = false;
    std::exception_ptr error;

    auto worker = [&] {
        for (;;) {
            std::size_t task;
            {
                std::unique_lock lock(mu);
                cv.wait(lock, [&] { return stop || next_task >= last || next_task < consumed + depth; });
                if (stop || next_task >= last) return;
                task = next_task++;
            }
            std::optional<T> result;
            try {
                result.emplace(produce(task));
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
                stop = true;
                cv.notify_all();
                return;
            }
            {
                std::lock_guard lock(mu);
                slots[task % depth] = std::move(result);
            }
            cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);

    try {
        for (std::size_t i = first; i < last; ++i) {
            std::optional<T> item;
            {
                std::unique_lock lock(mu);
                cv.wait(lock, [&] { return stop || slots[i % depth].has_value(); });
                if (!slots[i % depth].has_value()) break;  // stopped by a worker error
                item = std::move(slots[i % depth]);
                slots[i % depth].reset();
            }
            const bool go_on = consume(i, std::move(*item));
            {
                std::lock_guard lock(mu);
                consumed = i + 1;
                if (!go_on) stop = true;
            }
            cv.notify_all();
            if (!go_on) break;
        }
    } catch (...) {
        {
            std::lock_guard lock(mu);
            stop = true;
            if (!error) error = std::current_exception();
        }
        cv.notify_all();
    }
    {
        std::lock_guard lock(mu);
        stop = true;
    }
    cv.notify_all();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace cpnt
