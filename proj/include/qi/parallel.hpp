#pragma once

#include <cstdlib>
#include <mutex>
#include <thread>

#include "qi/common.hpp"

namespace qi {

// Worker count: hardware concurrency, optionally capped by QI_THREADS.
inline int thread_count() {
    int hw = int(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("QI_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1) hw = std::min(hw, cap);
    }
    return hw;
}

// Static block partition; fn(k) must write only to slot k of pre-sized output.
inline void parallel_for(int count, const std::function<void(int)>& fn) {
    const int workers = std::min(thread_count(), std::max(count, 1));
    if (workers <= 1 || count <= 1) {
        for (int k = 0; k < count; ++k) fn(k);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (int k = w; k < count; k += workers) fn(k);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace qi
