#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace balanced {

// Static block partition of [0, n) over `workers` threads. Each index is
// processed exactly once and writes only its own slot, so results are
// identical for any worker count.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n < 2) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    const int nw = std::min<int>(workers, static_cast<int>(n));
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (int w = 0; w < nw; ++w) {
        const std::size_t lo = n * w / nw, hi = n * (w + 1) / nw;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t k = lo; k < hi; ++k) fn(k);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace balanced
