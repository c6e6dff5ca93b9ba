#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace opdyn {

/// Runs body(begin, end) over contiguous ranges of [0, n), one range per
/// worker. Range boundaries depend only on (n, workers).
template <typename Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
    workers = std::max(1u, workers);
    if (workers == 1 || n < 2 * workers) {
        body(std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
}

} // namespace opdyn
