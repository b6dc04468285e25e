#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace liqgame {

// Worker count for data-parallel loops: LIQGAME_THREADS when set, otherwise
// the hardware concurrency.
inline int worker_count() {
    if (const char* env = std::getenv("LIQGAME_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

// Static partition of [0, n) across workers; body(worker_index, begin, end).
// Each item is owned by exactly one worker, so writes into per-item slots are
// race-free and results do not depend on scheduling.
template <class Body>
void parallel_chunks(int n, Body&& body) {
    if (n <= 0) return;
    const int workers = std::min(worker_count(), n);
    if (workers <= 1) {
        body(0, 0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int base = n / workers;
    const int extra = n % workers;
    int begin = 0;
    for (int w = 0; w < workers; ++w) {
        const int len = base + (w < extra ? 1 : 0);
        const int end = begin + len;
        pool.emplace_back([&body, w, begin, end] { body(w, begin, end); });
        begin = end;
    }
    for (auto& th : pool) th.join();
}

}  // namespace liqgame
