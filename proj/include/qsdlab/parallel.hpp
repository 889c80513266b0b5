#pragma once

#include <thread>
#include <vector>

namespace qsdlab {

/// Static range split across `threads` workers. Results must be reduced
/// order-independently (integer counts, sums) so the partition never shows.
template <typename Fn>
void parallel_chunks(long long total, int threads, Fn&& fn) {
    if (threads <= 1 || total < 2) {
        fn(0LL, total, 0);
        return;
    }
    int workers = std::min<long long>(threads, total);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    long long chunk = (total + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        long long lo = w * chunk;
        long long hi = std::min(total, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi, w] { fn(lo, hi, w); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace qsdlab
