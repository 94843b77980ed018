#ifndef GLAESER_PARALLEL_HPP
#define GLAESER_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace glaeser {

/// Calls fn(i) for i in [0, count) on up to `threads` workers (0 = all cores).
/// Each index is handled exactly once, so writes to slot i are race-free. If
/// any call throws, the exception from the lowest failing index is rethrown
/// (chunks are contiguous and each worker stops at its first failure).
template <typename Fn>
void parallelFor(std::size_t count, int threads, Fn &&fn) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(count, 1));

    std::vector<std::exception_ptr> errors(workers);
    auto run = [&](std::size_t w) {
        const std::size_t lo = count * w / workers, hi = count * (w + 1) / workers;
        for (std::size_t i = lo; i < hi; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
                return;
            }
        }
    };

    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto &t : pool) t.join();
    }
    for (std::size_t w = 0; w < workers; ++w)
        if (errors[w]) std::rethrow_exception(errors[w]);
}

} // namespace glaeser

#endif
