#include "gini_ellipse/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace gini_ellipse {

std::size_t worker_count() {
    std::size_t n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("GINI_ELLIPSE_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<std::size_t>(cap) < n) n = static_cast<std::size_t>(cap);
    }
    return n;
}

void for_each_block(std::size_t total, std::size_t block_size,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (total == 0) return;
    const std::size_t n_blocks = (total + block_size - 1) / block_size;
    const std::size_t workers = std::min(worker_count(), n_blocks);

    auto run_block = [&](std::size_t bi) {
        const std::size_t begin = bi * block_size;
        const std::size_t end = std::min(begin + block_size, total);
        fn(bi, begin, end);
    };

    if (workers <= 1) {
        for (std::size_t bi = 0; bi < n_blocks; ++bi) run_block(bi);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t bi = next.fetch_add(1);
                if (bi >= n_blocks || failed.load()) return;
                try {
                    run_block(bi);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace gini_ellipse
