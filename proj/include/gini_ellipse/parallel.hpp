#pragma once

#include <cstddef>
#include <functional>

namespace gini_ellipse {

// Fixed sampling block: streams are derived per block index, so the first k
// samples of a run are the same for every worker count and every total count.
inline constexpr std::size_t kSampleBlock = 16384;

// Number of workers: hardware concurrency, capped by GINI_ELLIPSE_THREADS.
std::size_t worker_count();

// Calls fn(block_index, begin, end) over [0, total) split into blocks of
// block_size. fn must write only to disjoint output slices; blocks may run on
// any worker in any order.
void for_each_block(std::size_t total, std::size_t block_size,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace gini_ellipse
