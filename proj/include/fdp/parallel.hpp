#pragma once

#include <cstddef>
#include <functional>

namespace fdp {

/// Worker count from FDP_THREADS, else the hardware concurrency (at least 1).
std::size_t thread_count();

/**
 * @brief Runs fn(i) for i in [0, n) on up to thread_count() workers.
 *
 * Work items are handed out in contiguous blocks; callers write results into
 * per-index slots and reduce them in index order afterwards, so results do
 * not depend on the worker count. The first exception thrown is rethrown.
 */
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace fdp
