#pragma once

#include <cstddef>
#include <functional>

namespace mnpiv {

/// Number of worker threads to use: `requested` if positive, the
/// MNPIV_THREADS environment variable if set, hardware concurrency otherwise.
int resolve_threads(int requested);

/// Runs task(i) for i in [0, count) across `threads` workers.
///
/// Work is partitioned by index stride, so a task's identity never depends on
/// the thread count; callers that write results into slot i get bit-identical
/// output for any number of threads. Exceptions from tasks are rethrown.
void parallel_for_index(std::size_t count, int threads,
                        const std::function<void(std::size_t)>& task);

} // namespace mnpiv
