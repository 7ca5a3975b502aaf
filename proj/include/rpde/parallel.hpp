#pragma once

#include <functional>

namespace rpde {

/// Work is split into fixed-size chunks so results never depend on the
/// number of threads; callers reduce per-chunk results in chunk order.
inline constexpr int kChunkSize = 16;

inline int chunk_count(int n) { return (n + kChunkSize - 1) / kChunkSize; }

/// Thread count from RPDE_THREADS, or 1 when unset or malformed.
int default_thread_count();

/// Run body(i) for i in [0, count) on up to `threads` worker threads.
void parallel_for_each(int count, int threads, const std::function<void(int)>& body);

}  // namespace rpde
