#pragma once

#include <functional>

namespace pasadena {

/// Worker count: PASADENA_THREADS when set (>0), else hardware concurrency.
int default_thread_count();

/// Runs fn(i) for i in [0,n) on up to `threads` workers (0 = default).
/// Indices are handed out in contiguous blocks; callers keep determinism by
/// writing only to per-index slots and reducing in index order afterwards.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

} // namespace pasadena
