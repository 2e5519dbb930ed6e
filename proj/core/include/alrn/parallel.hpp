#pragma once

#include <cstddef>
#include <functional>

namespace alrn {

// Worker count for parallel_for: the ALRN_THREADS environment variable
// when set (clamped to at least 1), otherwise hardware_concurrency.
int worker_count();

// Runs body(i) for i in [0, count) across worker_count() threads using
// contiguous index blocks. Callers keep determinism by writing only to
// per-index storage and reducing sequentially afterwards. Exceptions
// from workers are rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace alrn
