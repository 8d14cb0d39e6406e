#pragma once

#include <cstddef>
#include <functional>

namespace prognosis {

// Resolves the worker count: PROGNOSIS_WORKERS env var wins, then the
// requested value, then hardware concurrency. Always >= 1.
int worker_count(int requested = 0);

// Runs fn(i) for i in [0, n). Work items are pulled from a shared counter,
// so any data written must be indexed by i; the caller reduces in index
// order, which keeps results identical for every worker count.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace prognosis
