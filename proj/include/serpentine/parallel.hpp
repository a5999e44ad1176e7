#pragma once

#include <functional>

namespace serpentine {

// Worker count, capped by the SERP_THREADS environment variable.
int worker_count();

// Runs fn(i) for i in [0, n); work is split across workers.  Callers keep
// determinism by writing to disjoint slots and reducing in index order.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace serpentine
