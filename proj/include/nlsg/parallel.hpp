#pragma once

#include <functional>

namespace nlsg {

// Worker cap: NLSG_WORKERS if set, else hardware concurrency.
int worker_count();

// Runs body(0..n-1); parallel when more than one worker is available.
// Exceptions are captured and the first one rethrown after completion.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace nlsg
