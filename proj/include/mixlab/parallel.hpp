#pragma once

#include <cstddef>
#include <functional>

namespace mixlab::parallel {

/// Worker count used by for_each. Defaults to 1; the CLI sets it from
/// --threads or MIXLAB_THREADS.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs fn(i) for i in [0, n). Work items must write only to their own
/// slot, so results never depend on the thread count. The exception thrown
/// by the lowest failing index is rethrown. Calls made from inside a worker
/// run serially on that worker.
void for_each(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace mixlab::parallel
