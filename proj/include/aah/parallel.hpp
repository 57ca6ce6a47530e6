#pragma once

#include <cstddef>
#include <functional>

namespace aah {

/// Worker cap used by every parallel sweep; 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, n). Work is split into contiguous static chunks,
/// and each index writes only its own output slot, so results never depend on
/// the number of workers. The first exception thrown by any worker is
/// rethrown on the calling thread. Nested calls from inside a worker run
/// serially on that worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace aah
