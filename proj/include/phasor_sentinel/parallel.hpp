#pragma once

#include <cstdint>
#include <exception>
#include <mutex>

namespace phasor_sentinel {

/// Worker cap for OpenMP regions. Defaults to PHASOR_SENTINEL_JOBS when set,
/// otherwise the OpenMP default.
int worker_count();
void set_worker_count(int jobs);

/// Runs fn(i) for i in [0, n) across workers. The first exception thrown by
/// any iteration is rethrown on the calling thread after the loop.
template <typename Fn>
void parallel_for(std::int64_t n, Fn&& fn, int jobs = 0) {
  if (jobs <= 0) jobs = worker_count();
  std::exception_ptr error;
  std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace phasor_sentinel
