#include "phasor_sentinel/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <string>

namespace phasor_sentinel {

namespace {

std::atomic<int> g_jobs{0};

int env_jobs() {
  const char* env = std::getenv("PHASOR_SENTINEL_JOBS");
  if (env == nullptr) return 0;
  try {
    return std::max(0, std::stoi(env));
  } catch (...) {
    return 0;
  }
}

}  // namespace

int worker_count() {
  const int explicit_jobs = g_jobs.load();
  if (explicit_jobs > 0) return explicit_jobs;
  const int from_env = env_jobs();
  if (from_env > 0) return from_env;
  return std::max(1, omp_get_max_threads());
}

void set_worker_count(int jobs) { g_jobs.store(jobs > 0 ? jobs : 0); }

}  // namespace phasor_sentinel
