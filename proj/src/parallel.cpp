#include "nlheat/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>

namespace nlheat {
namespace {
std::atomic<int> g_override{0};
}

int worker_count() {
  if (const int forced = g_override.load(); forced > 0) return forced;
  if (const char* env = std::getenv(kThreadsEnvVar)) {
    int value = 0;
    const char* end = env + std::strlen(env);
    auto [ptr, ec] = std::from_chars(env, end, value);
    if (ec == std::errc() && ptr == end && value > 0) return value;
  }
  return omp_get_max_threads();
}

void set_worker_count(int workers) { g_override.store(workers > 0 ? workers : 0); }

}  // namespace nlheat
