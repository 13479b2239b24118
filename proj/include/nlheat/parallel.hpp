#pragma once

namespace nlheat {

/// Environment variable selecting the worker count for parallel kernels.
inline constexpr const char* kThreadsEnvVar = "NLHEAT_NUM_THREADS";

/// Worker count: NLHEAT_NUM_THREADS when set to a positive integer, else the
/// OpenMP default (available parallelism).
int worker_count();

/// Overrides the worker count for the calling process; 0 restores the
/// environment/default behaviour. Used by tests and the benchmark.
void set_worker_count(int workers);

}  // namespace nlheat
