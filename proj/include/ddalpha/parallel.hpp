#pragma once

namespace ddalpha::parallel {

// Thread budget for the OpenMP kernels. Controlled by the DDALPHA_THREADS
// environment variable: unset -> OpenMP default, k >= 1 -> at most k,
// 0 -> serial. Always >= 1.
int max_threads();

// Forces max_threads() == 1 for the lifetime of the guard on the current
// thread. Timing runs use this so that measurements stay single-threaded.
class ScopedSerial {
 public:
  ScopedSerial();
  ~ScopedSerial();
  ScopedSerial(const ScopedSerial&) = delete;
  ScopedSerial& operator=(const ScopedSerial&) = delete;
};

}  // namespace ddalpha::parallel
