#include "ddalpha/parallel.hpp"

#include <omp.h>

#include <cstdlib>

namespace ddalpha::parallel {

namespace {
thread_local int g_serial_depth = 0;
}

int max_threads() {
  if (g_serial_depth > 0) return 1;
  const int hw = omp_get_max_threads();
  const char* env = std::getenv("DDALPHA_THREADS");
  if (env == nullptr || *env == '\0') return hw > 0 ? hw : 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env) return hw > 0 ? hw : 1;  // unparsable: fall back to default
  if (v <= 1) return 1;
  return int(v < hw ? v : hw);
}

ScopedSerial::ScopedSerial() { ++g_serial_depth; }
ScopedSerial::~ScopedSerial() { --g_serial_depth; }

}  // namespace ddalpha::parallel
