#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_internal.hpp"

namespace renorm {

namespace {

bool cpu_has_avx2() {
#if defined(RENORM_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

SimdLevel detect() {
  if (const char* env = std::getenv("RENORM_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return SimdLevel::scalar;
    if (v == "avx2" && cpu_has_avx2()) return SimdLevel::avx2;
  }
  return cpu_has_avx2() ? SimdLevel::avx2 : SimdLevel::scalar;
}

std::atomic<SimdLevel>& level_slot() {
  static std::atomic<SimdLevel> level{detect()};
  return level;
}

}  // namespace

std::string_view to_string(SimdLevel level) {
  switch (level) {
    case SimdLevel::scalar: return "scalar";
    case SimdLevel::avx2: return "avx2";
  }
  return "unknown";
}

bool simd_supported(SimdLevel level) {
  switch (level) {
    case SimdLevel::scalar: return true;
    case SimdLevel::avx2: return cpu_has_avx2();
  }
  return false;
}

SimdLevel active_simd_level() { return level_slot().load(std::memory_order_relaxed); }

void set_simd_level(SimdLevel level) {
  if (!simd_supported(level)) {
    throw std::invalid_argument("SIMD level " + std::string(to_string(level)) + " is not available");
  }
  level_slot().store(level, std::memory_order_relaxed);
}

namespace kernels {

const KernelTable& table(SimdLevel level) {
  if (!simd_supported(level)) {
    throw std::invalid_argument("SIMD level " + std::string(to_string(level)) + " is not available");
  }
#if defined(RENORM_WITH_AVX2)
  if (level == SimdLevel::avx2) return avx2_table();
#endif
  return scalar_table();
}

const KernelTable& active() { return table(active_simd_level()); }

}  // namespace kernels
}  // namespace renorm
