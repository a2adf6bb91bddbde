#include <atomic>
#include <cstdlib>
#include <string>

#include "irgp/errors.hpp"
#include "irgp/simd/ops.hpp"

namespace irgp::simd {

namespace {

const Ops* resolve_default() noexcept {
  const char* env = std::getenv("IRGP_SIMD");
  const std::string choice = env != nullptr ? env : "auto";
  if (choice == "scalar") return &scalar_ops();
  if (cpu_supports(Isa::kAvx2)) return avx2_ops();
  return &scalar_ops();
}

std::atomic<const Ops*>& slot() noexcept {
  static std::atomic<const Ops*> current{resolve_default()};
  return current;
}

}  // namespace

bool cpu_supports(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return avx2_ops() != nullptr && __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const Ops& ops_for(Isa isa) {
  if (!cpu_supports(isa)) {
    throw ConfigError("SIMD variant '" + std::string(isa_name(isa)) +
                      "' is not available on this CPU");
  }
  return isa == Isa::kAvx2 ? *avx2_ops() : scalar_ops();
}

const Ops& active() noexcept { return *slot().load(std::memory_order_relaxed); }

void set_active(Isa isa) { slot().store(&ops_for(isa), std::memory_order_relaxed); }

std::string_view isa_name(Isa isa) noexcept {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

}  // namespace irgp::simd
