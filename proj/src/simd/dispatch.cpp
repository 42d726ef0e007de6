#include <cstdlib>
#include <cstring>

#include "kfield/errors.hpp"
#include "variants.hpp"

namespace kfield::simd {

const char* to_string(Isa isa) {
  switch (isa) {
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
    default: return "scalar";
  }
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(__i386__)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Kernels& kernels(Isa isa) {
  if (!supported(isa)) throw PreconditionError(std::string("SIMD variant not available: ") + to_string(isa));
  switch (isa) {
#if defined(__x86_64__) || defined(__i386__)
    case Isa::Avx2: return detail::avx2_kernels;
#endif
#if defined(__aarch64__)
    case Isa::Neon: return detail::neon_kernels;
#endif
    default: return detail::scalar_kernels;
  }
}

const Kernels& kernels() {
  static const Kernels& chosen = [] () -> const Kernels& {
    const char* env = std::getenv("KFIELD_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return detail::scalar_kernels;
    for (Isa isa : {Isa::Avx2, Isa::Neon})
      if (supported(isa)) return kernels(isa);
    return detail::scalar_kernels;
  }();
  return chosen;
}

}  // namespace kfield::simd
