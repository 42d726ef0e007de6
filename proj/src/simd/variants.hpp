#pragma once

#include "kfield/simd.hpp"

namespace kfield::simd::detail {

extern const Kernels scalar_kernels;
#if defined(__x86_64__) || defined(__i386__)
extern const Kernels avx2_kernels;
#endif
#if defined(__aarch64__)
extern const Kernels neon_kernels;
#endif

}  // namespace kfield::simd::detail
