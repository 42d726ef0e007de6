#include "variants.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace kfield::simd::detail {
namespace {

void diff1(const double* m, const double* p, double c, double* out, std::size_t len) {
  const float64x2_t vc = vdupq_n_f64(c);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) vst1q_f64(out + i, vmulq_f64(vsubq_f64(vld1q_f64(p + i), vld1q_f64(m + i)), vc));
  for (; i < len; ++i) out[i] = (p[i] - m[i]) * c;
}

void diff2(const double* m, const double* mid, const double* p, double c, double* out, std::size_t len) {
  const float64x2_t vc = vdupq_n_f64(c), two = vdupq_n_f64(2.0);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    float64x2_t t = vsubq_f64(vld1q_f64(m + i), vmulq_f64(two, vld1q_f64(mid + i)));
    vst1q_f64(out + i, vmulq_f64(vaddq_f64(t, vld1q_f64(p + i)), vc));
  }
  for (; i < len; ++i) out[i] = ((m[i] - 2.0 * mid[i]) + p[i]) * c;
}

void leapfrog(const double* cur, const double* prev, const double* f, double dt2, double* out, std::size_t len) {
  const float64x2_t vdt = vdupq_n_f64(dt2), two = vdupq_n_f64(2.0);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    float64x2_t t = vsubq_f64(vmulq_f64(two, vld1q_f64(cur + i)), vld1q_f64(prev + i));
    vst1q_f64(out + i, vaddq_f64(t, vmulq_f64(vdt, vld1q_f64(f + i))));
  }
  for (; i < len; ++i) out[i] = (2.0 * cur[i] - prev[i]) + dt2 * f[i];
}

}  // namespace

const Kernels neon_kernels{diff1, diff2, leapfrog, Isa::Neon};

}  // namespace kfield::simd::detail
#endif
