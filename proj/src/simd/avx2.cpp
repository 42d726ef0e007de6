#include "variants.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

#define KF_AVX2 __attribute__((target("avx2")))

namespace kfield::simd::detail {
namespace {

KF_AVX2 void diff1(const double* m, const double* p, double c, double* out, std::size_t len) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(p + i), _mm256_loadu_pd(m + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(d, vc));
  }
  for (; i < len; ++i) out[i] = (p[i] - m[i]) * c;
}

KF_AVX2 void diff2(const double* m, const double* mid, const double* p, double c, double* out, std::size_t len) {
  const __m256d vc = _mm256_set1_pd(c), two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    __m256d t = _mm256_sub_pd(_mm256_loadu_pd(m + i), _mm256_mul_pd(two, _mm256_loadu_pd(mid + i)));
    t = _mm256_add_pd(t, _mm256_loadu_pd(p + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(t, vc));
  }
  for (; i < len; ++i) out[i] = ((m[i] - 2.0 * mid[i]) + p[i]) * c;
}

KF_AVX2 void leapfrog(const double* cur, const double* prev, const double* f, double dt2, double* out,
                      std::size_t len) {
  const __m256d vdt = _mm256_set1_pd(dt2), two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    __m256d t = _mm256_sub_pd(_mm256_mul_pd(two, _mm256_loadu_pd(cur + i)), _mm256_loadu_pd(prev + i));
    t = _mm256_add_pd(t, _mm256_mul_pd(vdt, _mm256_loadu_pd(f + i)));
    _mm256_storeu_pd(out + i, t);
  }
  for (; i < len; ++i) out[i] = (2.0 * cur[i] - prev[i]) + dt2 * f[i];
}

}  // namespace

const Kernels avx2_kernels{diff1, diff2, leapfrog, Isa::Avx2};

}  // namespace kfield::simd::detail
#endif
