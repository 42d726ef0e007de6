#include "variants.hpp"

namespace kfield::simd::detail {
namespace {

void diff1(const double* m, const double* p, double c, double* out, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = (p[i] - m[i]) * c;
}

void diff2(const double* m, const double* mid, const double* p, double c, double* out, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = ((m[i] - 2.0 * mid[i]) + p[i]) * c;
}

void leapfrog(const double* cur, const double* prev, const double* f, double dt2, double* out, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = (2.0 * cur[i] - prev[i]) + dt2 * f[i];
}

}  // namespace

const Kernels scalar_kernels{diff1, diff2, leapfrog, Isa::Scalar};

}  // namespace kfield::simd::detail
