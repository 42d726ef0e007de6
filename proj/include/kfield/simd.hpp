#pragma once
// Line kernels used by the finite-difference code. Every variant performs the
// same operations in the same order, so results match the scalar reference
// bit for bit (the build disables FP contraction).

#include <cstddef>

namespace kfield::simd {

enum class Isa { Scalar, Avx2, Neon };

const char* to_string(Isa isa);

struct Kernels {
  // out = (p - m) * c
  void (*diff1)(const double* m, const double* p, double c, double* out, std::size_t len);
  // out = ((m - 2 * mid) + p) * c
  void (*diff2)(const double* m, const double* mid, const double* p, double c, double* out, std::size_t len);
  // out = (2 * cur - prev) + dt2 * f
  void (*leapfrog)(const double* cur, const double* prev, const double* f, double dt2, double* out,
                   std::size_t len);
  Isa isa;
};

bool supported(Isa isa);
// Best supported variant, chosen once at first call. KFIELD_SIMD=scalar in
// the environment forces the reference path.
const Kernels& kernels();
// A specific variant; PreconditionError if the CPU or build lacks it.
const Kernels& kernels(Isa isa);

}  // namespace kfield::simd
