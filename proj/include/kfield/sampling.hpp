#pragma once

#include <vector>

namespace kfield {

struct SampleBox {
  std::vector<double> lo, hi;
  static SampleBox cube(int d, double lo = -1.0, double hi = 1.0);
  int dim() const { return static_cast<int>(lo.size()); }
};

// Radical inverse of index in the given base.
double halton(unsigned index, unsigned base);
// Points 1..count of the Halton sequence mapped into the box.
std::vector<std::vector<double>> halton_points(const SampleBox& box, int count);

}  // namespace kfield
