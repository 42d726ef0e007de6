#pragma once
// Helpers shared by the engine translation units.

#include <vector>

#include "kfield/model.hpp"
#include "kfield/sampling.hpp"

namespace kfield::detail {

// Halton samples over the coordinates of s (default box [-1,1]^d), each
// extended by the parameter values so it matches s.slots().
inline std::vector<std::vector<double>> sample_slots(const SystemDef& s, const SampleBox* box, int count) {
  SampleBox b = box ? *box : SampleBox::cube(s.dim());
  if (b.dim() != s.dim()) throw DimensionMismatch("sample box dimension differs from the system dimension");
  std::vector<std::vector<double>> out;
  for (const auto& p : halton_points(b, count)) out.push_back(s.point(p));
  return out;
}

inline Compiled compile(const SystemDef& s, const Expr& e) { return Compiled(e, s.slots()); }

}  // namespace kfield::detail
