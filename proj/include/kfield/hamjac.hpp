#pragma once

#include <optional>
#include <span>
#include <vector>

#include "kfield/fields.hpp"
#include "kfield/model.hpp"
#include "kfield/sampling.hpp"

namespace kfield {

// gamma^a_i over q, or over (x, q) for a cosymplectic system.
struct ClosedSectionSpec {
  std::vector<std::vector<Expr>> gamma;  // [a][i]
  std::optional<std::vector<Expr>> W;    // [a], gamma^a_i = dW^a/dq^i

  static ClosedSectionSpec from_potentials(const SystemDef& s, std::vector<Expr> W);
};

struct HjDefect {
  double closedness = 0.0;
  double hj = 0.0;
  double hj_potential = 0.0;  // the same defect written through W; 0 without W
  int samples = 0;
};

// Samples (x, q) in box (default [-1,1]^(offset_fiber)). ShapeMismatch on bad
// shapes or on W whose q-gradient disagrees with gamma.
HjDefect hj_defect(const SystemDef& s, const ClosedSectionSpec& g, const SampleBox* box = nullptr,
                   int samples = 100);

// (Z_a)^i = dH/dp^a_i with p replaced by gamma. The cosymplectic d/dx^a part is implicit.
struct ProjectedField {
  int k = 0, n = 0;
  bool cosymplectic = false;
  std::vector<std::vector<Expr>> comps;  // [a][i]
  SystemDef source;
};

ProjectedField project_field(const SystemDef& s, const ClosedSectionSpec& g);

struct ProjectedSection {
  GridSection section;  // psi only
  double commutativity_defect = 0.0;
};

// Axis-ordered RK4 flows from q0 at the grid corner; `steps` RK4 substeps per cell.
ProjectedSection integrate_projected(const ProjectedField& Z, std::span<const double> q0, const Grid& g,
                                     int steps = 1);

// Grid HDW residual of the lift x -> (psi(x), gamma(x, psi(x))).
ResidualReport verify_lift(const SystemDef& s, const ClosedSectionSpec& g, const GridSection& sigma);

}  // namespace kfield
