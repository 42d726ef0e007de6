#pragma once

#include <vector>

#include "kfield/model.hpp"
#include "kfield/sampling.hpp"

namespace kfield {

struct HdwSystem {
  int k = 0, n = 0;
  std::vector<std::vector<Expr>> velocity;  // [a][i] = dH/dp^a_i
  std::vector<Expr> trace;                  // [i] = -dH/dq^i
};

HdwSystem derive_hdw(const SystemDef& s);

// (X_a)^i = dH/dp^a_i, (X_1)^1_i = -dH/dq^i, other fiber components 0.
// For a cosymplectic system the base block is the identity.
KVectorField gauge_solution(const SystemDef& s);

struct SolutionReport {
  bool is_solution = false;
  double max_defect = 0.0;
  bool kernel_member = false;
  double kernel_defect = 0.0;
  double integrability_defect = 0.0;
  int samples = 0;  // points that evaluated without a domain error
};

// Halton samples in box (default [-1,1]^d). Handles both formalisms; the
// cosymplectic module wraps it with its extra preconditions.
SolutionReport check_solution(const KVectorField& X, const SystemDef& s, const SampleBox* box = nullptr,
                              double tol = 1e-10, int samples = 100);

// Max over the points of the Euclidean norm of every [X_a, X_b].
double integrability_defect(const KVectorField& X, const SystemDef& s,
                            const std::vector<std::vector<double>>& slot_points);

}  // namespace kfield
