#pragma once

#include <Eigen/Dense>
#include <vector>

namespace kfield {

using TwoForm = Eigen::MatrixXd;  // omega(u, w) = u^T A w
using OneForm = Eigen::VectorXd;  // eta(u) = eta . u

struct CanonicalStructure {
  std::vector<OneForm> etas;  // empty unless cosymplectic
  std::vector<TwoForm> omegas;
  std::vector<int> V;  // coordinate indices spanning the distribution
  int d = 0;
};

// Coordinates: (x^1..x^k,) q^1..q^n, p^1_1..p^1_n, ..., p^k_1..p^k_n.
CanonicalStructure canonical_forms(int k, int n, bool cosymplectic);

// Complete-pivot elimination; entries below rel_tol * max|entry| count as zero.
int numeric_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

struct StructureReport {
  bool cosymplectic = false;
  bool vanishes_on_V = false;
  bool eta_vanishes_on_V = true;  // cosymplectic only
  bool dimensions_ok = false;
  int kernel_intersection_dim = 0;
  bool eta_wedge_nonzero = false;  // cosymplectic only
  int ker_omega_dim = 0;           // cosymplectic only
  bool pass = false;
  Eigen::MatrixXd reeb;  // k x d, cosymplectic and passing only
};

// etas == nullptr selects the k-symplectic axioms.
StructureReport verify_structure(const std::vector<TwoForm>& forms, const std::vector<OneForm>* etas,
                                 const std::vector<int>& V);

// Rows R_a with eta^b(R_a) = delta, Omega^b(R_a, .) = 0.
Eigen::MatrixXd reeb_fields(const std::vector<OneForm>& etas, const std::vector<TwoForm>& forms);

}  // namespace kfield
