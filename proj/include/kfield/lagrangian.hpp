#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "kfield/model.hpp"
#include "kfield/sampling.hpp"

namespace kfield {

struct LagrangianDerived {
  int k = 0, n = 0;
  Expr energy;                             // E_L = v^i_a dL/dv^i_a - L
  std::vector<std::vector<Expr>> theta;    // [a][i] = dL/dv^i_a
  std::vector<std::vector<Expr>> hessian;  // [(a,i)][(b,j)], flattened a*n+i
};

LagrangianDerived derive_lagrangian(const SystemDef& s);

struct Regularity {
  double det = 0.0;
  bool regular = false;
};

// Numeric velocity Hessian at a slot vector (see SystemDef::slots).
Eigen::MatrixXd hessian_at(const SystemDef& s, const LagrangianDerived& d, std::span<const double> slots);
Regularity regularity_of(const Eigen::MatrixXd& W);
// at binds coordinates; parameters default to s.params.
Regularity regularity(const LagrangianDerived& d, const SystemDef& s, const Assignment& at);

struct SopdeReport {
  bool is_sopde = false;
  double sopde_defect = 0.0;
  double el_defect = 0.0;
  int samples = 0;
};

// EL trace residual at one slot vector: for each field index i,
//   sum_a d2L/dq^j dv^i_a v^j_a + d2L/dv^i_a dv^j_b acc[(a*k+b)*n+j] - dL/dq^i
// plus sum_a d2L/dx^a dv^i_a for cosymplectic systems. acc stands for
// (X_a)^j_b, or for d2 psi^j / dx^a dx^b on a grid.
class ElResidual {
 public:
  explicit ElResidual(const SystemDef& s);
  void operator()(const double* slots, const double* acc, double* out) const;
  // d R_i / d acc[idx] (constant-coefficient part only; evaluated at slots)
  double acc_coefficient(const double* slots, int i, int idx) const;
  const SystemDef& system() const { return s_; }

 private:
  struct Term {
    int idx;  // slot index (velocity terms) or acc index
    Compiled c;
    bool is_const;
    double val;
    double at(const double* slots) const { return is_const ? val : c(slots); }
  };
  SystemDef s_;
  std::vector<std::vector<Term>> vel_, acc_;  // per field index
  std::vector<Compiled> rest_;                // sum_a d2L/dx^a dv^i_a - dL/dq^i
};

// Euler-Lagrange equations lhs[i] = 0 in jet notation: q^i stands for psi^i,
// v^i_a for its first partials and second[i][a][b] names d2 psi^i/dx^a dx^b
// (one name per unordered pair, "{q}_{a}{b}").
struct ElEquations {
  std::vector<Expr> lhs;
  std::vector<std::vector<std::vector<std::string>>> second;
};

ElEquations el_equations(const SystemDef& s);

SopdeReport check_sopde_el(const KVectorField& X, const SystemDef& s, const SampleBox* box = nullptr,
                           double tol = 1e-10, int samples = 100);

// omega_L^a = dq^i ^ d(dL/dv^i_a) as a d x d matrix at a slot vector.
Eigen::MatrixXd omega_L(const SystemDef& s, const LagrangianDerived& d, int a, std::span<const double> slots);
// Gradient of e over all coordinates at a slot vector.
Eigen::VectorXd gradient_at(const SystemDef& s, const Expr& e, std::span<const double> slots);

}  // namespace kfield
