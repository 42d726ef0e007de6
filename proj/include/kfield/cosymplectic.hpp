#pragma once

#include <utility>
#include <vector>

#include "kfield/hamiltonian.hpp"
#include "kfield/lagrangian.hpp"
#include "kfield/model.hpp"

namespace kfield {

struct CosymHdwSystem {
  int k = 0, n = 0;
  std::vector<std::vector<Expr>> velocity;  // [a][i] = dH/dp^a_i
  std::vector<Expr> trace;                  // [i] = -dH/dq^i
  std::vector<Expr> reeb;                   // [a] = dH/dx^a
};

// FormalismError unless s is a k-cosymplectic hamiltonian system.
CosymHdwSystem derive_cosym(const SystemDef& s);

struct CosymLagrangian {
  LagrangianDerived derived;
  std::vector<Expr> dL_dx;  // [a]
};

CosymLagrangian derive_cosym_lagrangian(const SystemDef& s);

// Max over samples of |(R_L)_a(E_L) + dL/dx^a|, with R_L solved pointwise from
// dx^a and Omega_L^a. Points where L is singular are skipped.
double reeb_energy_defect(const SystemDef& s, const SampleBox* box = nullptr, int samples = 100);

SolutionReport check_cosym_solution(const KVectorField& X, const SystemDef& s, const SampleBox* box = nullptr,
                                    double tol = 1e-10, int samples = 100);

// dH/dx^a vanishes at every sample (to 1e-12).
bool is_autonomous(const SystemDef& s, const SampleBox* box = nullptr, int samples = 100);

// Retag an autonomous k-symplectic system as k-cosymplectic and adjoin the
// identity base block to X.
std::pair<SystemDef, KVectorField> suspend(const SystemDef& s, const KVectorField& X);
// Inverse of suspend; PreconditionError if s is not autonomous.
std::pair<SystemDef, KVectorField> drop_base(const SystemDef& s, const KVectorField& X);

}  // namespace kfield
