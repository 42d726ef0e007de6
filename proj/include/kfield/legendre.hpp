#pragma once

#include <optional>
#include <span>
#include <vector>

#include "kfield/lagrangian.hpp"
#include "kfield/model.hpp"

namespace kfield {

struct LegendreMap {
  SystemDef source;                        // lagrangian
  LagrangianDerived derived;
  std::vector<std::vector<Expr>> momenta;  // [a][i] = dL/dv^i_a
};

LegendreMap legendre_forward(const SystemDef& s);

// Solve p = dL/dv(x, q, v) for v by damped Newton. q has n entries, p and
// guess k*n (alpha-major); x (k entries) only for cosymplectic sources.
std::vector<double> legendre_invert(const LegendreMap& m, std::span<const double> q, std::span<const double> p,
                                    std::span<const double> guess, std::span<const double> x = {});

// The hamiltonian system on the momentum frame that shares s's names and
// params, when the velocity Hessian is constant; nullopt otherwise.
std::optional<SystemDef> induced_system(const SystemDef& s);

class InducedHamiltonian {
 public:
  explicit InducedHamiltonian(const SystemDef& s);
  // slots of the induced hamiltonian frame: (x,) q, p, params
  double operator()(std::span<const double> coords) const;
  const std::optional<SystemDef>& symbolic() const { return symbolic_; }
  const LegendreMap& map() const { return map_; }

 private:
  LegendreMap map_;
  std::optional<SystemDef> symbolic_;
  Compiled energy_;
};

InducedHamiltonian induced_hamiltonian(const SystemDef& s);

// Max entrywise defect of FL^* theta^a vs theta_L^a and J^T A_a J vs omega_L^a at a
// point of the velocity space (coordinates of s, parameters from s).
double pullback_check(const SystemDef& s, std::span<const double> coords);

}  // namespace kfield
