#include "kfield/cosymplectic.hpp"

#include <cmath>

#include "internal.hpp"
#include "kfield/structures.hpp"

namespace kfield {

CosymHdwSystem derive_cosym(const SystemDef& s) {
  if (!s.cosymplectic()) throw FormalismError("expected a k-cosymplectic system");
  HdwSystem h = derive_hdw(s);
  CosymHdwSystem c{h.k, h.n, std::move(h.velocity), std::move(h.trace), {}};
  for (const auto& x : s.frame.x) c.reeb.push_back(diff(s.expression, x));
  return c;
}

CosymLagrangian derive_cosym_lagrangian(const SystemDef& s) {
  if (!s.cosymplectic()) throw FormalismError("expected a k-cosymplectic system");
  CosymLagrangian c{derive_lagrangian(s), {}};
  for (const auto& x : s.frame.x) c.dL_dx.push_back(diff(s.expression, x));
  return c;
}

double reeb_energy_defect(const SystemDef& s, const SampleBox* box, int samples) {
  CosymLagrangian c = derive_cosym_lagrangian(s);
  const int k = s.k(), dim = s.dim();
  std::vector<Compiled> dx;
  for (const auto& e : c.dL_dx) dx.push_back(detail::compile(s, e));
  std::vector<OneForm> etas;
  for (int a = 0; a < k; ++a) etas.push_back(Eigen::VectorXd::Unit(dim, a));
  double worst = 0.0;
  for (const auto& p : detail::sample_slots(s, box, samples)) {
    try {
      if (!regularity_of(hessian_at(s, c.derived, p)).regular) continue;
      std::vector<TwoForm> forms;
      for (int a = 0; a < k; ++a) forms.push_back(omega_L(s, c.derived, a, p));
      Eigen::MatrixXd R = reeb_fields(etas, forms);
      Eigen::VectorXd gE = gradient_at(s, c.derived.energy, p);
      for (int a = 0; a < k; ++a)
        worst = std::max(worst, std::fabs(R.row(a).dot(gE) + dx[static_cast<std::size_t>(a)](p)));
    } catch (const DomainError&) {
    }
  }
  return worst;
}

SolutionReport check_cosym_solution(const KVectorField& X, const SystemDef& s, const SampleBox* box, double tol,
                                    int samples) {
  if (!s.cosymplectic() || s.kind != Kind::Hamiltonian)
    throw FormalismError("check_cosym_solution needs a k-cosymplectic hamiltonian system");
  return check_solution(X, s, box, tol, samples);
}

bool is_autonomous(const SystemDef& s, const SampleBox* box, int samples) {
  if (!s.cosymplectic()) return true;
  std::vector<Compiled> dx;
  for (const auto& x : s.frame.x) dx.push_back(detail::compile(s, diff(s.expression, x)));
  for (const auto& p : detail::sample_slots(s, box, samples)) {
    try {
      for (const auto& d : dx)
        if (std::fabs(d(p)) > 1e-12) return false;
    } catch (const DomainError&) {
    }
  }
  return true;
}

std::pair<SystemDef, KVectorField> suspend(const SystemDef& s, const KVectorField& X) {
  if (s.cosymplectic()) throw FormalismError("suspend expects a k-symplectic system");
  validate_field(X, s);
  SystemDef c = s;
  c.formalism = Formalism::KCosymplectic;
  KVectorField Y = X;
  Y.has_base = true;
  Y.base.assign(static_cast<std::size_t>(X.k), std::vector<Expr>(static_cast<std::size_t>(X.k), Expr(0.0)));
  for (int a = 0; a < X.k; ++a) Y.base[a][a] = Expr(1.0);
  return {c, Y};
}

std::pair<SystemDef, KVectorField> drop_base(const SystemDef& s, const KVectorField& X) {
  if (!s.cosymplectic()) throw FormalismError("drop_base expects a k-cosymplectic system");
  validate_field(X, s);
  if (!is_autonomous(s)) throw PreconditionError("system depends on the base coordinates");
  const auto xs = s.frame.x;
  for (int a = 0; a < X.k; ++a)
    for (const auto& e : X.components(a))
      if (depends_on_any(e, xs)) throw PreconditionError("field components depend on the base coordinates");
  SystemDef c = s;
  c.formalism = Formalism::KSymplectic;
  c.expression = simplify(s.expression);
  KVectorField Y = X;
  Y.has_base = false;
  Y.base.clear();
  validate_system(c);
  return {c, Y};
}

}  // namespace kfield
