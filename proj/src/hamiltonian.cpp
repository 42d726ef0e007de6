#include "kfield/hamiltonian.hpp"

#include <cmath>

#include "internal.hpp"

namespace kfield {

HdwSystem derive_hdw(const SystemDef& s) {
  if (s.kind != Kind::Hamiltonian) throw FormalismError("HDW equations need a hamiltonian system");
  HdwSystem h;
  h.k = s.k();
  h.n = s.n();
  h.velocity.assign(static_cast<std::size_t>(h.k), std::vector<Expr>(static_cast<std::size_t>(h.n)));
  for (int a = 0; a < h.k; ++a)
    for (int i = 0; i < h.n; ++i) h.velocity[a][i] = diff(s.expression, s.frame.p[a][i]);
  for (int i = 0; i < h.n; ++i) h.trace.push_back(-diff(s.expression, s.frame.q[i]));
  return h;
}

KVectorField gauge_solution(const SystemDef& s) {
  HdwSystem h = derive_hdw(s);
  KVectorField X = KVectorField::zero(s.k(), s.n(), s.cosymplectic());
  for (int a = 0; a < s.k(); ++a) {
    if (X.has_base) X.base[a][a] = Expr(1.0);
    X.config[a] = h.velocity[a];
  }
  X.fiber[0][0] = h.trace;
  return X;
}

namespace {

std::vector<std::vector<Compiled>> compile_table(const SystemDef& s, const std::vector<std::vector<Expr>>& t) {
  std::vector<std::vector<Compiled>> out;
  for (const auto& row : t) {
    std::vector<Compiled> r;
    for (const auto& e : row) r.push_back(detail::compile(s, e));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

double integrability_defect(const KVectorField& X, const SystemDef& s,
                            const std::vector<std::vector<double>>& pts) {
  const auto coords = s.coordinates();
  const std::size_t d = coords.size();
  std::vector<std::vector<Compiled>> comp, jac;  // comp[a][c], jac[a][c*d + e] = d_e X_a^c
  for (int a = 0; a < X.k; ++a) {
    auto cs = X.components(a);
    std::vector<Compiled> cr, jr;
    for (const auto& c : cs) {
      cr.push_back(detail::compile(s, c));
      for (const auto& v : coords) jr.push_back(detail::compile(s, diff(c, v)));
    }
    comp.push_back(std::move(cr));
    jac.push_back(std::move(jr));
  }
  double worst = 0.0;
  std::vector<double> ca(d), cb(d);
  for (const auto& p : pts) {
    try {
      for (int a = 0; a < X.k; ++a) {
        for (int b = a + 1; b < X.k; ++b) {
          for (std::size_t c = 0; c < d; ++c) {
            ca[c] = comp[a][c](p);
            cb[c] = comp[b][c](p);
          }
          double norm2 = 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            double v = 0.0;
            for (std::size_t e = 0; e < d; ++e) v += ca[e] * jac[b][c * d + e](p) - cb[e] * jac[a][c * d + e](p);
            norm2 += v * v;
          }
          worst = std::max(worst, std::sqrt(norm2));
        }
      }
    } catch (const DomainError&) {
    }
  }
  return worst;
}

SolutionReport check_solution(const KVectorField& X, const SystemDef& s, const SampleBox* box, double tol,
                              int samples) {
  validate_field(X, s);
  HdwSystem h = derive_hdw(s);
  auto vel = compile_table(s, h.velocity);
  std::vector<Compiled> tr;
  for (const auto& e : h.trace) tr.push_back(detail::compile(s, e));
  auto cfg = compile_table(s, X.config);
  std::vector<std::vector<Compiled>> base;
  if (X.has_base) base = compile_table(s, X.base);
  std::vector<std::vector<std::vector<Compiled>>> fib;
  for (const auto& fa : X.fiber) fib.push_back(compile_table(s, fa));

  const int k = s.k(), n = s.n();
  auto pts = detail::sample_slots(s, box, samples);
  SolutionReport r;
  for (const auto& p : pts) {
    try {
      double sol = 0.0, ker = 0.0;
      for (int a = 0; a < k; ++a) {
        for (int i = 0; i < n; ++i) {
          double xi = cfg[a][i](p);
          sol = std::max(sol, std::fabs(xi - vel[a][i](p)));
          ker = std::max(ker, std::fabs(xi));
        }
        if (X.has_base) {
          for (int b = 0; b < k; ++b) {
            double xb = base[a][b](p);
            sol = std::max(sol, std::fabs(xb - (a == b ? 1.0 : 0.0)));
            ker = std::max(ker, std::fabs(xb));
          }
        }
      }
      for (int i = 0; i < n; ++i) {
        double t = 0.0;
        for (int b = 0; b < k; ++b) t += fib[b][b][i](p);
        sol = std::max(sol, std::fabs(t - tr[i](p)));
        ker = std::max(ker, std::fabs(t));
      }
      r.max_defect = std::max(r.max_defect, sol);
      r.kernel_defect = std::max(r.kernel_defect, ker);
      ++r.samples;
    } catch (const DomainError&) {
    }
  }
  r.is_solution = r.samples > 0 && r.max_defect <= tol;
  r.kernel_member = r.samples > 0 && r.kernel_defect <= tol;
  r.integrability_defect = integrability_defect(X, s, pts);
  return r;
}

}  // namespace kfield
