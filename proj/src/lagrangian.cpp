#include "kfield/lagrangian.hpp"

#include <algorithm>
#include <cmath>

#include "internal.hpp"

namespace kfield {

LagrangianDerived derive_lagrangian(const SystemDef& s) {
  if (s.kind != Kind::Lagrangian) throw FormalismError("expected a lagrangian system");
  LagrangianDerived d;
  d.k = s.k();
  d.n = s.n();
  const int k = d.k, n = d.n;
  d.theta.assign(static_cast<std::size_t>(k), std::vector<Expr>(static_cast<std::size_t>(n)));
  std::vector<Expr> vtheta;
  for (int a = 0; a < k; ++a) {
    for (int i = 0; i < n; ++i) {
      d.theta[a][i] = diff(s.expression, s.frame.vel(i, a));
      vtheta.push_back(Expr::var(s.frame.vel(i, a)) * d.theta[a][i]);
    }
  }
  d.energy = sum(vtheta) - s.expression;
  d.hessian.assign(static_cast<std::size_t>(k * n), std::vector<Expr>(static_cast<std::size_t>(k * n)));
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i)
      for (int b = 0; b < k; ++b)
        for (int j = 0; j < n; ++j) d.hessian[a * n + i][b * n + j] = diff(d.theta[a][i], s.frame.vel(j, b));
  return d;
}

Eigen::MatrixXd hessian_at(const SystemDef& s, const LagrangianDerived& d, std::span<const double> slots) {
  const auto m = static_cast<Eigen::Index>(d.hessian.size());
  Eigen::MatrixXd W(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) W(r, c) = detail::compile(s, d.hessian[r][c])(slots);
  return W;
}

Regularity regularity_of(const Eigen::MatrixXd& W) {
  Regularity r;
  if (W.size() == 0) return r;
  double mx = W.cwiseAbs().maxCoeff();
  r.det = W.partialPivLu().determinant();
  if (mx == 0.0 || !std::isfinite(r.det)) {
    r.regular = false;
    return r;
  }
  r.regular = std::fabs(r.det) > 1e-10 * std::pow(mx, static_cast<double>(W.rows()));
  return r;
}

namespace {

std::vector<double> bind_slots(const SystemDef& s, const Assignment& at) {
  std::vector<double> out;
  for (const auto& nm : s.slots()) {
    auto it = at.find(nm);
    if (it != at.end()) out.push_back(it->second);
    else if (s.params.count(nm)) out.push_back(s.params.at(nm));
    else throw UnboundVariable(nm);
  }
  return out;
}

}  // namespace

Regularity regularity(const LagrangianDerived& d, const SystemDef& s, const Assignment& at) {
  auto slots = bind_slots(s, at);
  return regularity_of(hessian_at(s, d, slots));
}

// ---- EL residual ----------------------------------------------------------

ElResidual::ElResidual(const SystemDef& s) : s_(s) {
  LagrangianDerived d = derive_lagrangian(s);
  const int k = s.k(), n = s.n();
  const auto slots = s.slots();
  auto slot_of = [&](const std::string& nm) {
    return static_cast<int>(std::find(slots.begin(), slots.end(), nm) - slots.begin());
  };
  auto make = [&](int idx, const Expr& e) {
    Term t{idx, Compiled(e, slots), !depends_on_any(e, s.coordinates()), 0.0};
    if (t.is_const) t.val = t.c(s.point(std::vector<double>(static_cast<std::size_t>(s.dim()), 0.0)));
    return t;
  };
  vel_.resize(static_cast<std::size_t>(n));
  acc_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> rest;
    for (int a = 0; a < k; ++a) {
      const Expr& th = d.theta[a][i];
      for (int j = 0; j < n; ++j) {
        Expr c = diff(th, s.frame.q[j]);
        if (!c.is_const(0.0)) vel_[i].push_back(make(slot_of(s.frame.vel(j, a)), c));
      }
      if (s.cosymplectic()) rest.push_back(diff(th, s.frame.x[a]));
      for (int b = 0; b < k; ++b)
        for (int j = 0; j < n; ++j) {
          const Expr& w = d.hessian[a * n + i][b * n + j];
          if (!w.is_const(0.0)) acc_[i].push_back(make((a * k + b) * n + j, w));
        }
    }
    rest.push_back(-diff(s.expression, s.frame.q[i]));
    rest_.emplace_back(sum(rest), slots);
  }
}

ElEquations el_equations(const SystemDef& s) {
  LagrangianDerived d = derive_lagrangian(s);
  const int k = s.k(), n = s.n();
  ElEquations out;
  out.second.assign(static_cast<std::size_t>(n),
                    std::vector<std::vector<std::string>>(static_cast<std::size_t>(k),
                                                          std::vector<std::string>(static_cast<std::size_t>(k))));
  const std::string sep = k > 9 ? "_" : "";
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        out.second[i][a][b] = s.frame.q[i] + "_" + std::to_string(std::min(a, b) + 1) + sep +
                              std::to_string(std::max(a, b) + 1);
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> terms;
    for (int a = 0; a < k; ++a) {
      const Expr& th = d.theta[a][i];
      if (s.cosymplectic()) terms.push_back(diff(th, s.frame.x[a]));
      for (int j = 0; j < n; ++j) {
        terms.push_back(diff(th, s.frame.q[j]) * Expr::var(s.frame.vel(j, a)));
        for (int b = 0; b < k; ++b) terms.push_back(d.hessian[a * n + i][b * n + j] * Expr::var(out.second[j][a][b]));
      }
    }
    terms.push_back(-diff(s.expression, s.frame.q[i]));
    out.lhs.push_back(simplify(sum(terms)));
  }
  return out;
}

void ElResidual::operator()(const double* slots, const double* acc, double* out) const {
  for (std::size_t i = 0; i < rest_.size(); ++i) {
    double r = rest_[i](slots);
    for (const auto& t : vel_[i]) r += t.at(slots) * slots[t.idx];
    for (const auto& t : acc_[i]) r += t.at(slots) * acc[t.idx];
    out[i] = r;
  }
}

double ElResidual::acc_coefficient(const double* slots, int i, int idx) const {
  double c = 0.0;
  for (const auto& t : acc_[static_cast<std::size_t>(i)])
    if (t.idx == idx) c += t.at(slots);
  return c;
}

SopdeReport check_sopde_el(const KVectorField& X, const SystemDef& s, const SampleBox* box, double tol,
                           int samples) {
  validate_field(X, s);
  ElResidual el(s);
  const int k = s.k(), n = s.n();
  const auto slots = s.slots();
  std::vector<Compiled> cfg, fib, base;
  std::vector<int> vslot;
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i) {
      cfg.push_back(detail::compile(s, X.config[a][i]));
      vslot.push_back(static_cast<int>(std::find(slots.begin(), slots.end(), s.frame.vel(i, a)) - slots.begin()));
    }
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      for (int j = 0; j < n; ++j) fib.push_back(detail::compile(s, X.fiber[a][b][j]));
      if (X.has_base) base.push_back(detail::compile(s, X.base[a][b]));
    }
  SopdeReport r;
  std::vector<double> acc(fib.size()), res(static_cast<std::size_t>(n));
  for (const auto& p : detail::sample_slots(s, box, samples)) {
    try {
      double sd = 0.0;
      for (std::size_t c = 0; c < cfg.size(); ++c) sd = std::max(sd, std::fabs(cfg[c](p) - p[vslot[c]]));
      for (int a = 0; a < k && X.has_base; ++a)
        for (int b = 0; b < k; ++b)
          sd = std::max(sd, std::fabs(base[a * k + b](p) - (a == b ? 1.0 : 0.0)));
      for (std::size_t c = 0; c < fib.size(); ++c) acc[c] = fib[c](p);
      el(p.data(), acc.data(), res.data());
      double ed = 0.0;
      for (double v : res) ed = std::max(ed, std::fabs(v));
      r.sopde_defect = std::max(r.sopde_defect, sd);
      r.el_defect = std::max(r.el_defect, ed);
      ++r.samples;
    } catch (const DomainError&) {
    }
  }
  r.is_sopde = r.samples > 0 && r.sopde_defect <= tol;
  return r;
}

Eigen::VectorXd gradient_at(const SystemDef& s, const Expr& e, std::span<const double> slots) {
  auto coords = s.coordinates();
  Eigen::VectorXd g(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t c = 0; c < coords.size(); ++c)
    g(static_cast<Eigen::Index>(c)) = detail::compile(s, diff(e, coords[c]))(slots);
  return g;
}

Eigen::MatrixXd omega_L(const SystemDef& s, const LagrangianDerived& d, int a, std::span<const double> slots) {
  const int dim = s.dim();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < s.n(); ++i) {
    Eigen::VectorXd g = gradient_at(s, d.theta[a][i], slots);
    Eigen::VectorXd e = Eigen::VectorXd::Unit(dim, s.offset_q() + i);
    A += e * g.transpose() - g * e.transpose();
  }
  return A;
}

}  // namespace kfield
