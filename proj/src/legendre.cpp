#include "kfield/legendre.hpp"

#include <cmath>

#include "internal.hpp"
#include "kfield/structures.hpp"

namespace kfield {

LegendreMap legendre_forward(const SystemDef& s) {
  LegendreMap m{s, derive_lagrangian(s), {}};
  m.momenta = m.derived.theta;
  return m;
}

std::vector<double> legendre_invert(const LegendreMap& m, std::span<const double> q, std::span<const double> p,
                                    std::span<const double> guess, std::span<const double> x) {
  const SystemDef& s = m.source;
  const int k = s.k(), n = s.n(), kn = k * n;
  if (q.size() != static_cast<std::size_t>(n) || p.size() != static_cast<std::size_t>(kn) ||
      guess.size() != static_cast<std::size_t>(kn) ||
      x.size() != static_cast<std::size_t>(s.cosymplectic() ? k : 0))
    throw DimensionMismatch("legendre_invert: argument sizes do not match the frame");

  std::vector<double> coords(x.begin(), x.end());
  coords.insert(coords.end(), q.begin(), q.end());
  coords.insert(coords.end(), guess.begin(), guess.end());
  std::vector<double> slots = s.point(coords);
  const int off = s.offset_fiber();

  std::vector<Compiled> th;
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i) th.push_back(detail::compile(s, m.momenta[a][i]));
  std::vector<Compiled> W;
  for (const auto& row : m.derived.hessian)
    for (const auto& e : row) W.push_back(detail::compile(s, e));

  auto residual = [&](const std::vector<double>& sl, Eigen::VectorXd& r) {
    for (int c = 0; c < kn; ++c) r(c) = p[static_cast<std::size_t>(c)] - th[static_cast<std::size_t>(c)](sl);
    return r.lpNorm<Eigen::Infinity>();
  };
  auto hessian = [&](const std::vector<double>& sl) {
    Eigen::MatrixXd H(kn, kn);
    for (int r = 0; r < kn; ++r)
      for (int c = 0; c < kn; ++c) H(r, c) = W[static_cast<std::size_t>(r * kn + c)](sl);
    if (!regularity_of(H).regular) throw SingularHessian("velocity Hessian is singular at a Newton iterate");
    return H;
  };

  Eigen::VectorXd r(kn), rn(kn);
  double norm = residual(slots, r);
  for (int it = 0;; ++it) {
    Eigen::MatrixXd H = hessian(slots);
    if (norm <= 1e-10) break;
    if (it >= 50) throw NoConvergence("legendre_invert: no convergence in 50 iterations");
    Eigen::VectorXd step = H.partialPivLu().solve(r);
    double t = 1.0;
    bool accepted = false;
    std::vector<double> trial = slots;
    for (int h = 0; h < 40 && !accepted; ++h, t *= 0.5) {
      for (int c = 0; c < kn; ++c) trial[static_cast<std::size_t>(off + c)] = slots[static_cast<std::size_t>(off + c)] + t * step(c);
      try {
        double nn = residual(trial, rn);
        if (std::isfinite(nn) && nn < norm) {
          accepted = true;
          norm = nn;
          r = rn;
          slots = trial;
        }
      } catch (const DomainError&) {
      }
    }
    if (!accepted) throw NoConvergence("legendre_invert: damping failed to reduce the residual");
  }
  return std::vector<double>(slots.begin() + off, slots.begin() + off + kn);
}

namespace {

SystemDef hamiltonian_shell(const SystemDef& s, Expr h) {
  SystemDef out = s;
  out.name = s.name + "_induced";
  out.kind = Kind::Hamiltonian;
  out.expression = simplify(h);
  return out;
}

}  // namespace

std::optional<SystemDef> induced_system(const SystemDef& s) {
  LagrangianDerived d = derive_lagrangian(s);
  const auto coords = s.coordinates();
  for (const auto& row : d.hessian)
    for (const auto& e : row)
      if (depends_on_any(e, coords)) return std::nullopt;

  const int k = s.k(), n = s.n(), kn = k * n;
  const std::vector<double> at = s.point(std::vector<double>(static_cast<std::size_t>(s.dim()), 0.0));
  const auto slots = s.slots();
  auto num = [&](const Expr& e) { return Compiled(e, slots)(at); };

  // theta = W v + b with b = theta(v = 0)
  std::map<std::string, Expr> zero_v;
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i) zero_v[s.frame.vel(i, a)] = Expr(0.0);
  std::vector<std::vector<Expr>> M = d.hessian;
  std::vector<Expr> rhs;
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i) rhs.push_back(Expr::var(s.frame.p[a][i]) - substitute(d.theta[a][i], zero_v));

  // Gauss-Jordan on expressions, pivots chosen by value at the parameter defaults
  double scale = 0.0;
  for (const auto& row : M)
    for (const auto& e : row) scale = std::max(scale, std::fabs(num(e)));
  if (scale == 0.0) return std::nullopt;
  std::vector<int> perm(static_cast<std::size_t>(kn));
  for (int c = 0; c < kn; ++c) {
    int piv = -1;
    double best = 1e-12 * scale;
    for (int r = c; r < kn; ++r) {
      double v = std::fabs(num(M[r][c]));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (piv < 0) return std::nullopt;  // singular Lagrangian
    std::swap(M[c], M[piv]);
    std::swap(rhs[c], rhs[piv]);
    for (int r = 0; r < kn; ++r) {
      if (r == c || M[r][c].is_const(0.0)) continue;
      Expr f = M[r][c] / M[c][c];
      for (int j = c; j < kn; ++j) M[r][j] = M[r][j] - f * M[c][j];
      rhs[r] = rhs[r] - f * rhs[c];
    }
  }
  std::map<std::string, Expr> v_of_p;
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i) {
      int c = a * n + i;
      v_of_p[s.frame.vel(i, a)] = rhs[c] / M[c][c];
    }
  return hamiltonian_shell(s, substitute(d.energy, v_of_p));
}

InducedHamiltonian::InducedHamiltonian(const SystemDef& s) : map_(legendre_forward(s)), symbolic_(induced_system(s)) {
  energy_ = detail::compile(s, map_.derived.energy);
}

double InducedHamiltonian::operator()(std::span<const double> coords) const {
  const SystemDef& s = map_.source;
  if (coords.size() != static_cast<std::size_t>(s.dim())) throw DimensionMismatch("induced H: wrong point size");
  if (symbolic_) return detail::compile(*symbolic_, symbolic_->expression)(symbolic_->point(coords));
  const int k = s.k(), n = s.n();
  std::size_t xo = static_cast<std::size_t>(s.offset_q()), qo = xo + static_cast<std::size_t>(n);
  auto x = coords.subspan(0, xo);
  auto q = coords.subspan(xo, static_cast<std::size_t>(n));
  auto p = coords.subspan(qo, static_cast<std::size_t>(k * n));
  std::vector<double> v = legendre_invert(map_, q, p, p, x);
  std::vector<double> lc(coords.begin(), coords.begin() + static_cast<std::ptrdiff_t>(qo));
  lc.insert(lc.end(), v.begin(), v.end());
  return energy_(s.point(lc));
}

InducedHamiltonian induced_hamiltonian(const SystemDef& s) { return InducedHamiltonian(s); }

double pullback_check(const SystemDef& s, std::span<const double> coords) {
  LagrangianDerived d = derive_lagrangian(s);
  const int k = s.k(), n = s.n(), dim = s.dim();
  std::vector<double> slots = s.point(coords);
  const int qo = s.offset_q(), po = s.offset_fiber();

  // Jacobian of FL: (x, q) rows are the identity, p rows the gradients of theta
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(dim, dim);
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i) J.row(po + a * n + i) = gradient_at(s, d.theta[a][i], slots).transpose();

  CanonicalStructure can = canonical_forms(k, n, s.cosymplectic());
  double worst = 0.0;
  for (int a = 0; a < k; ++a) {
    Eigen::MatrixXd pulled = J.transpose() * can.omegas[static_cast<std::size_t>(a)] * J;
    worst = std::max(worst, (pulled - omega_L(s, d, a, slots)).cwiseAbs().maxCoeff());

    // theta^a = p^a_i dq^i pulled back: p^a_i(FL) * d(q^i o FL)
    Eigen::VectorXd pulled_theta = Eigen::VectorXd::Zero(dim), theta_L = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < n; ++i) {
      double pa = detail::compile(s, d.theta[a][i])(slots);
      pulled_theta += pa * J.row(qo + i).transpose();
      theta_L(qo + i) = pa;
    }
    worst = std::max(worst, (pulled_theta - theta_L).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace kfield
