#include "kfield/hamjac.hpp"

#include <cmath>
#include <map>

#include "internal.hpp"

namespace kfield {

namespace {

void check_shape(const SystemDef& s, const ClosedSectionSpec& g) {
  if (s.kind != Kind::Hamiltonian) throw FormalismError("Hamilton-Jacobi needs a hamiltonian system");
  const auto k = static_cast<std::size_t>(s.k()), n = static_cast<std::size_t>(s.n());
  if (g.gamma.size() != k) throw ShapeMismatch("gamma needs " + std::to_string(k) + " rows");
  for (const auto& row : g.gamma)
    if (row.size() != n) throw ShapeMismatch("each gamma row needs " + std::to_string(n) + " entries");
  if (g.W && g.W->size() != k) throw ShapeMismatch("W needs " + std::to_string(k) + " entries");

  // gamma may only use x (cosymplectic), q and parameters
  std::vector<std::string> fibre;
  for (int a = 0; a < s.k(); ++a)
    for (int i = 0; i < s.n(); ++i) fibre.push_back(s.fiber(a, i));
  if (!s.cosymplectic()) fibre.insert(fibre.end(), s.frame.x.begin(), s.frame.x.end());
  for (const auto& row : g.gamma)
    for (const auto& e : row)
      if (depends_on_any(e, fibre)) throw ShapeMismatch("gamma depends on a coordinate outside its base");
}

std::map<std::string, Expr> p_to_gamma(const SystemDef& s, const ClosedSectionSpec& g) {
  std::map<std::string, Expr> m;
  for (int a = 0; a < s.k(); ++a)
    for (int i = 0; i < s.n(); ++i) m[s.frame.p[a][i]] = g.gamma[a][i];
  return m;
}

// Slots at (x, q) with all momenta zero.
std::vector<std::vector<double>> base_points(const SystemDef& s, const SampleBox* box, int count) {
  const int d = s.offset_fiber();
  SampleBox b = box ? *box : SampleBox::cube(d);
  if (b.dim() != d) throw DimensionMismatch("hj sample box must cover (x, q)");
  std::vector<std::vector<double>> out;
  for (auto p : halton_points(b, count)) {
    p.resize(static_cast<std::size_t>(s.dim()), 0.0);
    out.push_back(s.point(p));
  }
  return out;
}

}  // namespace

ClosedSectionSpec ClosedSectionSpec::from_potentials(const SystemDef& s, std::vector<Expr> W) {
  if (W.size() != static_cast<std::size_t>(s.k())) throw ShapeMismatch("W needs one entry per axis");
  ClosedSectionSpec g;
  g.gamma.assign(W.size(), {});
  for (int a = 0; a < s.k(); ++a)
    for (int i = 0; i < s.n(); ++i) g.gamma[a].push_back(simplify(diff(W[a], s.frame.q[i])));
  g.W = std::move(W);
  return g;
}

HjDefect hj_defect(const SystemDef& s, const ClosedSectionSpec& g, const SampleBox* box, int samples) {
  check_shape(s, g);
  const int k = s.k(), n = s.n();
  const Expr Hg = substitute(s.expression, p_to_gamma(s, g));

  std::vector<Compiled> closed, hj, hjw, wgrad;
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        closed.push_back(detail::compile(s, diff(g.gamma[a][i], s.frame.q[j]) - diff(g.gamma[a][j], s.frame.q[i])));
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> t{diff(Hg, s.frame.q[i])};
    if (s.cosymplectic())
      for (int a = 0; a < k; ++a) t.push_back(diff(g.gamma[a][i], s.frame.x[a]));
    hj.push_back(detail::compile(s, sum(t)));
  }
  if (g.W) {
    std::map<std::string, Expr> pw;
    std::vector<Expr> form;
    for (int a = 0; a < k; ++a) {
      for (int i = 0; i < n; ++i) {
        Expr dw = diff((*g.W)[a], s.frame.q[i]);
        pw[s.frame.p[a][i]] = dw;
        wgrad.push_back(detail::compile(s, dw - g.gamma[a][i]));
      }
      if (s.cosymplectic()) form.push_back(diff((*g.W)[a], s.frame.x[a]));
    }
    form.push_back(substitute(s.expression, pw));
    Expr total = sum(form);
    for (int i = 0; i < n; ++i) hjw.push_back(detail::compile(s, diff(total, s.frame.q[i])));
  }

  HjDefect r;
  for (const auto& p : base_points(s, box, samples)) {
    try {
      double c = 0.0, h = 0.0, hw = 0.0, wg = 0.0;
      for (const auto& f : closed) c = std::max(c, std::fabs(f(p)));
      for (const auto& f : hj) h = std::max(h, std::fabs(f(p)));
      for (const auto& f : hjw) hw = std::max(hw, std::fabs(f(p)));
      for (const auto& f : wgrad) wg = std::max(wg, std::fabs(f(p)));
      if (wg > 1e-12) throw ShapeMismatch("gamma is not the q-gradient of W");
      r.closedness = std::max(r.closedness, c);
      r.hj = std::max(r.hj, h);
      r.hj_potential = std::max(r.hj_potential, hw);
      ++r.samples;
    } catch (const DomainError&) {
    }
  }
  return r;
}

ProjectedField project_field(const SystemDef& s, const ClosedSectionSpec& g) {
  check_shape(s, g);
  ProjectedField Z{s.k(), s.n(), s.cosymplectic(), {}, s};
  auto m = p_to_gamma(s, g);
  Z.comps.assign(static_cast<std::size_t>(s.k()), {});
  for (int a = 0; a < s.k(); ++a)
    for (int i = 0; i < s.n(); ++i)
      Z.comps[a].push_back(simplify(substitute(diff(s.expression, s.frame.p[a][i]), m)));
  return Z;
}

namespace {

// RK4 along axis a, from x (base point) and q over length h in `steps` substeps.
class Flow {
 public:
  explicit Flow(const ProjectedField& Z) : Z_(Z), slots_(Z.source.point(std::vector<double>(
                                                         static_cast<std::size_t>(Z.source.dim()), 0.0))) {
    for (const auto& row : Z.comps) {
      comps_.emplace_back();
      for (const auto& e : row) comps_.back().push_back(detail::compile(Z.source, e));
    }
  }

  std::vector<double> step(int a, std::vector<double> x, std::vector<double> q, double h, int steps) {
    const std::size_t n = q.size();
    const double dt = h / steps;
    std::vector<double> k1(n), k2(n), k3(n), k4(n), t(n);
    for (int s = 0; s < steps; ++s) {
      const double x0 = x[static_cast<std::size_t>(a)];
      rhs(a, x, q, k1);
      for (std::size_t i = 0; i < n; ++i) t[i] = q[i] + 0.5 * dt * k1[i];
      x[static_cast<std::size_t>(a)] = x0 + 0.5 * dt;
      rhs(a, x, t, k2);
      for (std::size_t i = 0; i < n; ++i) t[i] = q[i] + 0.5 * dt * k2[i];
      rhs(a, x, t, k3);
      for (std::size_t i = 0; i < n; ++i) t[i] = q[i] + dt * k3[i];
      x[static_cast<std::size_t>(a)] = x0 + dt;
      rhs(a, x, t, k4);
      for (std::size_t i = 0; i < n; ++i) {
        q[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!std::isfinite(q[i])) throw StepFailure("non-finite state while integrating along x" + std::to_string(a + 1));
      }
    }
    return q;
  }

 private:
  void rhs(int a, const std::vector<double>& x, const std::vector<double>& q, std::vector<double>& out) {
    const SystemDef& s = Z_.source;
    if (s.cosymplectic())
      for (int b = 0; b < s.k(); ++b) slots_[static_cast<std::size_t>(b)] = x[static_cast<std::size_t>(b)];
    for (std::size_t i = 0; i < q.size(); ++i) slots_[static_cast<std::size_t>(s.offset_q()) + i] = q[i];
    try {
      for (std::size_t i = 0; i < q.size(); ++i) out[i] = comps_[static_cast<std::size_t>(a)][i](slots_);
    } catch (const DomainError& e) {
      throw StepFailure(std::string("projected field undefined: ") + e.what());
    }
  }

  const ProjectedField& Z_;
  std::vector<double> slots_;
  std::vector<std::vector<Compiled>> comps_;
};

}  // namespace

ProjectedSection integrate_projected(const ProjectedField& Z, std::span<const double> q0, const Grid& g, int steps) {
  g.check();
  if (g.k() != Z.k) throw DimensionMismatch("grid rank differs from k");
  if (q0.size() != static_cast<std::size_t>(Z.n)) throw DimensionMismatch("q0 needs n values");
  if (steps < 1) throw PreconditionError("steps must be >= 1");
  const int k = Z.k, n = Z.n;
  const std::size_t N = g.size();
  Flow flow(Z);

  std::vector<std::vector<double>> val(N);
  val[0].assign(q0.begin(), q0.end());
  for (int a = 0; a < k; ++a) {
    const std::size_t st = g.stride(a);
    for (std::size_t f = 0; f < N; ++f) {
      auto idx = g.index(f);
      bool on_line = idx[static_cast<std::size_t>(a)] > 0;
      for (int b = a + 1; b < k && on_line; ++b) on_line = idx[static_cast<std::size_t>(b)] == 0;
      if (!on_line) continue;
      val[f] = flow.step(a, g.point(f - st), val[f - st], g.axes[static_cast<std::size_t>(a)].h(), steps);
    }
  }

  ProjectedSection out;
  out.section.grid = g;
  out.section.n = n;
  out.section.psi.assign(static_cast<std::size_t>(n), Field(N));
  for (std::size_t f = 0; f < N; ++f)
    for (int i = 0; i < n; ++i) out.section.psi[static_cast<std::size_t>(i)][f] = val[f][static_cast<std::size_t>(i)];

  // one-cell swap of the last two flows
  if (k >= 2) {
    const int a = k - 2, b = k - 1;
    const std::size_t sa = g.stride(a), sb = g.stride(b);
    const double ha = g.axes[static_cast<std::size_t>(a)].h(), hb = g.axes[static_cast<std::size_t>(b)].h();
    for (std::size_t f = 0; f < N; ++f) {
      if (!g.interior(f)) continue;
      std::size_t c = f - sa - sb;
      auto x = g.point(c);
      auto xa = g.point(c + sa), xb = g.point(c + sb);
      auto ab = flow.step(b, xa, flow.step(a, x, val[c], ha, steps), hb, steps);
      auto ba = flow.step(a, xb, flow.step(b, x, val[c], hb, steps), ha, steps);
      for (int i = 0; i < n; ++i)
        out.commutativity_defect = std::max(out.commutativity_defect, std::fabs(ab[static_cast<std::size_t>(i)] - ba[static_cast<std::size_t>(i)]));
    }
  }
  return out;
}

ResidualReport verify_lift(const SystemDef& s, const ClosedSectionSpec& g, const GridSection& sigma) {
  check_shape(s, g);
  const int k = s.k(), n = s.n();
  if (sigma.n != n || sigma.grid.k() != k) throw DimensionMismatch("section shape differs from the system");
  GridSection lift = sigma;
  lift.velocities.clear();
  const std::size_t N = sigma.grid.size();
  lift.momenta.assign(static_cast<std::size_t>(k), std::vector<Field>(static_cast<std::size_t>(n), Field(N)));
  std::vector<Compiled> gam;
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i) gam.push_back(detail::compile(s, g.gamma[a][i]));
  std::vector<double> slots = s.point(std::vector<double>(static_cast<std::size_t>(s.dim()), 0.0));
  for (std::size_t f = 0; f < N; ++f) {
    if (s.cosymplectic()) {
      auto x = sigma.grid.point(f);
      std::copy(x.begin(), x.end(), slots.begin());
    }
    for (int i = 0; i < n; ++i) slots[static_cast<std::size_t>(s.offset_q() + i)] = sigma.psi[static_cast<std::size_t>(i)][f];
    for (int a = 0; a < k; ++a)
      for (int i = 0; i < n; ++i) lift.momenta[a][i][f] = gam[static_cast<std::size_t>(a * n + i)](slots);
  }
  return residual_on_grid(lift, s);
}

}  // namespace kfield
