#include "kfield/fields.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "kfield/lagrangian.hpp"
#include "kfield/simd.hpp"

namespace kfield {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

// ---- grid -------------------------------------------------------------------

Grid Grid::parse(const std::string& spec) {
  Grid g;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    Axis a;
    char c1 = 0, c2 = 0;
    std::stringstream is(item);
    if (!(is >> a.min >> c1 >> a.max >> c2 >> a.count) || c1 != ':' || c2 != ':' || !(is >> std::ws).eof())
      throw SchemaError("bad grid axis '" + item + "', expected min:max:count");
    g.axes.push_back(a);
  }
  if (g.axes.empty()) throw SchemaError("empty grid specification");
  g.check();
  return g;
}

std::size_t Grid::size() const {
  std::size_t s = 1;
  for (const auto& a : axes) s *= static_cast<std::size_t>(a.count);
  return s;
}

std::size_t Grid::stride(int axis) const {
  std::size_t s = 1;
  for (int a = k() - 1; a > axis; --a) s *= static_cast<std::size_t>(axes[a].count);
  return s;
}

std::vector<int> Grid::index(std::size_t flat) const {
  std::vector<int> idx(axes.size());
  for (int a = k() - 1; a >= 0; --a) {
    auto c = static_cast<std::size_t>(axes[a].count);
    idx[a] = static_cast<int>(flat % c);
    flat /= c;
  }
  return idx;
}

std::vector<double> Grid::point(std::size_t flat) const {
  auto idx = index(flat);
  std::vector<double> x(axes.size());
  for (std::size_t a = 0; a < axes.size(); ++a) x[a] = axes[a].at(idx[a]);
  return x;
}

bool Grid::interior(std::size_t flat) const {
  for (int a = k() - 1; a >= 0; --a) {
    auto c = static_cast<std::size_t>(axes[a].count);
    auto i = flat % c;
    if (i == 0 || i + 1 == c) return false;
    flat /= c;
  }
  return true;
}

void Grid::check() const {
  for (const auto& a : axes) {
    if (a.count < 3) throw GridTooSmall("grid axes need at least 3 points");
    if (!(a.max > a.min) || !std::isfinite(a.min) || !std::isfinite(a.max))
      throw SchemaError("grid axis needs finite min < max");
  }
}

GridSection sample_section(const Grid& g, int n, const PointFn& psi, const PointFn& momenta,
                           const PointFn& velocities) {
  g.check();
  const int k = g.k();
  const std::size_t N = g.size();
  GridSection sec{g, n, std::vector<Field>(static_cast<std::size_t>(n), Field(N)), {}, {}};
  if (momenta) sec.momenta.assign(k, std::vector<Field>(n, Field(N)));
  if (velocities) sec.velocities.assign(n, std::vector<Field>(k, Field(N)));
  std::vector<double> buf(static_cast<std::size_t>(k * n));
  for (std::size_t f = 0; f < N; ++f) {
    auto x = g.point(f);
    psi(x, std::span<double>(buf.data(), static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) sec.psi[i][f] = buf[i];
    if (momenta) {
      momenta(x, buf);
      for (int a = 0; a < k; ++a)
        for (int i = 0; i < n; ++i) sec.momenta[a][i][f] = buf[a * n + i];
    }
    if (velocities) {
      velocities(x, buf);
      for (int a = 0; a < k; ++a)
        for (int i = 0; i < n; ++i) sec.velocities[i][a][f] = buf[a * n + i];
    }
  }
  return sec;
}

// ---- finite differences -------------------------------------------------------

namespace {

double c1(const Axis& a) { return 1.0 / (2.0 * a.h()); }
double c2(const Axis& a) { return 1.0 / (a.h() * a.h()); }

// Central difference along one axis. Entries at either end of the axis are
// NaN, or wrapped when the axis is periodic (last point duplicates the first).
Field line_diff(const Grid& g, const Field& f, int axis, int order, bool periodic) {
  const auto& ax = g.axes[axis];
  if (ax.count < 3) throw GridTooSmall("central differences need 3 points per axis");
  const std::size_t N = f.size(), s = g.stride(axis), c = static_cast<std::size_t>(ax.count);
  Field out(N, kNaN);
  const auto& K = simd::kernels();
  if (N > 2 * s) {
    if (order == 1) K.diff1(f.data(), f.data() + 2 * s, c1(ax), out.data() + s, N - 2 * s);
    else K.diff2(f.data(), f.data() + s, f.data() + 2 * s, c2(ax), out.data() + s, N - 2 * s);
  }
  // fix the ends of every line along this axis
  for (std::size_t base = 0; base < N; base += s * c)
    for (std::size_t off = 0; off < s; ++off) {
      std::size_t first = base + off, last = first + (c - 1) * s;
      if (!periodic) {
        out[first] = out[last] = kNaN;
        continue;
      }
      double m = f[last - s], p = f[first + s], mid = f[first];
      double v = order == 1 ? (p - m) * c1(ax) : ((m - 2.0 * mid) + p) * c2(ax);
      out[first] = out[last] = v;
    }
  return out;
}

struct Derivs {
  std::vector<Field> d1;  // [a*n+i]
  std::vector<Field> d2;  // [(a*k+b)*n+i]
};

// All first and second partials; axes with skip[a] get zero entries.
Derivs all_derivs(const Grid& g, const std::vector<Field>& psi, const std::vector<bool>& periodic,
                  const std::vector<bool>& skip) {
  const int k = g.k(), n = static_cast<int>(psi.size());
  const std::size_t N = g.size();
  Derivs d;
  d.d1.assign(static_cast<std::size_t>(k * n), Field(N, 0.0));
  d.d2.assign(static_cast<std::size_t>(k * k * n), Field(N, 0.0));
  for (int a = 0; a < k; ++a) {
    if (skip[a]) continue;
    for (int i = 0; i < n; ++i) {
      d.d1[a * n + i] = line_diff(g, psi[i], a, 1, periodic[a]);
      d.d2[(a * k + a) * n + i] = line_diff(g, psi[i], a, 2, periodic[a]);
    }
  }
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      if (skip[a] || skip[b]) continue;
      for (int i = 0; i < n; ++i) {
        Field m = line_diff(g, d.d1[a * n + i], b, 1, periodic[b]);
        d.d2[(a * k + b) * n + i] = m;
        d.d2[(b * k + a) * n + i] = std::move(m);
      }
    }
  return d;
}

}  // namespace

Field fd_partial(const Grid& g, const Field& f, int axis, int order) {
  if (axis < 0 || axis >= g.k()) throw DimensionMismatch("axis out of range");
  if (order != 1 && order != 2) throw SchemaError("derivative order must be 1 or 2");
  if (f.size() != g.size()) throw DimensionMismatch("field size differs from the grid");
  return line_diff(g, f, axis, order, false);
}

Field fd_partial(const GridSection& sec, int field, int axis, int order) {
  if (field < 0 || field >= sec.n) throw DimensionMismatch("field index out of range");
  return fd_partial(sec.grid, sec.psi[field], axis, order);
}

Field fd_mixed(const Grid& g, const Field& f, int a, int b) {
  return fd_partial(g, fd_partial(g, f, a, 1), b, 1);
}

// ---- residuals ----------------------------------------------------------------

double ResidualReport::max() const {
  double m = 0.0;
  for (const auto& f : families) {
    if (std::isnan(f.max)) return f.max;
    m = std::max(m, f.max);
  }
  return m;
}

namespace {

struct Accum {
  ResidualFamily fam;
  double sq = 0.0;
  std::size_t count = 0;
  void add(double r) {
    fam.max = std::max(fam.max, std::fabs(r));
    if (std::isnan(r)) fam.max = r;
    sq += r * r;
    ++count;
  }
  ResidualFamily done() {
    fam.l2 = count ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
    return fam;
  }
};

void check_section(const GridSection& sec, const SystemDef& s) {
  sec.grid.check();
  if (sec.grid.k() != s.k() || sec.n != s.n() || sec.psi.size() != static_cast<std::size_t>(s.n()))
    throw DimensionMismatch("section shape does not match the system frame");
  for (const auto& f : sec.psi)
    if (f.size() != sec.grid.size()) throw DimensionMismatch("field size differs from the grid");
}

// slots = (x,) q, fiber, params
void fill_slots(const SystemDef& s, const std::vector<double>& x, std::vector<double>& slots) {
  if (s.cosymplectic()) std::copy(x.begin(), x.end(), slots.begin());
}

}  // namespace

ResidualReport residual_on_grid(const GridSection& sec, const SystemDef& s) {
  check_section(sec, s);
  const Grid& g = sec.grid;
  const int k = s.k(), n = s.n();
  const std::size_t N = g.size();
  const int qo = s.offset_q(), fo = s.offset_fiber();
  std::vector<double> slots = s.point(std::vector<double>(static_cast<std::size_t>(s.dim()), 0.0));
  const std::vector<bool> none(static_cast<std::size_t>(k), false);
  ResidualReport rep;

  if (s.kind == Kind::Hamiltonian) {
    if (sec.momenta.size() != static_cast<std::size_t>(k)) throw MissingField("HDW residual needs momentum fields");
    const auto sl = s.slots();
    std::vector<Compiled> dHdp, dHdq;
    for (int a = 0; a < k; ++a)
      for (int i = 0; i < n; ++i) dHdp.emplace_back(diff(s.expression, s.frame.p[a][i]), sl);
    for (int i = 0; i < n; ++i) dHdq.emplace_back(diff(s.expression, s.frame.q[i]), sl);
    std::vector<Field> dpsi, dmom;  // [a*n+i]
    for (int a = 0; a < k; ++a)
      for (int i = 0; i < n; ++i) {
        dpsi.push_back(line_diff(g, sec.psi[i], a, 1, false));
        dmom.push_back(line_diff(g, sec.momenta[a][i], a, 1, false));
      }
    Accum vel{{"velocity", 0, 0}}, tr{{"trace", 0, 0}};
    for (std::size_t f = 0; f < N; ++f) {
      if (!g.interior(f)) continue;
      fill_slots(s, g.point(f), slots);
      for (int i = 0; i < n; ++i) slots[qo + i] = sec.psi[i][f];
      for (int a = 0; a < k; ++a)
        for (int i = 0; i < n; ++i) slots[fo + a * n + i] = sec.momenta[a][i][f];
      for (int c = 0; c < k * n; ++c) vel.add(dpsi[c][f] - dHdp[c](slots));
      for (int i = 0; i < n; ++i) {
        double t = 0.0;
        for (int a = 0; a < k; ++a) t += dmom[a * n + i][f];
        tr.add(t + dHdq[i](slots));
      }
    }
    rep.families = {vel.done(), tr.done()};
    return rep;
  }

  ElResidual el(s);
  Derivs d = all_derivs(g, sec.psi, none, none);
  Accum eq{{"euler_lagrange", 0, 0}}, pro{{"prolongation", 0, 0}};
  const bool has_v = sec.velocities.size() == static_cast<std::size_t>(n);
  std::vector<double> acc(static_cast<std::size_t>(k * k * n)), out(static_cast<std::size_t>(n));
  for (std::size_t f = 0; f < N; ++f) {
    if (!g.interior(f)) continue;
    fill_slots(s, g.point(f), slots);
    for (int i = 0; i < n; ++i) slots[qo + i] = sec.psi[i][f];
    for (int c = 0; c < k * n; ++c) slots[fo + c] = d.d1[c][f];
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] = d.d2[c][f];
    el(slots.data(), acc.data(), out.data());
    for (double r : out) eq.add(r);
    if (has_v)
      for (int a = 0; a < k; ++a)
        for (int i = 0; i < n; ++i) pro.add(sec.velocities[i][a][f] - d.d1[a * n + i][f]);
  }
  rep.families.push_back(eq.done());
  if (has_v) rep.families.push_back(pro.done());
  return rep;
}

// ---- leapfrog -----------------------------------------------------------------

namespace {

struct TimeForm {
  Eigen::MatrixXd Minv;        // inverse of the constant time block
  std::vector<double> speeds;  // per axis
};

TimeForm time_form(const SystemDef& s, int T) {
  if (s.kind != Kind::Lagrangian) throw FormalismError("hyperbolic extraction needs a lagrangian system");
  if (T < 0 || T >= s.k()) throw DimensionMismatch("time axis out of range");
  LagrangianDerived d = derive_lagrangian(s);
  const int k = s.k(), n = s.n();
  const auto coords = s.coordinates();
  const auto sl = s.slots();
  const std::vector<double> at = s.point(std::vector<double>(static_cast<std::size_t>(s.dim()), 0.0));
  auto need = [](bool ok) {
    if (!ok)
      throw PreconditionError(
          "system is not of the form W_tt psi_tt = F with constant coefficients; supply F explicitly");
  };
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i) {
    for (const auto& q : s.frame.q) need(diff(d.theta[T][i], q).is_const(0.0));
    for (const auto& x : s.frame.x) need(!depends_on(d.theta[T][i], x));
    for (int b = 0; b < k; ++b)
      for (int j = 0; j < n; ++j) {
        const Expr& w = d.hessian[T * n + i][b * n + j];
        if (b != T) {
          need(w.is_const(0.0));
          continue;
        }
        need(!depends_on_any(w, coords));
        M(i, j) = Compiled(w, sl)(at);
      }
  }
  need(regularity_of(M).regular);
  TimeForm tf{M.inverse(), std::vector<double>(static_cast<std::size_t>(k), 0.0)};
  for (int a = 0; a < k; ++a) {
    if (a == T) continue;
    for (int i = 0; i < n; ++i) {
      const Expr& w = d.hessian[a * n + i][a * n + i];
      need(!depends_on_any(w, coords));
      double c2 = -Compiled(w, sl)(at) / M(i, i);
      if (c2 < 0.0) throw PreconditionError("system is not hyperbolic along the chosen time axis");
      tf.speeds[a] = std::max(tf.speeds[a], std::sqrt(c2));
    }
  }
  return tf;
}

double cfl_of(const Grid& g, int T, const std::vector<double>& speeds) {
  double s = 0.0;
  for (int a = 0; a < g.k(); ++a)
    if (a != T) s += speeds[a] * speeds[a] / (g.axes[a].h() * g.axes[a].h());
  return g.axes[T].h() * std::sqrt(s);
}

GridSection leapfrog(const AccelFn& F, int n, const std::vector<double>& speeds, const PointFn& psi0,
                     const PointFn& psit0, const Grid& g, const HyperbolicOptions& opt) {
  g.check();
  const int k = g.k(), T = opt.time_axis;
  if (T < 0 || T >= k) throw DimensionMismatch("time axis out of range");
  if (speeds.size() != static_cast<std::size_t>(k)) throw DimensionMismatch("need one speed per axis");
  const double cfl = cfl_of(g, T, speeds);
  if (cfl > opt.cfl_limit)
    throw CflViolation("CFL number " + std::to_string(cfl) + " exceeds " + std::to_string(opt.cfl_limit));

  Grid sg;  // spatial slice
  for (int a = 0; a < k; ++a)
    if (a != T) sg.axes.push_back(g.axes[a]);
  const std::size_t M = sg.size(), N = g.size();
  const int steps = g.axes[T].count - 1;
  const double dt = g.axes[T].h(), dt2 = dt * dt;
  const bool periodic = opt.boundary == Boundary::Periodic;

  // flat index of slice point j at time level m
  const std::size_t sT = g.stride(T);
  const std::size_t outer = sT * static_cast<std::size_t>(g.axes[T].count);
  auto full = [&](std::size_t j, int m) { return (j / sT) * outer + static_cast<std::size_t>(m) * sT + j % sT; };
  auto xat = [&](std::size_t j, int m) {
    auto xs = sg.point(j);
    xs.insert(xs.begin() + T, g.axes[T].at(m));
    return xs;
  };

  GridSection sec{g, n, std::vector<Field>(static_cast<std::size_t>(n), Field(N)), {}, {}};
  std::vector<Field> prev(n, Field(M)), cur(n, Field(M)), next(n, Field(M)), acc(n, Field(M, 0.0)), vt(n, Field(M));
  std::vector<double> buf(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < M; ++j) {
    auto x = xat(j, 0);
    psi0(x, buf);
    for (int i = 0; i < n; ++i) cur[i][j] = buf[i];
    psit0(x, buf);
    for (int i = 0; i < n; ++i) vt[i][j] = buf[i];
  }
  const std::vector<Field> initial = cur;

  // slice derivatives are taken on sg; map them back to full-axis slots
  std::vector<int> full_axis;
  for (int a = 0; a < k; ++a)
    if (a != T) full_axis.push_back(a);
  const int ks = sg.k();
  const std::vector<bool> per(static_cast<std::size_t>(ks), periodic), none(static_cast<std::size_t>(ks), false);
  std::vector<double> d1(static_cast<std::size_t>(k * n)), d2(static_cast<std::size_t>(k * k * n));

  auto accel = [&](const std::vector<Field>& u, int m) {
    Derivs d = all_derivs(sg, u, per, none);
    std::vector<double> psi(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
    for (std::size_t j = 0; j < M; ++j) {
      if (!periodic && !sg.interior(j)) continue;
      std::fill(d1.begin(), d1.end(), 0.0);
      std::fill(d2.begin(), d2.end(), 0.0);
      for (int i = 0; i < n; ++i) psi[i] = u[i][j];
      for (int a = 0; a < ks; ++a)
        for (int i = 0; i < n; ++i) {
          d1[full_axis[a] * n + i] = d.d1[a * n + i][j];
          for (int b = 0; b < ks; ++b) d2[(full_axis[a] * k + full_axis[b]) * n + i] = d.d2[(a * ks + b) * n + i][j];
        }
      auto x = xat(j, m);
      F(x.data(), psi.data(), d1.data(), d2.data(), out.data());
      for (int i = 0; i < n; ++i) acc[i][j] = out[i];
    }
  };
  auto boundary = [&](std::vector<Field>& u, int m) {
    if (periodic) {
      // the last point on each periodic axis duplicates the first
      for (int a = 0; a < ks; ++a) {
        const std::size_t s = sg.stride(a), c = static_cast<std::size_t>(sg.axes[a].count);
        for (std::size_t base = 0; base < M; base += s * c)
          for (std::size_t off = 0; off < s; ++off)
            for (int i = 0; i < n; ++i) u[i][base + off + (c - 1) * s] = u[i][base + off];
      }
      return;
    }
    for (std::size_t j = 0; j < M; ++j) {
      if (sg.interior(j)) continue;
      if (opt.dirichlet) {
        opt.dirichlet(xat(j, m), buf);
        for (int i = 0; i < n; ++i) u[i][j] = buf[i];
      } else {
        for (int i = 0; i < n; ++i) u[i][j] = initial[i][j];
      }
    }
  };
  auto store = [&](const std::vector<Field>& u, int m) {
    for (int i = 0; i < n; ++i)
      for (std::size_t j = 0; j < M; ++j) {
        if (!std::isfinite(u[i][j]))
          throw NonFinite("non-finite value at time level " + std::to_string(m));
        sec.psi[i][full(j, m)] = u[i][j];
      }
  };

  store(cur, 0);
  if (steps >= 1) {
    accel(cur, 0);
    for (int i = 0; i < n; ++i)
      for (std::size_t j = 0; j < M; ++j) next[i][j] = cur[i][j] + dt * vt[i][j] + 0.5 * dt2 * acc[i][j];
    boundary(next, 1);
    store(next, 1);
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  const auto& K = simd::kernels();
  for (int m = 1; m < steps; ++m) {
    accel(cur, m);
    for (int i = 0; i < n; ++i) K.leapfrog(cur[i].data(), prev[i].data(), acc[i].data(), dt2, next[i].data(), M);
    boundary(next, m + 1);
    store(next, m + 1);
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  return sec;
}

}  // namespace

double cfl_number(const SystemDef& s, const Grid& g, int time_axis) {
  g.check();
  if (g.k() != s.k()) throw DimensionMismatch("grid rank differs from k");
  return cfl_of(g, time_axis, time_form(s, time_axis).speeds);
}

GridSection evolve_hyperbolic(const SystemDef& s, const PointFn& psi0, const PointFn& psit0, const Grid& g,
                              const HyperbolicOptions& opt) {
  if (g.k() != s.k()) throw DimensionMismatch("grid rank differs from k");
  TimeForm tf = time_form(s, opt.time_axis);
  auto el = std::make_shared<ElResidual>(s);
  const int k = s.k(), n = s.n(), qo = s.offset_q(), fo = s.offset_fiber();
  auto slots = std::make_shared<std::vector<double>>(s.point(std::vector<double>(static_cast<std::size_t>(s.dim()), 0.0)));
  auto r = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n));
  const bool cosym = s.cosymplectic();
  AccelFn F = [=](const double* x, const double* psi, const double* d1, const double* d2, double* out) {
    auto& sl = *slots;
    if (cosym) std::copy(x, x + k, sl.begin());
    std::copy(psi, psi + n, sl.begin() + qo);
    std::copy(d1, d1 + k * n, sl.begin() + fo);
    (*el)(sl.data(), d2, r->data());
    for (int i = 0; i < n; ++i) {
      double v = 0.0;
      for (int j = 0; j < n; ++j) v -= tf.Minv(i, j) * (*r)[j];
      out[i] = v;
    }
  };
  return leapfrog(F, n, tf.speeds, psi0, psit0, g, opt);
}

GridSection evolve_hyperbolic(const ExplicitRhs& rhs, int n, const PointFn& psi0, const PointFn& psit0,
                              const Grid& g, const HyperbolicOptions& opt) {
  if (!rhs.f) throw PreconditionError("explicit right-hand side is empty");
  return leapfrog(rhs.f, n, rhs.speeds, psi0, psit0, g, opt);
}

// ---- Gauss-Seidel -------------------------------------------------------------

RelaxResult relax_elliptic(const SystemDef& s, const PointFn& boundary, const Grid& g, double tol, int max_iters,
                           const PointFn& guess) {
  if (s.kind != Kind::Lagrangian) throw FormalismError("relax_elliptic needs a lagrangian system");
  g.check();
  if (g.k() != s.k()) throw DimensionMismatch("grid rank differs from k");
  const int k = s.k(), n = s.n(), qo = s.offset_q(), fo = s.offset_fiber();
  const std::size_t N = g.size();
  RelaxResult res;
  res.section = sample_section(g, n, boundary);
  auto& psi = res.section.psi;
  if (guess) {
    GridSection gs = sample_section(g, n, guess);
    for (std::size_t f = 0; f < N; ++f)
      if (g.interior(f))
        for (int i = 0; i < n; ++i) psi[i][f] = gs.psi[i][f];
  } else {
    for (std::size_t f = 0; f < N; ++f)
      if (g.interior(f))
        for (int i = 0; i < n; ++i) psi[i][f] = 0.0;
  }

  ElResidual el(s);
  std::vector<std::size_t> st(static_cast<std::size_t>(k));
  std::vector<double> h1(static_cast<std::size_t>(k)), h2(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) {
    st[a] = g.stride(a);
    h1[a] = c1(g.axes[a]);
    h2[a] = c2(g.axes[a]);
  }
  std::vector<double> slots = s.point(std::vector<double>(static_cast<std::size_t>(s.dim()), 0.0));
  std::vector<double> acc(static_cast<std::size_t>(k * k * n));
  std::vector<std::vector<double>> X(N);
  if (s.cosymplectic())
    for (std::size_t f = 0; f < N; ++f)
      if (g.interior(f)) X[f] = g.point(f);

  // Same arithmetic as the vector kernels, so the final residual matches
  // residual_on_grid exactly.
  auto local = [&](std::size_t f, double* out) {
    if (s.cosymplectic()) std::copy(X[f].begin(), X[f].end(), slots.begin());
    for (int i = 0; i < n; ++i) {
      const double* u = psi[i].data();
      slots[qo + i] = u[f];
      for (int a = 0; a < k; ++a) {
        slots[fo + a * n + i] = (u[f + st[a]] - u[f - st[a]]) * h1[a];
        acc[(a * k + a) * n + i] = ((u[f - st[a]] - 2.0 * u[f]) + u[f + st[a]]) * h2[a];
        for (int b = a + 1; b < k; ++b) {
          double dp = (u[f + st[b] + st[a]] - u[f + st[b] - st[a]]) * h1[a];
          double dm = (u[f - st[b] + st[a]] - u[f - st[b] - st[a]]) * h1[a];
          acc[(a * k + b) * n + i] = acc[(b * k + a) * n + i] = (dp - dm) * h1[b];
        }
      }
    }
    el(slots.data(), acc.data(), out);
  };

  std::vector<double> r0(static_cast<std::size_t>(n)), r1(static_cast<std::size_t>(n));
  Eigen::MatrixXd J(n, n);
  Eigen::VectorXd rhs(n);
  auto max_residual = [&] {
    double m = 0.0;
    for (std::size_t f = 0; f < N; ++f) {
      if (!g.interior(f)) continue;
      local(f, r0.data());
      for (double v : r0) {
        if (!std::isfinite(v)) throw NonFinite("non-finite residual during relaxation");
        m = std::max(m, std::fabs(v));
      }
    }
    return m;
  };

  res.residual = max_residual();
  while (res.residual > tol) {
    if (res.sweeps >= max_iters)
      throw NoConvergence("relax_elliptic: residual " + std::to_string(res.residual) + " after " +
                          std::to_string(max_iters) + " sweeps");
    for (std::size_t f = 0; f < N; ++f) {
      if (!g.interior(f)) continue;
      local(f, r0.data());
      for (int j = 0; j < n; ++j) {
        double keep = psi[j][f], d = 1e-7 * (1.0 + std::fabs(keep));
        psi[j][f] = keep + d;
        local(f, r1.data());
        psi[j][f] = keep;
        for (int i = 0; i < n; ++i) J(i, j) = (r1[i] - r0[i]) / d;
      }
      for (int i = 0; i < n; ++i) rhs(i) = -r0[i];
      Eigen::VectorXd step(n);
      if (n == 1) step(0) = rhs(0) / J(0, 0);
      else step = J.partialPivLu().solve(rhs);
      for (int j = 0; j < n; ++j)
        if (std::isfinite(step(j))) psi[j][f] += step(j);
    }
    ++res.sweeps;
    res.residual = max_residual();
  }
  return res;
}

// ---- CSV ----------------------------------------------------------------------

std::string write_csv(const GridSection& sec) {
  const Grid& g = sec.grid;
  const int k = g.k(), n = sec.n;
  const bool mom = sec.momenta.size() == static_cast<std::size_t>(k);
  const bool vel = sec.velocities.size() == static_cast<std::size_t>(n);
  std::string out;
  for (int a = 1; a <= k; ++a) out += (a > 1 ? ",x" : "x") + std::to_string(a);
  for (int i = 1; i <= n; ++i) out += ",psi_" + std::to_string(i);
  if (mom)
    for (int a = 1; a <= k; ++a)
      for (int i = 1; i <= n; ++i) out += ",p_" + std::to_string(a) + "_" + std::to_string(i);
  if (vel)
    for (int a = 1; a <= k; ++a)
      for (int i = 1; i <= n; ++i) out += ",v_" + std::to_string(i) + "_" + std::to_string(a);
  out += '\n';
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
  };
  for (std::size_t f = 0; f < g.size(); ++f) {
    auto x = g.point(f);
    for (int a = 0; a < k; ++a) {
      if (a) out += ',';
      num(x[a]);
    }
    for (int i = 0; i < n; ++i) out += ',', num(sec.psi[i][f]);
    if (mom)
      for (int a = 0; a < k; ++a)
        for (int i = 0; i < n; ++i) out += ',', num(sec.momenta[a][i][f]);
    if (vel)
      for (int a = 0; a < k; ++a)
        for (int i = 0; i < n; ++i) out += ',', num(sec.velocities[i][a][f]);
    out += '\n';
  }
  return out;
}

GridSection read_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) throw SchemaError("empty CSV");
  std::vector<std::string> cols;
  {
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
  }
  int k = 0, n = 0, np = 0, nv = 0;
  for (const auto& c : cols) {
    if (c.rfind("psi_", 0) == 0) ++n;
    else if (c.rfind("p_", 0) == 0) ++np;
    else if (c.rfind("v_", 0) == 0) ++nv;
    else if (c.size() > 1 && c[0] == 'x') ++k;
    else throw SchemaError("unknown CSV column '" + c + "'");
  }
  if (k == 0 || n == 0) throw SchemaError("CSV needs x and psi columns");
  if ((np && np != k * n) || (nv && nv != k * n)) throw SchemaError("CSV momentum/velocity column count mismatch");
  std::vector<std::vector<double>> rows;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) {
      try {
        r.push_back(std::stod(c));
      } catch (const std::exception&) {
        throw SchemaError("bad CSV number '" + c + "'");
      }
    }
    if (r.size() != cols.size()) throw SchemaError("CSV row has the wrong number of columns");
    rows.push_back(std::move(r));
  }
  Grid g;
  for (int a = 0; a < k; ++a) {
    std::set<double> vals;
    for (const auto& r : rows) vals.insert(r[a]);
    g.axes.push_back({*vals.begin(), *vals.rbegin(), static_cast<int>(vals.size())});
  }
  g.check();
  if (rows.size() != g.size()) throw SchemaError("CSV rows do not form a full rectangular grid");
  GridSection sec{g, n, std::vector<Field>(static_cast<std::size_t>(n), Field(g.size())), {}, {}};
  if (np) sec.momenta.assign(k, std::vector<Field>(n, Field(g.size())));
  if (nv) sec.velocities.assign(n, std::vector<Field>(k, Field(g.size())));
  for (std::size_t f = 0; f < rows.size(); ++f) {
    const auto& r = rows[f];
    auto x = g.point(f);
    for (int a = 0; a < k; ++a)
      if (std::fabs(x[a] - r[a]) > 1e-9 * (1.0 + std::fabs(x[a])))
        throw SchemaError("CSV rows are not in row-major grid order");
    std::size_t c = static_cast<std::size_t>(k);
    for (int i = 0; i < n; ++i) sec.psi[i][f] = r[c++];
    if (np)
      for (int a = 0; a < k; ++a)
        for (int i = 0; i < n; ++i) sec.momenta[a][i][f] = r[c++];
    if (nv)
      for (int a = 0; a < k; ++a)
        for (int i = 0; i < n; ++i) sec.velocities[i][a][f] = r[c++];
  }
  return sec;
}

}  // namespace kfield
