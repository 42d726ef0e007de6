#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kfield/fields.hpp"
#include "kfield/gallery.hpp"
#include "kfield/simd.hpp"
#include "support.hpp"

using namespace kfield;

namespace {

constexpr double kPi = std::numbers::pi;

bool same_bits(const Field& a, const Field& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Max |psi - exact| over the last level of the time axis.
double final_error(const GridSection& sec, const gallery::AnalyticSolution& sol, int T) {
  const Grid& g = sec.grid;
  double e = 0.0, v = 0.0;
  for (std::size_t f = 0; f < g.size(); ++f) {
    if (g.index(f)[static_cast<std::size_t>(T)] != g.axes[static_cast<std::size_t>(T)].count - 1) continue;
    auto x = g.point(f);
    sol.psi(x, std::span<double>(&v, 1));
    e = std::max(e, std::fabs(sec.psi[0][f] - v));
  }
  return e;
}

// Max interior |psi - exact| over every component.
double grid_error(const GridSection& sec, const gallery::AnalyticSolution& sol) {
  std::vector<double> v(static_cast<std::size_t>(sec.n));
  double e = 0.0;
  for (std::size_t f = 0; f < sec.grid.size(); ++f) {
    sol.psi(sec.grid.point(f), v);
    for (int i = 0; i < sec.n; ++i) e = std::max(e, std::fabs(sec.psi[i][f] - v[i]));
  }
  return e;
}

PointFn time_derivative(const gallery::AnalyticSolution& sol, int k, int T) {
  return [=](std::span<const double> x, std::span<double> o) {
    std::vector<double> g(static_cast<std::size_t>(k));
    sol.gradient(x, g);
    o[0] = g[static_cast<std::size_t>(T)];
  };
}

}  // namespace

TEST_CASE("grid parsing and checks") {
  Grid g = Grid::parse("0:1:5,-2:2:3");
  CHECK(g.k() == 2);
  CHECK(g.size() == 15);
  CHECK(g.stride(0) == 3);
  CHECK(g.point(4) == std::vector<double>{0.25, 0.0});
  CHECK(g.interior(4));
  CHECK_FALSE(g.interior(3));
  CHECK_THROWS_AS(Grid::parse("0:1"), SchemaError);
  CHECK_THROWS_AS(Grid::parse("0:1:2").check(), GridTooSmall);
  CHECK_THROWS_AS(Grid::parse("1:0:5").check(), SchemaError);
}

TEST_CASE("fd_partial: exact on quadratics, NaN without a stencil") {
  Grid g = Grid::parse("0:1:11,0:2:9");
  auto sec = sample_section(g, 1, [](auto x, auto o) { o[0] = 3 * x[0] * x[0] - x[0] * x[1] + 2 * x[1]; });
  Field dx = fd_partial(sec, 0, 0, 1), dyy = fd_partial(sec, 0, 1, 2), dxy = fd_mixed(g, sec.psi[0], 0, 1);
  for (std::size_t f = 0; f < g.size(); ++f) {
    auto x = g.point(f);
    auto idx = g.index(f);
    if (idx[0] == 0 || idx[0] == 10) {
      CHECK(std::isnan(dx[f]));
      continue;
    }
    CHECK(dx[f] == doctest::Approx(6 * x[0] - x[1]).epsilon(1e-12));
    if (idx[1] > 0 && idx[1] < 8) {
      CHECK(std::fabs(dyy[f]) <= 1e-10);
      CHECK(dxy[f] == doctest::Approx(-1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("simd kernels match the scalar reference bit for bit") {
  const auto& ref = simd::kernels(simd::Isa::Scalar);
  const auto& best = simd::kernels();
  MESSAGE("dispatched kernels: " << std::string(simd::to_string(best.isa)));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (std::size_t len : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 17u, 64u, 1001u}) {
    Field m(len), mid(len), p(len), a(len), b(len);
    for (std::size_t i = 0; i < len; ++i) m[i] = u(rng), mid[i] = u(rng), p[i] = u(rng);
    const double c = 1.0 / 0.0123;
    ref.diff1(m.data(), p.data(), c, a.data(), len);
    best.diff1(m.data(), p.data(), c, b.data(), len);
    CHECK(same_bits(a, b));
    ref.diff2(m.data(), mid.data(), p.data(), c * c, a.data(), len);
    best.diff2(m.data(), mid.data(), p.data(), c * c, b.data(), len);
    CHECK(same_bits(a, b));
    ref.leapfrog(m.data(), mid.data(), p.data(), 1e-4, a.data(), len);
    best.leapfrog(m.data(), mid.data(), p.data(), 1e-4, b.data(), len);
    CHECK(same_bits(a, b));
    // the dispatched path against a plain loop written here
    for (std::size_t i = 0; i < len; ++i) CHECK(b[i] == (2.0 * m[i] - mid[i]) + 1e-4 * p[i]);
  }
  for (auto isa : {simd::Isa::Avx2, simd::Isa::Neon})
    if (!simd::supported(isa)) CHECK_THROWS_AS(simd::kernels(isa), PreconditionError);
}

TEST_CASE("residual_on_grid: examples") {
  SystemDef lap = gallery::instantiate("laplace");
  auto sol = gallery::analytic_solution("laplace", "quadratic");
  auto sec = gallery::sample(sol, Grid::parse("0:1:17,0:1:17"), 1);
  ResidualReport r = residual_on_grid(sec, lap);
  REQUIRE(r.families.size() == 2);
  CHECK(r.families[0].name == "velocity");
  CHECK(r.families[1].name == "trace");
  CHECK(r.max() <= 1e-12);
  CHECK(residual_on_grid(sec, gallery::instantiate("laplace", {}, Kind::Lagrangian)).max() <= 1e-12);

  GridSection bare = sec;
  bare.momenta.clear();
  CHECK_THROWS_AS(residual_on_grid(bare, lap), MissingField);

  SystemDef ms = gallery::instantiate("minimal_surface");
  auto plane = gallery::sample(gallery::analytic_solution("minimal_surface", "plane"), Grid::parse("0:1:9,0:1:9"), 1);
  CHECK(residual_on_grid(plane, ms).max() <= 1e-10);

  SystemDef vs = gallery::instantiate("vibrating_string");
  auto ex = gallery::analytic_solution("vibrating_string", "exp");
  double e1 = residual_on_grid(gallery::sample(ex, Grid::parse("0:1:17,0:1:17"), 1), vs).max();
  double e2 = residual_on_grid(gallery::sample(ex, Grid::parse("0:1:33,0:1:33"), 1), vs).max();
  CHECK(oracle::order(e1, e2) == doctest::Approx(2.0).epsilon(0.15));

  // a NaN field is reported, not hidden
  auto nan = sec;
  nan.psi[0][sec.grid.size() / 2] = std::nan("");
  CHECK(std::isnan(residual_on_grid(nan, lap).max()));
}

TEST_CASE("leapfrog: wave against d'Alembert, second order") {
  SystemDef w = gallery::instantiate("wave", {}, Kind::Lagrangian);
  auto sol = gallery::analytic_solution("wave", "dalembert");
  HyperbolicOptions opt{1, Boundary::Periodic, 0.9, nullptr};
  std::vector<double> err;
  for (int cells : {32, 64, 128}) {
    Grid g{{{0.0, 2 * kPi, cells + 1}, {0.0, kPi / 2, cells / 2 + 1}}};
    auto sec = evolve_hyperbolic(w, sol.psi, time_derivative(sol, 2, 1), g, opt);
    err.push_back(final_error(sec, sol, 1));
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    double p = oracle::order(err[i], err[i + 1]);
    CHECK(p >= 1.7);
    CHECK(p <= 2.3);
  }
}

TEST_CASE("leapfrog: discrete energy over 1000 steps at CFL 0.5") {
  const int cells = 64, steps = 1000;
  const double c = 1.0, h = 2 * kPi / cells, dt = 0.5 * h / c;
  SystemDef w = gallery::instantiate("wave", {{"c", c}}, Kind::Lagrangian);
  Grid g{{{0.0, 2 * kPi, cells + 1}, {0.0, steps * dt, steps + 1}}};
  auto psi0 = [](auto x, auto o) { o[0] = std::sin(x[0]) + 0.3 * std::cos(3 * x[0]); };
  auto psit = [](auto x, auto o) { o[0] = -std::cos(x[0]) + 0.2 * std::sin(2 * x[0]); };
  HyperbolicOptions opt{1, Boundary::Periodic, 0.9, nullptr};
  CHECK(cfl_number(w, g, 1) == doctest::Approx(0.5).epsilon(1e-9));
  auto sec = evolve_hyperbolic(w, psi0, psit, g, opt);

  // E^{m+1/2} = 1/2 sum ((u^{m+1} - u^m)/dt)^2 + c^2/2 sum D+u^{m+1} D+u^m over the periodic cells
  const double dtg = g.axes[1].h(), hg = g.axes[0].h();
  auto u = [&](int j, int m) { return sec.psi[0][static_cast<std::size_t>(j % cells) * (steps + 1) + m]; };
  auto energy = [&](int m) {
    double e = 0.0;
    for (int j = 0; j < cells; ++j) {
      double vt = (u(j, m + 1) - u(j, m)) / dtg;
      double d1 = (u(j + 1, m + 1) - u(j, m + 1)) / hg, d0 = (u(j + 1, m) - u(j, m)) / hg;
      e += 0.5 * vt * vt + 0.5 * c * c * d1 * d0;
    }
    return e * hg;
  };
  double e0 = energy(1), drift = 0.0;
  for (int m = 1; m < steps; ++m) drift = std::max(drift, std::fabs(energy(m) - e0) / e0);
  CHECK(drift <= 1e-6);
}

TEST_CASE("leapfrog: sine-gordon kink, second order") {
  SystemDef sg = gallery::instantiate("sine_gordon");
  auto sol = gallery::analytic_solution("sine_gordon", "kink");
  HyperbolicOptions opt{0, Boundary::Dirichlet, 0.9, sol.psi};
  std::vector<double> err;
  for (int cells : {64, 128, 256}) {
    double h = 16.0 / cells;
    Grid g{{{0.0, 1.0, static_cast<int>(std::lround(2.0 / h)) + 1}, {-8.0, 8.0, cells + 1}}};
    auto sec = evolve_hyperbolic(sg, sol.psi, time_derivative(sol, 2, 0), g, opt);
    err.push_back(final_error(sec, sol, 0));
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    double p = oracle::order(err[i], err[i + 1]);
    CHECK(p >= 1.7);
    CHECK(p <= 2.3);
  }
}

TEST_CASE("leapfrog: explicit rhs, constants, errors, determinism") {
  ExplicitRhs zero{[](const double*, const double*, const double*, const double*, double* out) { out[0] = 0.0; },
                   {0.0, 1.0}};
  Grid g = Grid::parse("0:1:41,0:1:11");
  auto c = [](auto, auto o) { o[0] = 2.5; };
  auto z = [](auto, auto o) { o[0] = 0.0; };
  auto sec = evolve_hyperbolic(zero, 1, c, z, g, {0, Boundary::Dirichlet, 0.9, nullptr});
  for (double v : sec.psi[0]) CHECK(v == 2.5);

  SystemDef w = gallery::instantiate("wave", {}, Kind::Lagrangian);
  Grid fast = Grid::parse("0:1:21,0:1:5");
  CHECK_THROWS_AS(evolve_hyperbolic(w, c, z, fast, {1, Boundary::Periodic, 0.9, nullptr}), CflViolation);
  CHECK_THROWS_AS(evolve_hyperbolic(gallery::instantiate("minimal_surface"), c, z, g, {0}), PreconditionError);

  ExplicitRhs blow{[](const double*, const double* psi, const double*, const double*, double* out) {
                     out[0] = 1e300 * psi[0] * psi[0];
                   },
                   {0.0, 1.0}};
  CHECK_THROWS_AS(evolve_hyperbolic(blow, 1, c, z, g, {0}), NonFinite);

  auto sol = gallery::analytic_solution("wave", "dalembert");
  Grid wg{{{0.0, 2 * kPi, 65}, {0.0, 1.0, 41}}};
  HyperbolicOptions opt{1, Boundary::Periodic, 0.9, nullptr};
  auto a = evolve_hyperbolic(w, sol.psi, time_derivative(sol, 2, 1), wg, opt);
  auto b = evolve_hyperbolic(w, sol.psi, time_derivative(sol, 2, 1), wg, opt);
  CHECK(same_bits(a.psi[0], b.psi[0]));
}

TEST_CASE("relax_elliptic: exact cases") {
  SystemDef lap = gallery::instantiate("laplace", {}, Kind::Lagrangian);
  auto q = gallery::analytic_solution("laplace", "quadratic");
  auto r = relax_elliptic(lap, q.psi, Grid::parse("0:1:33,0:1:33"), 1e-10, 20000);
  CHECK(grid_error(r.section, q) <= 1e-8);
  CHECK(residual_on_grid(r.section, lap).max() <= 10 * 1e-10);

  SystemDef nav = gallery::instantiate("navier");
  auto lin = gallery::analytic_solution("navier", "linear");
  auto rn = relax_elliptic(nav, lin.psi, Grid::parse("0:1:17,0:1:17"), 1e-10, 20000);
  CHECK(grid_error(rn.section, lin) <= 1e-8);
  CHECK(residual_on_grid(rn.section, nav).max() <= 10 * 1e-10);

  SystemDef ms = gallery::instantiate("minimal_surface");
  auto plane = gallery::analytic_solution("minimal_surface", "plane");
  auto rm = relax_elliptic(ms, plane.psi, Grid::parse("0:1:17,0:1:17"), 1e-10, 20000);
  CHECK(grid_error(rm.section, plane) <= 1e-8);

  CHECK_THROWS_AS(relax_elliptic(lap, q.psi, Grid::parse("0:1:33,0:1:33"), 1e-10, 3), NoConvergence);
  auto again = relax_elliptic(lap, q.psi, Grid::parse("0:1:33,0:1:33"), 1e-10, 20000);
  CHECK(same_bits(again.section.psi[0], r.section.psi[0]));
}

TEST_CASE("relax_elliptic: catenoid, second order") {
  SystemDef ms = gallery::instantiate("minimal_surface");
  auto cat = gallery::analytic_solution("minimal_surface", "catenoid");
  std::vector<double> err;
  for (int n : {9, 17, 33}) {
    Grid g{{{1.5, 2.5, n}, {-0.5, 0.5, n}}};
    auto r = relax_elliptic(ms, cat.psi, g, 1e-10, 50000);
    MESSAGE(n << " points per axis: " << r.sweeps << " sweeps");
    err.push_back(grid_error(r.section, cat));
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    double p = oracle::order(err[i], err[i + 1]);
    CHECK(p >= 1.7);
    CHECK(p <= 2.3);
  }
}

TEST_CASE("csv round trip") {
  auto sol = gallery::analytic_solution("vibrating_string", "exp");
  auto sec = gallery::sample(sol, Grid::parse("0:1:5,0:0.3:4"), 1);
  std::string text = write_csv(sec);
  CHECK(text.rfind("x1,x2,psi_1,p_1_1,p_2_1\n", 0) == 0);
  GridSection back = read_csv(text);
  CHECK(back.grid.size() == sec.grid.size());
  CHECK(same_bits(back.psi[0], sec.psi[0]));
  CHECK(same_bits(back.momenta[1][0], sec.momenta[1][0]));
  CHECK(write_csv(back) == text);
  CHECK_THROWS_AS(read_csv(""), SchemaError);
}
