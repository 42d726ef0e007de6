#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "kfield/gallery.hpp"
#include "kfield/hamiltonian.hpp"
#include "kfield/legendre.hpp"
#include "support.hpp"

using namespace kfield;

namespace {

// Same domain with 2c - 1 points per axis.
Grid refine(const Grid& g) {
  Grid r = g;
  for (auto& a : r.axes) a.count = 2 * a.count - 1;
  return r;
}

Kind kind_of(const std::string& form) { return form == "hamiltonian" ? Kind::Hamiltonian : Kind::Lagrangian; }

}  // namespace

TEST_CASE("instantiate: examples") {
  SystemDef sg = gallery::instantiate("sine_gordon", {{"a", 1.0}, {"Omega", 1.0}});
  CHECK(sg.k() == 2);
  CHECK(sg.n() == 1);
  CHECK(sg.kind == Kind::Lagrangian);

  SystemDef w = gallery::instantiate("wave", {{"n", 1.0}, {"c", 2.0}});
  CHECK(w.k() == 2);
  CHECK(w.kind == Kind::Hamiltonian);
  Expr expected = parse("0.5*(p2^2 - p1^2/4)");
  for (const auto& p : halton_points(SampleBox::cube(3), 20)) {
    Assignment at{{"c", 2.0}, {"q", p[0]}, {"p1", p[1]}, {"p2", p[2]}};
    CHECK(eval(w.expression, at) == doctest::Approx(eval(expected, at)).epsilon(1e-14));
  }

  SystemDef l5 = gallery::instantiate("laplace", {{"n", 5.0}});
  CHECK(l5.k() == 5);
  CHECK(l5.kind == Kind::Hamiltonian);

  SystemDef q = gallery::instantiate("quadratic", {{"k", 3.0}, {"n", 2.0}, {"g3", 5.0}});
  CHECK(q.params.at("g3") == 5.0);
  CHECK(q.params.count("k") == 0);
}

TEST_CASE("instantiate: errors") {
  CHECK_THROWS_AS(gallery::instantiate("nope"), UnknownEntry);
  CHECK_THROWS_AS(gallery::instantiate("navier", {}, Kind::Hamiltonian), UnknownEntry);
  CHECK_THROWS_AS(gallery::instantiate("wave", {{"speed", 1.0}}), BadParam);
  CHECK_THROWS_AS(gallery::instantiate("wave", {{"n", 1.5}}), BadParam);
  CHECK_THROWS_AS(gallery::instantiate("laplace", {{"n", 0.0}}), BadParam);
  CHECK_THROWS_AS(gallery::instantiate("wave", {{"c", 0.0}}), BadParam);
  CHECK_THROWS_AS(gallery::instantiate("quadratic", {{"g3", 1.0}}), BadParam);
  CHECK_THROWS_AS(gallery::analytic_solution("laplace", "cubic"), UnknownSolution);
  CHECK_THROWS_AS(gallery::analytic_solution("laplace", "quadratic", {{"n", 1.0}}), UnknownSolution);
  CHECK_THROWS_AS(gallery::analytic_solution("sine_gordon", "kink", {{"speed", 2.0}}), BadParam);
}

TEST_CASE("analytic solutions: point values") {
  double x[2] = {0.5, 0.25}, v = 0.0;
  gallery::analytic_solution("vibrating_string", "exp").psi(x, std::span<double>(&v, 1));
  CHECK(v == doctest::Approx(std::exp(0.25)).epsilon(1e-15));
  double y[2] = {1.0, 2.0};
  gallery::analytic_solution("laplace", "quadratic").psi(y, std::span<double>(&v, 1));
  CHECK(v == -3.0);
  double o[4] = {0, 0, 0, 0};
  gallery::analytic_solution("scalar_field_hj", "rational", {{"C1", 1.0}, {"C2", 1.0}, {"C3", 0.0}, {"C4", 0.0}, {"C0", 4.0}})
      .psi(o, std::span<double>(&v, 1));
  CHECK(v == 0.5);
}

TEST_CASE("analytic gradients agree with central differences") {
  for (const auto& name : gallery::names()) {
    const auto& info = gallery::info(name);
    SystemDef s = gallery::instantiate(name);
    const int k = s.k(), n = s.n();
    for (const auto& which : info.solutions) {
      auto sol = gallery::analytic_solution(name, which);
      Grid g = sol.domain;
      for (std::size_t f = 0; f < g.size(); f += g.size() / 7 + 1) {
        auto x = g.point(f);
        std::vector<double> grad(static_cast<std::size_t>(k * n)), v(static_cast<std::size_t>(n));
        sol.gradient(x, grad);
        for (int a = 0; a < k; ++a)
          for (int i = 0; i < n; ++i) {
            auto fn = [&](double t) {
              auto z = x;
              z[static_cast<std::size_t>(a)] = t;
              sol.psi(z, v);
              return v[static_cast<std::size_t>(i)];
            };
            INFO(name << "/" << which);
            CHECK(std::fabs(oracle::richardson(fn, x[static_cast<std::size_t>(a)], 1e-3) - grad[a * n + i]) <=
                  1e-7 * (1.0 + std::fabs(grad[a * n + i])));
          }
      }
    }
  }
}

TEST_CASE("every analytic solution refines at order two in every form") {
  for (const auto& name : gallery::names()) {
    const auto& info = gallery::info(name);
    for (const auto& which : info.solutions) {
      auto sol = gallery::analytic_solution(name, which);
      for (const auto& form : info.forms) {
        SystemDef s = gallery::instantiate(name, {}, kind_of(form));
        Grid g = sol.domain;
        if (g.k() == 4)
          for (auto& a : g.axes) a.count = 7;
        double e1 = residual_on_grid(gallery::sample(sol, g, s.n()), s).max();
        double e2 = residual_on_grid(gallery::sample(sol, refine(g), s.n()), s).max();
        INFO(name << "/" << which << " as " << form << ": " << e1 << " -> " << e2);
        if (e2 <= 1e-10) continue;  // stencils exact on this solution
        CHECK(oracle::order(e1, e2) >= 1.7);
      }
    }
  }
}

TEST_CASE("legendre duality of gallery pairs") {
  for (const char* name : {"wave", "sine_gordon", "ginzburg_landau", "laplace", "quadratic"}) {
    SystemDef L = gallery::instantiate(name, {}, Kind::Lagrangian);
    SystemDef H = gallery::instantiate(name, {}, Kind::Hamiltonian);
    auto induced = induced_system(L);
    REQUIRE(induced.has_value());
    for (const auto& c : H.coordinates()) {
      Compiled a(diff(induced->expression, c), induced->slots()), b(diff(H.expression, c), H.slots());
      for (const auto& p : halton_points(SampleBox::cube(H.dim()), 50)) {
        INFO(name << " d/d" << c);
        CHECK(std::fabs(a(induced->point(p)) - b(H.point(p))) <= 1e-10);
      }
    }
  }
}

TEST_CASE("gallery list json") {
  auto j = nlohmann::json::parse(gallery::list_json());
  CHECK(j.size() == gallery::names().size());
  bool found = false;
  for (const auto& e : j)
    if (e["name"] == "wave") {
      found = true;
      CHECK(e["recipe"]["kind"] == "hyperbolic");
      CHECK(e["recipe"]["time_axis"] == 1);
      CHECK(e["k"] == 2);
    }
  CHECK(found);
  CHECK(gallery::info("vibrating_string").gamma == std::vector<std::string>{"a*q", "b*q"});
}
