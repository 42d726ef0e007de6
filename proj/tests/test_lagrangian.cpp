#include <cmath>
#include <random>

#include "doctest.h"
#include "kfield/gallery.hpp"
#include "kfield/lagrangian.hpp"
#include "kfield/legendre.hpp"
#include "kfield/structures.hpp"
#include "support.hpp"

using namespace kfield;

namespace {

SystemDef lag(int k, int n, const std::string& l) {
  SystemDef s;
  s.name = "test";
  s.frame = CoordFrame::standard(k, n);
  s.kind = Kind::Lagrangian;
  s.expression = parse(l);
  validate_system(s);
  return s;
}

std::vector<SystemDef> gallery_lagrangians() {
  std::vector<SystemDef> out;
  for (const auto& name : gallery::names()) {
    const auto& f = gallery::info(name).forms;
    if (std::find(f.begin(), f.end(), "lagrangian") != f.end())
      out.push_back(gallery::instantiate(name, {}, Kind::Lagrangian));
  }
  return out;
}

std::vector<double> random_point(std::mt19937_64& rng, int d, double r = 0.8) {
  std::uniform_real_distribution<double> u(-r, r);
  std::vector<double> p(static_cast<std::size_t>(d));
  for (auto& v : p) v = u(rng);
  return p;
}

}  // namespace

TEST_CASE("derive_lagrangian: sine-gordon energy") {
  SystemDef s = gallery::instantiate("sine_gordon", {{"a", 1.5}, {"Omega", 0.7}});
  LagrangianDerived d = derive_lagrangian(s);
  Expr hand = parse("0.5*(v1^2 - a^2*v2^2) + Omega^2*(1 - cos(q))");
  std::mt19937_64 rng(1);
  for (int r = 0; r < 20; ++r) {
    auto p = random_point(rng, 3, 2.0);
    Assignment at{{"q", p[0]}, {"v1", p[1]}, {"v2", p[2]}, {"a", 1.5}, {"Omega", 0.7}};
    CHECK(eval(d.energy, at) == doctest::Approx(eval(hand, at)).epsilon(1e-12));
  }
}

TEST_CASE("derive_lagrangian: navier hessian and a linear L") {
  SystemDef s = gallery::instantiate("navier", {{"lambda", 2.0}, {"mu", 3.0}});
  LagrangianDerived d = derive_lagrangian(s);
  Eigen::MatrixXd W = hessian_at(s, d, s.point(std::vector<double>(6, 0.3)));
  // (a,i) order: v11, v21, v12, v22
  CHECK(W(0, 0) == doctest::Approx(8.0));
  CHECK(W(1, 1) == doctest::Approx(3.0));
  CHECK(W(2, 2) == doctest::Approx(3.0));
  CHECK(W(3, 3) == doctest::Approx(8.0));
  CHECK(W(0, 3) == doctest::Approx(5.0));
  CHECK((W - W.transpose()).cwiseAbs().maxCoeff() == 0.0);

  LagrangianDerived lin = derive_lagrangian(lag(1, 1, "v1"));
  CHECK(simplify(lin.energy).is_const(0.0));
  CHECK(lin.hessian[0][0].is_const(0.0));
}

TEST_CASE("regularity: navier determinant, zero sets, minimal surface") {
  SystemDef s = gallery::instantiate("navier");
  LagrangianDerived d = derive_lagrangian(s);
  Assignment at{{"q1", 0.1}, {"q2", 0.2}, {"v11", 0.3}, {"v21", 0.4}, {"v12", 0.5}, {"v22", 0.6}};
  Regularity r = regularity(d, s, at);
  CHECK(r.det == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(r.regular);

  std::vector<std::vector<double>> m(4, std::vector<double>(4));
  Eigen::MatrixXd W = hessian_at(s, d, s.point(std::vector<double>(6, 0.0)));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m[i][j] = W(i, j);
  CHECK(oracle::brute_det(m) == doctest::Approx(r.det).epsilon(1e-12));

  at["mu"] = 0.0;
  CHECK_FALSE(regularity(d, s, at).regular);
  at["mu"] = 2.0;
  at["lambda"] = -3.0;
  CHECK_FALSE(regularity(d, s, at).regular);

  // permuting the (i, a) order leaves |det| unchanged
  Eigen::VectorXi perm(4);
  perm << 2, 0, 3, 1;
  Eigen::PermutationMatrix<Eigen::Dynamic> P(perm);
  CHECK(std::fabs(regularity_of(P * W * P.transpose()).det) == doctest::Approx(std::fabs(regularity_of(W).det)));

  SystemDef ms = gallery::instantiate("minimal_surface");
  Regularity rm = regularity(derive_lagrangian(ms), ms, {{"q", 0.0}, {"v1", 0.0}, {"v2", 0.0}});
  CHECK(rm.det == doctest::Approx(1.0));
}

TEST_CASE("check_sopde_el: laplace and sine-gordon") {
  SystemDef s = gallery::instantiate("laplace", {}, Kind::Lagrangian);
  KVectorField X = KVectorField::zero(2, 1, false);
  X.config[0][0] = parse("v1");
  X.config[1][0] = parse("v2");
  X.fiber[0][0][0] = parse("q*v2");
  X.fiber[1][1][0] = parse("-q*v2");
  X.fiber[0][1][0] = parse("7");
  SopdeReport r = check_sopde_el(X, s);
  CHECK(r.is_sopde);
  CHECK(r.el_defect == 0.0);

  SystemDef sg = gallery::instantiate("sine_gordon", {{"a", 2.0}, {"Omega", 1.5}});
  KVectorField Y = KVectorField::zero(2, 1, false);
  Y.config[1][0] = parse("v2");
  CHECK_FALSE(check_sopde_el(Y, sg).is_sopde);
  Y.config[0][0] = parse("v1");
  Y.fiber[0][0][0] = parse("-Omega^2*sin(q) + a^2*q");
  Y.fiber[1][1][0] = parse("q");
  SopdeReport rs = check_sopde_el(Y, sg);
  CHECK(rs.is_sopde);
  CHECK(rs.el_defect <= 1e-14);
}

TEST_CASE("euler relation for homogeneous quadratic lagrangians") {
  std::vector<SystemDef> sys{gallery::instantiate("quadratic", {{"m", 0.0}}, Kind::Lagrangian),
                             gallery::instantiate("laplace", {{"n", 3.0}}, Kind::Lagrangian),
                             gallery::instantiate("wave", {{"c", 1.7}}, Kind::Lagrangian),
                             gallery::instantiate("navier"), gallery::instantiate("harmonic_map_flat"),
                             gallery::instantiate("maxwell_vacuum")};
  std::mt19937_64 rng(3);
  for (const auto& s : sys) {
    LagrangianDerived d = derive_lagrangian(s);
    Compiled e(d.energy, s.slots()), l(s.expression, s.slots());
    for (int r = 0; r < 20; ++r) {
      auto p = s.point(random_point(rng, s.dim()));
      CHECK(std::fabs(e(p) - l(p)) <= 1e-12);
    }
  }
}

TEST_CASE("poincare-cartan forms of regular lagrangians are k-symplectic") {
  std::mt19937_64 rng(4);
  for (const char* name : {"navier", "sine_gordon", "minimal_surface", "quadratic"}) {
    SystemDef s = gallery::instantiate(name, {}, Kind::Lagrangian);
    LagrangianDerived d = derive_lagrangian(s);
    std::vector<int> V;
    for (int c = s.offset_fiber(); c < s.dim(); ++c) V.push_back(c);
    for (int r = 0; r < 10; ++r) {
      auto p = s.point(random_point(rng, s.dim()));
      std::vector<TwoForm> forms;
      for (int a = 0; a < s.k(); ++a) forms.push_back(omega_L(s, d, a, p));
      INFO(name);
      CHECK(verify_structure(forms, nullptr, V).pass);
    }
  }
}

TEST_CASE("legendre: forward maps") {
  SystemDef w = gallery::instantiate("wave", {{"n", 2.0}, {"c", 3.0}}, Kind::Lagrangian);
  LegendreMap m = legendre_forward(w);
  Assignment at{{"c", 3.0}, {"v1", 1.0}, {"v2", 2.0}, {"v3", 5.0}, {"q", 0.0}};
  CHECK(eval(m.momenta[0][0], at) == doctest::Approx(-9.0));
  CHECK(eval(m.momenta[1][0], at) == doctest::Approx(-18.0));
  CHECK(eval(m.momenta[2][0], at) == doctest::Approx(5.0));
  CHECK(print(legendre_forward(lag(1, 1, "0.5*v1^2")).momenta[0][0]) == "v1");
  SystemDef sg = gallery::instantiate("sine_gordon", {{"a", 2.0}});
  CHECK(eval(legendre_forward(sg).momenta[1][0], {{"a", 2.0}, {"v2", 1.5}}) == doctest::Approx(-6.0));
}

TEST_CASE("legendre: inversion examples and errors") {
  LegendreMap w = legendre_forward(gallery::instantiate("wave", {{"c", 2.0}}, Kind::Lagrangian));
  std::vector<double> q{0.3}, p{-4.0, 0.5}, g{0.0, 0.0};
  auto v = legendre_invert(w, q, p, g);
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[1] == doctest::Approx(0.5));

  LegendreMap ms = legendre_forward(gallery::instantiate("minimal_surface"));
  std::vector<double> pm{0.6, 0.0};
  auto vm = legendre_invert(ms, q, pm, g);
  CHECK(vm[0] == doctest::Approx(0.75).epsilon(1e-10));
  CHECK(std::fabs(vm[1]) <= 1e-10);

  LegendreMap lin = legendre_forward(lag(1, 1, "v1"));
  std::vector<double> p1{1.0}, g1{0.0};
  CHECK_THROWS_AS(legendre_invert(lin, q, p1, g1), SingularHessian);

  // |p| >= 1 is outside the image of the minimal-surface map
  std::vector<double> far{1.5, 0.0};
  CHECK_THROWS_AS(legendre_invert(ms, q, far, g), Error);
}

TEST_CASE("legendre: round trip and induced hamiltonian") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (const char* name : {"wave", "sine_gordon", "ginzburg_landau", "laplace", "quadratic", "minimal_surface"}) {
    SystemDef s = gallery::instantiate(name, {}, Kind::Lagrangian);
    LegendreMap m = legendre_forward(s);
    InducedHamiltonian H(s);
    const int k = s.k(), n = s.n(), kn = k * n;
    std::vector<Compiled> th;
    for (int a = 0; a < k; ++a)
      for (int i = 0; i < n; ++i) th.emplace_back(m.momenta[a][i], s.slots());
    for (int r = 0; r < 10; ++r) {
      auto c = random_point(rng, s.dim());
      auto sl = s.point(c);
      std::vector<double> q(c.begin(), c.begin() + n), v(c.begin() + n, c.end()), p(kn), guess(kn);
      for (int j = 0; j < kn; ++j) {
        p[j] = th[j](sl);
        guess[j] = v[j] + 0.1 * noise(rng);
      }
      auto back = legendre_invert(m, q, p, guess);
      for (int j = 0; j < kn; ++j) CHECK(std::fabs(back[j] - v[j]) <= 1e-9);

      // dH/dp at FL(q, v) recovers v (central differences on the evaluator)
      std::vector<double> hp(q);
      hp.insert(hp.end(), p.begin(), p.end());
      for (int j = 0; j < kn; ++j) {
        auto f = [&](double t) {
          auto z = hp;
          z[n + j] = t;
          return H(z);
        };
        INFO(name);
        CHECK(std::fabs(oracle::richardson(f, p[j], 1e-3) - v[j]) <= 1e-8);
      }
    }
  }
}

TEST_CASE("legendre: symbolic induced hamiltonians") {
  SystemDef w = gallery::instantiate("wave", {{"c", 2.0}}, Kind::Lagrangian);
  auto h = induced_system(w);
  REQUIRE(h.has_value());
  CHECK(h->kind == Kind::Hamiltonian);
  Expr expected = parse("0.5*(p2^2 - p1^2/c^2)");
  Assignment at{{"c", 2.0}, {"q", 0.1}, {"p1", 0.7}, {"p2", -1.3}};
  CHECK(eval(h->expression, at) == doctest::Approx(eval(expected, at)).epsilon(1e-12));
  CHECK_FALSE(induced_system(gallery::instantiate("minimal_surface")).has_value());
  CHECK_FALSE(induced_system(gallery::instantiate("maxwell_vacuum")).has_value());
  auto free = induced_system(lag(1, 1, "0.5*v1^2"));
  REQUIRE(free.has_value());
  CHECK(eval(free->expression, {{"q", 0.0}, {"p1", 3.0}}) == doctest::Approx(4.5));
}

TEST_CASE("pullback_check over gallery lagrangians") {
  std::mt19937_64 rng(6);
  for (const auto& s : gallery_lagrangians()) {
    for (int r = 0; r < 10; ++r) {
      INFO(s.name);
      CHECK(pullback_check(s, random_point(rng, s.dim())) <= 1e-8);
    }
  }
}
