#include <cmath>

#include "doctest.h"
#include "kfield/errors.hpp"
#include "kfield/structures.hpp"
#include "support.hpp"

using namespace kfield;

namespace {

std::vector<std::vector<double>> rows(const std::vector<TwoForm>& forms, const std::vector<OneForm>* etas) {
  std::vector<std::vector<double>> out;
  for (const auto& A : forms)
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
      std::vector<double> row;
      for (Eigen::Index c = 0; c < A.cols(); ++c) row.push_back(A(r, c));
      out.push_back(row);
    }
  if (etas)
    for (const auto& e : *etas) out.emplace_back(e.data(), e.data() + e.size());
  return out;
}

}  // namespace

TEST_CASE("canonical forms: small cases") {
  auto c = canonical_forms(2, 1, false);
  CHECK(c.d == 3);
  Eigen::Matrix3d w1;
  w1 << 0, 1, 0, -1, 0, 0, 0, 0, 0;
  CHECK(c.omegas[0] == w1);
  auto m = canonical_forms(1, 1, false);
  Eigen::Matrix2d j;
  j << 0, 1, -1, 0;
  CHECK(m.omegas[0] == j);
  auto cc = canonical_forms(2, 2, true);
  CHECK(cc.d == 8);
  CHECK(cc.etas[0] == Eigen::VectorXd::Unit(8, 0));
  CHECK(cc.etas[1] == Eigen::VectorXd::Unit(8, 1));
}

TEST_CASE("verify_structure: canonical models against a brute-force rank") {
  for (int k = 1; k <= 3; ++k)
    for (int n = 1; n <= 3; ++n) {
      auto c = canonical_forms(k, n, false);
      auto r = verify_structure(c.omegas, nullptr, c.V);
      CHECK(r.pass);
      CHECK(r.vanishes_on_V);
      CHECK(r.kernel_intersection_dim == c.d - oracle::brute_rank(rows(c.omegas, nullptr)));
      CHECK(r.kernel_intersection_dim == 0);

      auto cc = canonical_forms(k, n, true);
      auto rc = verify_structure(cc.omegas, &cc.etas, cc.V);
      CHECK(rc.pass);
      CHECK(rc.ker_omega_dim == k);
      CHECK(rc.ker_omega_dim == cc.d - oracle::brute_rank(rows(cc.omegas, nullptr)));
      CHECK(rc.kernel_intersection_dim == 0);
      CHECK((rc.reeb - Eigen::MatrixXd::Identity(k, cc.d)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("verify_structure: degenerate and scaled inputs") {
  auto c = canonical_forms(2, 1, false);
  auto broken = c.omegas;
  broken[1].setZero();
  auto r = verify_structure(broken, nullptr, c.V);
  CHECK_FALSE(r.pass);
  CHECK(r.kernel_intersection_dim == 1);
  CHECK(r.kernel_intersection_dim == c.d - oracle::brute_rank(rows(broken, nullptr)));

  auto cc = canonical_forms(2, 2, true);
  auto base = verify_structure(cc.omegas, &cc.etas, cc.V);
  auto scaled = cc.omegas;
  for (auto& A : scaled) A *= -3.5;
  auto rs = verify_structure(scaled, &cc.etas, cc.V);
  CHECK(rs.pass == base.pass);
  CHECK(rs.ker_omega_dim == base.ker_omega_dim);
  CHECK(rs.kernel_intersection_dim == base.kernel_intersection_dim);

  auto asym = c.omegas;
  asym[0](0, 0) = 1.0;
  CHECK_THROWS_AS(verify_structure(asym, nullptr, c.V), PreconditionError);
  std::vector<TwoForm> mixed{c.omegas[0], Eigen::MatrixXd::Zero(4, 4)};
  CHECK_THROWS_AS(verify_structure(mixed, nullptr, c.V), DimensionMismatch);
}

TEST_CASE("reeb_fields: canonical, mechanics and permuted") {
  auto c = canonical_forms(2, 1, true);
  Eigen::MatrixXd R = reeb_fields(c.etas, c.omegas);
  CHECK((R - Eigen::MatrixXd::Identity(2, c.d)).cwiseAbs().maxCoeff() <= 1e-12);

  auto t = canonical_forms(1, 2, true);
  CHECK((reeb_fields(t.etas, t.omegas) - Eigen::MatrixXd::Identity(1, t.d)).cwiseAbs().maxCoeff() <= 1e-12);

  // relabel coordinates by a permutation P; Reeb rows transform as P R
  REQUIRE(c.d == 5);
  Eigen::VectorXi perm(c.d);
  perm << 4, 2, 0, 3, 1;
  Eigen::PermutationMatrix<Eigen::Dynamic> P(perm);
  std::vector<OneForm> etas;
  std::vector<TwoForm> forms;
  for (const auto& e : c.etas) etas.push_back(P * e);
  for (const auto& A : c.omegas) forms.push_back(P * A * P.transpose());
  Eigen::MatrixXd Rp = reeb_fields(etas, forms);
  for (int a = 0; a < 2; ++a) {
    Eigen::VectorXd expect = P * Eigen::VectorXd::Unit(c.d, a);
    CHECK((Rp.row(a).transpose() - expect).cwiseAbs().maxCoeff() <= 1e-12);
    for (int b = 0; b < 2; ++b) CHECK(std::fabs(etas[b].dot(Rp.row(a)) - (a == b)) <= 1e-10);
    for (const auto& A : forms) CHECK((A * Rp.row(a).transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  }

  auto broken = c.omegas;
  broken[1].setZero();
  CHECK_THROWS_AS(reeb_fields(c.etas, broken), NoUniqueReeb);
}
