#include "kfield/structures.hpp"

#include <cmath>
#include <set>

#include "kfield/errors.hpp"

namespace kfield {

CanonicalStructure canonical_forms(int k, int n, bool cosymplectic) {
  if (k < 1 || n < 1) throw DimensionMismatch("k and n must be >= 1");
  CanonicalStructure c;
  int off = cosymplectic ? k : 0;
  c.d = off + n * (k + 1);
  for (int a = 0; a < k; ++a) {
    TwoForm w = TwoForm::Zero(c.d, c.d);
    for (int i = 0; i < n; ++i) {
      int qi = off + i, pi = off + n + a * n + i;
      w(qi, pi) = 1.0;
      w(pi, qi) = -1.0;
    }
    c.omegas.push_back(w);
    if (cosymplectic) c.etas.push_back(OneForm::Unit(c.d, a));
  }
  for (int j = off + n; j < c.d; ++j) c.V.push_back(j);
  return c;
}

int numeric_rank(const Eigen::MatrixXd& m, double rel_tol) {
  Eigen::MatrixXd a = m;
  const Eigen::Index rows = a.rows(), cols = a.cols();
  if (rows == 0 || cols == 0) return 0;
  double mx = a.cwiseAbs().maxCoeff();
  if (mx == 0.0) return 0;
  double tol = rel_tol * mx;
  int rank = 0;
  for (Eigen::Index s = 0; s < std::min(rows, cols); ++s) {
    Eigen::Index pr = s, pc = s;
    double best = a.bottomRightCorner(rows - s, cols - s).cwiseAbs().maxCoeff(&pr, &pc);
    if (best <= tol) break;
    pr += s;
    pc += s;
    a.row(s).swap(a.row(pr));
    a.col(s).swap(a.col(pc));
    for (Eigen::Index r = s + 1; r < rows; ++r) {
      double f = a(r, s) / a(s, s);
      if (f != 0.0) a.row(r).tail(cols - s) -= f * a.row(s).tail(cols - s);
    }
    ++rank;
  }
  return rank;
}

namespace {

void check_inputs(const std::vector<TwoForm>& forms, const std::vector<OneForm>* etas, const std::vector<int>& V,
                  Eigen::Index& d) {
  if (forms.empty()) throw DimensionMismatch("no two-forms given");
  d = forms[0].rows();
  for (const auto& w : forms) {
    if (w.rows() != d || w.cols() != d) throw DimensionMismatch("two-form matrices must be square and of equal size");
    double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
    if ((w + w.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw PreconditionError("two-form matrix is not antisymmetric");
  }
  if (etas) {
    if (etas->size() != forms.size()) throw DimensionMismatch("need one eta per two-form");
    for (const auto& e : *etas)
      if (e.size() != d) throw DimensionMismatch("one-form length differs from d");
  }
  std::set<int> seen;
  for (int i : V)
    if (i < 0 || i >= d || !seen.insert(i).second) throw DimensionMismatch("invalid distribution index");
}

}  // namespace

StructureReport verify_structure(const std::vector<TwoForm>& forms, const std::vector<OneForm>* etas,
                                 const std::vector<int>& V) {
  Eigen::Index d = 0;
  check_inputs(forms, etas, V, d);
  const int k = static_cast<int>(forms.size());
  StructureReport r;
  r.cosymplectic = etas != nullptr;

  r.vanishes_on_V = true;
  for (const auto& w : forms)
    for (int i : V)
      for (int j : V)
        if (std::fabs(w(i, j)) > 1e-12) r.vanishes_on_V = false;

  Eigen::MatrixXd omega_stack(k * d, d);
  for (int a = 0; a < k; ++a) omega_stack.middleRows(a * d, d) = forms[static_cast<std::size_t>(a)];
  int vdim = static_cast<int>(V.size());
  int nf = vdim % k == 0 ? vdim / k : -1;

  if (!r.cosymplectic) {
    r.kernel_intersection_dim = static_cast<int>(d) - numeric_rank(omega_stack);
    r.dimensions_ok = nf >= 1 && d == nf * (k + 1);
    r.pass = r.vanishes_on_V && r.kernel_intersection_dim == 0 && r.dimensions_ok;
    return r;
  }

  Eigen::MatrixXd eta_rows(k, d);
  for (int a = 0; a < k; ++a) eta_rows.row(a) = (*etas)[static_cast<std::size_t>(a)].transpose();
  Eigen::MatrixXd full(k * d + k, d);
  full << omega_stack, eta_rows;
  r.kernel_intersection_dim = static_cast<int>(d) - numeric_rank(full);
  r.ker_omega_dim = static_cast<int>(d) - numeric_rank(omega_stack);
  r.eta_wedge_nonzero = numeric_rank(eta_rows) == k;
  for (int a = 0; a < k; ++a)
    for (int i : V)
      if (std::fabs(eta_rows(a, i)) > 1e-12) r.eta_vanishes_on_V = false;
  r.dimensions_ok = nf >= 1 && d == k + nf * (k + 1);
  r.pass = r.vanishes_on_V && r.eta_vanishes_on_V && r.eta_wedge_nonzero && r.kernel_intersection_dim == 0 &&
           r.ker_omega_dim == k && r.dimensions_ok;
  if (r.pass) r.reeb = reeb_fields(*etas, forms);
  return r;
}

Eigen::MatrixXd reeb_fields(const std::vector<OneForm>& etas, const std::vector<TwoForm>& forms) {
  if (etas.empty() || etas.size() != forms.size()) throw DimensionMismatch("need k etas and k two-forms");
  const Eigen::Index d = forms[0].rows();
  const Eigen::Index k = static_cast<Eigen::Index>(forms.size());
  Eigen::MatrixXd A(k + k * d, d);
  for (Eigen::Index b = 0; b < k; ++b) {
    if (etas[static_cast<std::size_t>(b)].size() != d) throw DimensionMismatch("one-form length differs from d");
    A.row(b) = etas[static_cast<std::size_t>(b)].transpose();
    // i_R Omega^b = 0  <=>  Omega^b^T R = 0
    A.middleRows(k + b * d, d) = forms[static_cast<std::size_t>(b)].transpose();
  }
  if (numeric_rank(A) != d) throw NoUniqueReeb("Reeb system is rank deficient; solution not unique");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd R(k, d);
  for (Eigen::Index a = 0; a < k; ++a) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(A.rows());
    rhs(a) = 1.0;
    Eigen::VectorXd sol = qr.solve(rhs);
    if ((A * sol - rhs).lpNorm<Eigen::Infinity>() > 1e-10)
      throw NoUniqueReeb("Reeb system is inconsistent (residual above 1e-10)");
    R.row(a) = sol.transpose();
  }
  return R;
}

}  // namespace kfield
