#pragma once
// Oracles shared by the unit and acceptance suites. Nothing here calls the
// library routine it is used to check.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "kfield/expr.hpp"

namespace oracle {

// Random expression over the given variables, depth <= max_depth.
inline kfield::Expr random_expr(std::mt19937_64& rng, const std::vector<std::string>& vars, int max_depth) {
  using kfield::Expr;
  using kfield::Op;
  std::uniform_int_distribution<int> pick(0, 99);
  if (max_depth <= 1 || pick(rng) < 20) {
    if (pick(rng) < 35) {
      std::uniform_real_distribution<double> c(-3.0, 3.0);
      return Expr(std::round(c(rng) * 100.0) / 100.0);
    }
    return Expr::var(vars[static_cast<std::size_t>(pick(rng)) % vars.size()]);
  }
  int r = pick(rng);
  if (r < 40) {
    static const Op bin[] = {Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Add, Op::Mul};
    Op op = bin[static_cast<std::size_t>(pick(rng)) % 6];
    return Expr::binary(op, random_expr(rng, vars, max_depth - 1), random_expr(rng, vars, max_depth - 1));
  }
  if (r < 52) {
    // integer or positive real exponent
    int e = pick(rng) % 4;
    Expr ex = e == 3 ? Expr(0.5 + (pick(rng) % 3)) : Expr(static_cast<double>(e + 1));
    if (pick(rng) < 20) ex = Expr::unary(Op::Neg, ex);
    return Expr::binary(Op::Pow, random_expr(rng, vars, max_depth - 1), ex);
  }
  if (r < 56) {
    // variable exponent on a positive base
    return Expr::binary(Op::Pow, Expr::unary(Op::Exp, random_expr(rng, vars, max_depth - 2)),
                        random_expr(rng, vars, max_depth - 2));
  }
  static const Op un[] = {Op::Neg, Op::Sin, Op::Cos, Op::Tan, Op::Atan, Op::Exp, Op::Log, Op::Sqrt, Op::Tanh};
  return Expr::unary(un[static_cast<std::size_t>(pick(rng)) % 9], random_expr(rng, vars, max_depth - 1));
}

// Central difference with one Richardson step.
template <class F>
double richardson(F&& f, double x, double h) {
  auto d = [&](double s) { return (f(x + s) - f(x - s)) / (2.0 * s); };
  return (4.0 * d(h / 2.0) - d(h)) / 3.0;
}

// Ridders' extrapolated central difference: the tableau shrinks h by 1.4 per
// column and keeps the entry with the smallest error estimate.
struct Derivative {
  double value;
  double error;
};

template <class F>
Derivative ridders(F&& f, double x, double h) {
  constexpr int N = 10;
  constexpr double con = 1.4, con2 = con * con;
  double a[N][N];
  a[0][0] = (f(x + h) - f(x - h)) / (2.0 * h);
  Derivative best{a[0][0], 1e300};
  for (int i = 1; i < N; ++i) {
    h /= con;
    a[0][i] = (f(x + h) - f(x - h)) / (2.0 * h);
    double fac = con2;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
      fac *= con2;
      double err = std::max(std::fabs(a[j][i] - a[j - 1][i]), std::fabs(a[j][i] - a[j - 1][i - 1]));
      if (err <= best.error) best = {a[j][i], err};
    }
    if (std::fabs(a[i][i] - a[i - 1][i - 1]) >= 2.0 * best.error) break;
  }
  return best;
}

// Brute-force rank: Gaussian elimination on a copy with partial pivoting by
// rows, tolerance relative to the largest entry.
inline int brute_rank(std::vector<std::vector<double>> a, double rel = 1e-10) {
  if (a.empty()) return 0;
  std::size_t rows = a.size(), cols = a[0].size();
  double mx = 0.0;
  for (auto& r : a)
    for (double v : r) mx = std::max(mx, std::fabs(v));
  if (mx == 0.0) return 0;
  double tol = rel * mx;
  int rank = 0;
  std::size_t row = 0;
  for (std::size_t c = 0; c < cols && row < rows; ++c) {
    std::size_t best = row;
    for (std::size_t r = row; r < rows; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[best][c])) best = r;
    if (std::fabs(a[best][c]) <= tol) continue;
    std::swap(a[row], a[best]);
    for (std::size_t r = row + 1; r < rows; ++r) {
      double f = a[r][c] / a[row][c];
      for (std::size_t j = c; j < cols; ++j) a[r][j] -= f * a[row][j];
    }
    ++row;
    ++rank;
  }
  return rank;
}

// Laplace cofactor expansion.
inline double brute_det(const std::vector<std::vector<double>>& m) {
  std::size_t n = m.size();
  if (n == 1) return m[0][0];
  double det = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<double>> sub;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<double> row;
      for (std::size_t j = 0; j < n; ++j)
        if (j != c) row.push_back(m[r][j]);
      sub.push_back(row);
    }
    det += (c % 2 ? -1.0 : 1.0) * m[0][c] * brute_det(sub);
  }
  return det;
}

// Least-squares slope of log2(err) against refinement level.
inline double order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

}  // namespace oracle
