#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kfield/model.hpp"

namespace kfield {

struct Axis {
  double min = 0.0, max = 1.0;
  int count = 3;
  double h() const { return (max - min) / (count - 1); }
  double at(int i) const { return i == count - 1 ? max : min + i * h(); }
};

// Row-major, last axis fastest.
struct Grid {
  std::vector<Axis> axes;

  // "min:max:count[,...]"
  static Grid parse(const std::string& spec);
  int k() const { return static_cast<int>(axes.size()); }
  std::size_t size() const;
  std::size_t stride(int axis) const;
  std::vector<int> index(std::size_t flat) const;
  std::vector<double> point(std::size_t flat) const;
  bool interior(std::size_t flat) const;
  void check() const;  // GridTooSmall / SchemaError
};

using Field = std::vector<double>;

struct GridSection {
  Grid grid;
  int n = 1;
  std::vector<Field> psi;                      // [i]
  std::vector<std::vector<Field>> momenta;     // [a][i], optional
  std::vector<std::vector<Field>> velocities;  // [i][a], optional
};

// f(x, out): out gets n values (psi) or k*n values alpha-major (momenta/velocities).
using PointFn = std::function<void(std::span<const double> x, std::span<double> out)>;

GridSection sample_section(const Grid& g, int n, const PointFn& psi, const PointFn& momenta = nullptr,
                           const PointFn& velocities = nullptr);

// Central differences; entries without a full stencil are NaN.
Field fd_partial(const Grid& g, const Field& f, int axis, int order);
Field fd_partial(const GridSection& sec, int field, int axis, int order);
// Nested first differences, axis a then axis b.
Field fd_mixed(const Grid& g, const Field& f, int a, int b);

struct ResidualFamily {
  std::string name;  // velocity | trace | euler_lagrange | prolongation
  double max = 0.0;
  double l2 = 0.0;  // RMS over interior points and equations
};

struct ResidualReport {
  std::vector<ResidualFamily> families;
  double max() const;
};

// HDW families need momenta (MissingField otherwise); EL synthesizes velocities.
ResidualReport residual_on_grid(const GridSection& sec, const SystemDef& s);

enum class Boundary { Dirichlet, Periodic };

// Pointwise acceleration psi_tt = F. d1[a*n+i] and d2[(a*k+b)*n+i] hold the
// spatial partials; time-axis entries are zero.
using AccelFn = std::function<void(const double* x, const double* psi, const double* d1, const double* d2,
                                   double* out)>;

struct ExplicitRhs {
  AccelFn f;
  std::vector<double> speeds;  // per axis, for the CFL check; time entry ignored
};

struct HyperbolicOptions {
  int time_axis = 0;
  Boundary boundary = Boundary::Dirichlet;
  double cfl_limit = 0.9;
  // Dirichlet values at (x including t); default holds the initial boundary.
  PointFn dirichlet = nullptr;
};

// Leapfrog over the whole grid; the time axis carries count-1 steps.
// PreconditionError when the system does not have the form
// W_tt psi_tt = F (constant time block, no time cross terms).
GridSection evolve_hyperbolic(const SystemDef& s, const PointFn& psi0, const PointFn& psit0, const Grid& g,
                              const HyperbolicOptions& opt);
GridSection evolve_hyperbolic(const ExplicitRhs& rhs, int n, const PointFn& psi0, const PointFn& psit0,
                              const Grid& g, const HyperbolicOptions& opt);

// The time step and CFL number that evolve_hyperbolic would use.
double cfl_number(const SystemDef& s, const Grid& g, int time_axis);

struct RelaxResult {
  GridSection section;
  int sweeps = 0;
  double residual = 0.0;
};

// Gauss-Seidel in lexicographic order with one local Newton step per point.
// boundary gives Dirichlet values; guess (optional) the interior start.
RelaxResult relax_elliptic(const SystemDef& s, const PointFn& boundary, const Grid& g, double tol, int max_iters,
                           const PointFn& guess = nullptr);

std::string write_csv(const GridSection& sec);
GridSection read_csv(const std::string& text);

}  // namespace kfield
