#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "misc/quadrature.hpp"
#include "misc/random_field.hpp"

namespace misc {

/// Interior nodes along an axis at level alpha: 3 * 2^alpha - 1.
std::int64_t nodes_per_axis(int alpha);
/// Mesh width (1/3) 2^-alpha.
double mesh_width(int alpha);
/// prod_i nodes_per_axis(alpha_i); the work unit of one solve.
std::int64_t unknowns(const std::vector<int>& alpha);

enum class Preconditioner { jacobi, poisson };

struct SolverOptions {
  double tolerance = 1e-10;
  int max_iterations = 5000;
  Preconditioner preconditioner = Preconditioner::poisson;
};

Preconditioner parse_preconditioner(const std::string& name);

struct DiscreteSolution {
  std::vector<int> alpha;
  std::vector<double> values;  // row-major, last axis fastest
  double residual = 0.0;       // relative residual of the accepted iterate
  int iterations = 0;

  std::vector<std::int64_t> shape() const;
};

/// Coefficient a(x) on [0,1]^d; x has d entries.
using Coefficient = std::function<double(const double* x)>;

/// Flux-form centered differences for -div(a grad u) = 1 with u = 0 on the
/// boundary, a sampled at cell-face midpoints.
DiscreteSolution solve(const std::vector<int>& alpha, const Coefficient& a,
                       const SolverOptions& opts = {});

/// Same system with a = exp(kappa(., y)); kappa is tabulated per axis.
DiscreteSolution solve(const std::vector<int>& alpha, const SparsePoint& y,
                       const RandomField& field, const SolverOptions& opts = {});

struct QoISpec {
  double sigma = 0.2;
  std::vector<double> x0;

  /// sigma = 0.2 and x0 = 0.3 (d = 1), (0.3, 0.2, 0.6) (d = 3), 0.5 elsewhere.
  static QoISpec defaults(int d);
};

/// 10 / (sigma sqrt(2 pi))^d * integral u exp(-|x - x0|^2 / (2 sigma^2)),
/// trapezoidal on the solution grid.
double qoi(const DiscreteSolution& u, const QoISpec& spec);

double solve_qoi(const std::vector<int>& alpha, const SparsePoint& y, const RandomField& field,
                 const QoISpec& spec, const SolverOptions& opts = {});

}  // namespace misc
