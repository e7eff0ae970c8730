#include "misc/pde_solver.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>

#include "misc/errors.hpp"

namespace misc {

std::int64_t nodes_per_axis(int alpha) {
  if (alpha < 1) throw std::invalid_argument("spatial levels start at 1");
  if (alpha > 40) throw std::invalid_argument("spatial level too large");
  return 3 * (std::int64_t{1} << alpha) - 1;
}

double mesh_width(int alpha) { return std::ldexp(1.0 / 3.0, -alpha); }

std::int64_t unknowns(const std::vector<int>& alpha) {
  std::int64_t n = 1;
  for (int a : alpha) n *= nodes_per_axis(a);
  return n;
}

Preconditioner parse_preconditioner(const std::string& name) {
  if (name == "jacobi") return Preconditioner::jacobi;
  if (name == "poisson") return Preconditioner::poisson;
  throw ConfigError("unknown preconditioner '" + name + "' (expected jacobi or poisson)");
}

std::vector<std::int64_t> DiscreteSolution::shape() const {
  std::vector<std::int64_t> s;
  for (int a : alpha) s.push_back(nodes_per_axis(a));
  return s;
}

namespace {

// Value of a at a face midpoint: along `axis` the index counts faces
// (0..n), along every other axis it counts interior nodes.
using FaceSampler = std::function<double(int axis, const std::int64_t* idx)>;

struct Grid {
  std::vector<std::int64_t> n;
  std::vector<std::int64_t> stride;
  std::vector<double> h;
  std::int64_t size = 1;

  explicit Grid(const std::vector<int>& alpha) {
    const std::size_t d = alpha.size();
    n.resize(d);
    stride.resize(d);
    h.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      n[i] = nodes_per_axis(alpha[i]);
      h[i] = mesh_width(alpha[i]);
      size *= n[i];
    }
    std::int64_t s = 1;
    for (std::size_t i = d; i-- > 0;) {
      stride[i] = s;
      s *= n[i];
    }
  }
};

// Advances a row-major multi-index; returns false after the last entry.
bool advance(std::vector<std::int64_t>& idx, const std::vector<std::int64_t>& extent) {
  for (std::size_t i = extent.size(); i-- > 0;) {
    if (++idx[i] < extent[i]) return true;
    idx[i] = 0;
  }
  return false;
}

// Stencil in the form (A u)_p = diag_p u_p - sum_i (off_i[p] u_{p - s_i} + off_i[p + s_i] u_{p + s_i}),
// where off_i[p] is zero on the first layer along axis i.
struct Stencil {
  Grid grid;
  std::vector<double> diag;
  std::vector<std::vector<double>> off;
  double log_mean = 0.0;  // mean of log a over all faces

  Stencil(const std::vector<int>& alpha, const FaceSampler& sample) : grid(alpha) {
    const std::size_t d = alpha.size();
    const auto N = static_cast<std::size_t>(grid.size);
    diag.assign(N, 0.0);
    off.assign(d, std::vector<double>(N, 0.0));
    double log_sum = 0.0;
    std::int64_t face_count = 0;

    for (std::size_t axis = 0; axis < d; ++axis) {
      std::vector<std::int64_t> ext = grid.n;
      ext[axis] += 1;
      std::vector<std::int64_t> fstride(d);
      std::int64_t s = 1;
      for (std::size_t i = d; i-- > 0;) {
        fstride[i] = s;
        s *= ext[i];
      }
      std::vector<double> faces(static_cast<std::size_t>(s));
      std::vector<std::int64_t> idx(d, 0);
      std::size_t f = 0;
      do {
        const double v = sample(static_cast<int>(axis), idx.data());
        if (!(v > 0.0) || !std::isfinite(v)) {
          throw NumericalError("coefficient is not positive and finite at a face midpoint");
        }
        faces[f++] = v;
        log_sum += std::log(v);
      } while (advance(idx, ext));
      face_count += s;

      const double inv_h2 = 1.0 / (grid.h[axis] * grid.h[axis]);
      std::fill(idx.begin(), idx.end(), 0);
      std::size_t p = 0;
      do {
        std::int64_t fl = 0;
        for (std::size_t i = 0; i < d; ++i) fl += idx[i] * fstride[i];
        const double left = faces[static_cast<std::size_t>(fl)];
        const double right = faces[static_cast<std::size_t>(fl + fstride[axis])];
        diag[p] += (left + right) * inv_h2;
        if (idx[axis] > 0) off[axis][p] = left * inv_h2;
        ++p;
      } while (advance(idx, grid.n));
    }
    log_mean = log_sum / static_cast<double>(face_count);
  }

  void apply(const std::vector<double>& u, std::vector<double>& out) const {
    const std::size_t N = u.size();
    for (std::size_t p = 0; p < N; ++p) out[p] = diag[p] * u[p];
    for (std::size_t axis = 0; axis < off.size(); ++axis) {
      const auto s = static_cast<std::size_t>(grid.stride[axis]);
      const double* o = off[axis].data();
      for (std::size_t p = s; p < N; ++p) {
        out[p] -= o[p] * u[p - s];
        out[p - s] -= o[p] * u[p];
      }
    }
  }
};

std::string format_residual(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Sine-transform plans keyed by grid shape. FFTW's planner is not
// reentrant, execution on distinct arrays is.
class SinePlans {
 public:
  struct Entry {
    fftw_plan plan;
  };

  static SinePlans& instance() {
    static SinePlans plans;
    return plans;
  }

  fftw_plan get(const std::vector<std::int64_t>& n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<int> dims(n.begin(), n.end());
    std::vector<fftw_r2r_kind> kinds(n.size(), FFTW_RODFT00);
    const auto total = static_cast<std::size_t>(
        std::accumulate(n.begin(), n.end(), std::int64_t{1}, std::multiplies<>()));
    double* buf = fftw_alloc_real(total);
    fftw_plan plan = fftw_plan_r2r(static_cast<int>(dims.size()), dims.data(), buf, buf,
                                   kinds.data(), FFTW_ESTIMATE);
    fftw_free(buf);
    plans_.emplace(n, plan);
    return plan;
  }

  ~SinePlans() {
    for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::vector<std::int64_t>, fftw_plan> plans_;
};

// Exact inverse of the constant-coefficient operator exp(log_mean) * (-Laplacian).
class PoissonInverse {
 public:
  explicit PoissonInverse(const Stencil& st) : grid_(st.grid) {
    plan_ = SinePlans::instance().get(grid_.n);
    const std::size_t d = grid_.n.size();
    const auto N = static_cast<std::size_t>(grid_.size);
    std::vector<std::vector<double>> lambda(d);
    double norm = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      const auto n = grid_.n[i];
      norm *= 2.0 * static_cast<double>(n + 1);
      for (std::int64_t k = 0; k < n; ++k) {
        const double s = std::sin(std::numbers::pi * static_cast<double>(k + 1) /
                                  (2.0 * static_cast<double>(n + 1)));
        lambda[i].push_back(4.0 * s * s / (grid_.h[i] * grid_.h[i]));
      }
    }
    const double scale = std::exp(st.log_mean) * norm;
    scale_.resize(N);
    std::vector<std::int64_t> idx(d, 0);
    std::size_t p = 0;
    do {
      double ev = 0.0;
      for (std::size_t i = 0; i < d; ++i) ev += lambda[i][static_cast<std::size_t>(idx[i])];
      scale_[p++] = 1.0 / (ev * scale);
    } while (advance(idx, grid_.n));
    buf_ = fftw_alloc_real(N);
  }
  ~PoissonInverse() { fftw_free(buf_); }
  PoissonInverse(const PoissonInverse&) = delete;
  PoissonInverse& operator=(const PoissonInverse&) = delete;

  void apply(const std::vector<double>& r, std::vector<double>& z) {
    const std::size_t N = r.size();
    std::copy(r.begin(), r.end(), buf_);
    fftw_execute_r2r(plan_, buf_, buf_);
    for (std::size_t p = 0; p < N; ++p) buf_[p] *= scale_[p];
    fftw_execute_r2r(plan_, buf_, buf_);
    std::copy(buf_, buf_ + N, z.begin());
  }

 private:
  const Grid& grid_;
  fftw_plan plan_;
  std::vector<double> scale_;
  double* buf_ = nullptr;
};

DiscreteSolution solve_tridiagonal(const std::vector<int>& alpha, const Stencil& st) {
  const std::size_t n = st.diag.size();
  const auto& off = st.off[0];
  std::vector<double> c(n), rhs(n, 1.0), u(n);
  // Thomas algorithm; sub- and super-diagonals are both -off.
  double denom = st.diag[0];
  c[0] = n > 1 ? -off[1] / denom : 0.0;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = st.diag[i] + off[i] * c[i - 1];
    c[i] = i + 1 < n ? -off[i + 1] / denom : 0.0;
    rhs[i] = (1.0 + off[i] * rhs[i - 1]) / denom;
  }
  u[n - 1] = rhs[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) u[i] = rhs[i] - c[i] * u[i + 1];

  std::vector<double> Au(n);
  st.apply(u, Au);
  double rr = 0.0;
  for (std::size_t i = 0; i < n; ++i) rr += (1.0 - Au[i]) * (1.0 - Au[i]);
  DiscreteSolution sol;
  sol.alpha = alpha;
  sol.values = std::move(u);
  sol.residual = std::sqrt(rr / static_cast<double>(n));
  sol.iterations = 1;
  return sol;
}

DiscreteSolution solve_cg(const std::vector<int>& alpha, const Stencil& st,
                          const SolverOptions& opts) {
  const auto N = static_cast<std::size_t>(st.grid.size);
  const std::vector<double> b(N, 1.0);
  const double bnorm = norm2(b);
  std::vector<double> u(N, 0.0), r = b, z(N), p(N), Ap(N);

  std::unique_ptr<PoissonInverse> poisson;
  if (opts.preconditioner == Preconditioner::poisson) poisson = std::make_unique<PoissonInverse>(st);
  auto precondition = [&](const std::vector<double>& in, std::vector<double>& out) {
    if (poisson) {
      poisson->apply(in, out);
    } else {
      for (std::size_t i = 0; i < N; ++i) out[i] = in[i] / st.diag[i];
    }
  };

  // Roundoff floor of the relative residual: eps |A| |u| / |b|, |A| <= 2 max diag.
  const double a_norm = 2.0 * *std::max_element(st.diag.begin(), st.diag.end());
  auto floor_for = [&](const std::vector<double>& v) {
    return 64.0 * std::numeric_limits<double>::epsilon() * a_norm * norm2(v) / bnorm;
  };

  precondition(r, z);
  p = z;
  double rz = dot(r, z);
  int it = 0;
  double rel = 1.0;
  double target = opts.tolerance;
  while (it < opts.max_iterations) {
    st.apply(p, Ap);
    const double step = rz / dot(p, Ap);
    for (std::size_t i = 0; i < N; ++i) {
      u[i] += step * p[i];
      r[i] -= step * Ap[i];
    }
    ++it;
    rel = norm2(r) / bnorm;
    if (rel <= opts.tolerance) break;
    target = std::max(opts.tolerance, floor_for(u));
    if (rel <= target) break;
    precondition(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < N; ++i) p[i] = z[i] + beta * p[i];
  }

  // Confirm against the true residual rather than the recursively updated one.
  st.apply(u, Ap);
  double rr = 0.0;
  for (std::size_t i = 0; i < N; ++i) rr += (b[i] - Ap[i]) * (b[i] - Ap[i]);
  const double true_rel = std::sqrt(rr) / bnorm;
  target = std::max(opts.tolerance, floor_for(u));
  if (rel > target || true_rel > 10.0 * target) {
    throw NumericalError("conjugate gradients stopped after " + std::to_string(it) +
                         " iterations with relative residual " + format_residual(true_rel));
  }
  DiscreteSolution sol;
  sol.alpha = alpha;
  sol.values = std::move(u);
  sol.residual = true_rel;
  sol.iterations = it;
  return sol;
}

DiscreteSolution solve_stencil(const std::vector<int>& alpha, const FaceSampler& sample,
                               const SolverOptions& opts) {
  if (alpha.empty()) throw std::invalid_argument("spatial level vector is empty");
  Stencil st(alpha, sample);
  if (alpha.size() == 1) return solve_tridiagonal(alpha, st);
  return solve_cg(alpha, st, opts);
}

}  // namespace

DiscreteSolution solve(const std::vector<int>& alpha, const Coefficient& a,
                       const SolverOptions& opts) {
  const std::size_t d = alpha.size();
  std::vector<double> h(d);
  for (std::size_t i = 0; i < d; ++i) h[i] = mesh_width(alpha[i]);
  std::vector<double> x(d);
  auto sample = [&](int axis, const std::int64_t* idx) {
    for (std::size_t i = 0; i < d; ++i) {
      const double offset = static_cast<int>(i) == axis ? 0.5 : 1.0;
      x[i] = (static_cast<double>(idx[i]) + offset) * h[i];
    }
    return a(x.data());
  };
  return solve_stencil(alpha, sample, opts);
}

DiscreteSolution solve(const std::vector<int>& alpha, const SparsePoint& y,
                       const RandomField& field, const SolverOptions& opts) {
  const std::size_t d = alpha.size();
  if (static_cast<int>(d) != field.dim()) {
    throw std::invalid_argument("spatial level vector does not match the field dimension");
  }
  field.check_point(y);

  // node[t][i][m] and face[t][i][m]: one-axis factors of active mode t,
  // with y_t * A_t folded into axis 0.
  const std::size_t T = y.size();
  std::vector<std::vector<std::vector<double>>> node(T), face(T);
  for (std::size_t t = 0; t < T; ++t) {
    const Mode& mode = field.modes()[static_cast<std::size_t>(y[t].first - 1)];
    node[t].resize(d);
    face[t].resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      const auto n = nodes_per_axis(alpha[i]);
      const double h = mesh_width(alpha[i]);
      const double c = i == 0 ? y[t].second * mode.amplitude : 1.0;
      for (std::int64_t m = 0; m <= n; ++m) {
        if (m < n) {
          node[t][i].push_back(c * mode_factor(mode, static_cast<int>(i), (m + 1.0) * h));
        }
        face[t][i].push_back(c * mode_factor(mode, static_cast<int>(i), (m + 0.5) * h));
      }
    }
  }
  auto sample = [&](int axis, const std::int64_t* idx) {
    double kappa = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      double v = 1.0;
      for (std::size_t i = 0; i < d; ++i) {
        const auto& table = static_cast<int>(i) == axis ? face[t][i] : node[t][i];
        v *= table[static_cast<std::size_t>(idx[i])];
      }
      kappa += v;
    }
    return std::exp(kappa);
  };
  return solve_stencil(alpha, sample, opts);
}

QoISpec QoISpec::defaults(int d) {
  QoISpec spec;
  if (d == 1) {
    spec.x0 = {0.3};
  } else if (d == 3) {
    spec.x0 = {0.3, 0.2, 0.6};
  } else {
    spec.x0.assign(static_cast<std::size_t>(d), 0.5);
  }
  return spec;
}

double qoi(const DiscreteSolution& u, const QoISpec& spec) {
  const std::size_t d = u.alpha.size();
  if (spec.x0.size() != d) throw std::invalid_argument("QoI center does not match dimension");
  if (!(spec.sigma > 0.0)) throw std::invalid_argument("QoI width must be positive");
  const auto shape = u.shape();
  std::vector<std::vector<double>> w(d);
  double cell = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double h = mesh_width(u.alpha[i]);
    cell *= h;
    for (std::int64_t m = 0; m < shape[i]; ++m) {
      const double dx = (m + 1.0) * h - spec.x0[i];
      w[i].push_back(std::exp(-dx * dx / (2.0 * spec.sigma * spec.sigma)));
    }
  }
  const double scale =
      10.0 / std::pow(spec.sigma * std::sqrt(2.0 * std::numbers::pi), static_cast<double>(d));
  std::vector<std::int64_t> idx(d, 0);
  double sum = 0.0;
  std::size_t p = 0;
  do {
    double weight = 1.0;
    for (std::size_t i = 0; i < d; ++i) weight *= w[i][static_cast<std::size_t>(idx[i])];
    sum += weight * u.values[p++];
  } while (advance(idx, shape));
  return scale * cell * sum;
}

double solve_qoi(const std::vector<int>& alpha, const SparsePoint& y, const RandomField& field,
                 const QoISpec& spec, const SolverOptions& opts) {
  return qoi(solve(alpha, y, field, opts), spec);
}

}  // namespace misc
