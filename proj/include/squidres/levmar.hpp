#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "squidres/errors.hpp"

namespace squidres {

/// Levenberg-Marquardt stopping rules. Tolerances are deliberately tight:
/// the objectives here are cheap and the tests need deterministic floors.
struct FitOptions {
  int max_iter = 200;
  double step_tol = 1e-10;   // relative parameter step
  double grad_tol = 1e-10;   // cosine of residual/Jacobian-column angle
  double cost_tol = 1e-12;   // relative cost-reduction floor
  double rel_fd_step = 1e-6; // central-difference step, relative
};

struct LevmarResult {
  std::vector<double> params;
  std::vector<double> stderrs;  // 1-sigma estimates; empty when unavailable
  double residual_norm = 0.0;   // ||r||_2 at the returned point
  double grad_norm = 0.0;       // final scaled-gradient (cosine) measure
  int n_iter = 0;
  bool converged = false;
};

namespace detail {

/// Cholesky factorization in place, lower triangle. Returns false when the
/// matrix is not positive definite.
inline bool cholesky(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    const double lj = std::sqrt(d);
    a[j * n + j] = lj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / lj;
    }
  }
  return true;
}

/// Solve L L^T x = b given the Cholesky factor from above.
inline void cholesky_solve(const std::vector<double>& l, std::size_t n,
                           std::vector<double>& x) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * x[k];
    x[i] = s / l[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l[k * n + ii] * x[k];
    x[ii] = s / l[ii * n + ii];
  }
}

inline double squared_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace detail

/// Damped least squares over a dense numerically-differentiated Jacobian.
/// residual_fn maps a parameter vector to a residual vector of fixed length
/// m >= n. Normal equations are Jacobi-scaled, so wildly different parameter
/// magnitudes (Hz next to dimensionless) are fine. Non-convergence is
/// reported through the flag, never an exception.
template <typename F>
[[nodiscard]] LevmarResult levmar(F&& residual_fn, std::vector<double> p0,
                                  const FitOptions& opt = {}) {
  const std::size_t n = p0.size();
  if (n == 0) throw std::invalid_argument("levmar: no parameters");

  std::vector<double> r = residual_fn(p0);
  const std::size_t m = r.size();
  if (m < n) {
    throw std::invalid_argument("levmar: fewer residuals than parameters");
  }
  double cost = detail::squared_norm(r);
  if (!std::isfinite(cost)) {
    throw std::invalid_argument("levmar: non-finite residual at initial guess");
  }

  LevmarResult res;
  res.params = p0;

  std::vector<double> jac(m * n);        // row-major, d r_i / d p_j
  std::vector<double> a(n * n), l(n * n);
  std::vector<double> g(n), d(n), step(n), trial(n);
  double lambda = 1e-3;

  auto fill_jacobian = [&](const std::vector<double>& p) {
    std::vector<double> pp = p;
    for (std::size_t j = 0; j < n; ++j) {
      const double h = p[j] != 0.0 ? opt.rel_fd_step * std::abs(p[j])
                                   : opt.rel_fd_step;
      pp[j] = p[j] + h;
      std::vector<double> rp = residual_fn(pp);
      pp[j] = p[j] - h;
      std::vector<double> rm = residual_fn(pp);
      pp[j] = p[j];
      if (rp.size() != m || rm.size() != m) {
        throw std::invalid_argument("levmar: residual length changed");
      }
      const double inv2h = 1.0 / (2.0 * h);
      for (std::size_t i = 0; i < m; ++i) {
        jac[i * n + j] = (rp[i] - rm[i]) * inv2h;
      }
    }
  };

  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    fill_jacobian(res.params);

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += jac[k * n + i] * jac[k * n + j];
        a[i * n + j] = a[j * n + i] = s;
      }
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += jac[k * n + i] * r[k];
      g[i] = s;
    }
    for (std::size_t j = 0; j < n; ++j) {
      d[j] = a[j * n + j] > 0.0 ? std::sqrt(a[j * n + j]) : 1.0;
    }

    const double rnorm = std::sqrt(cost);
    double gcos = 0.0;
    if (rnorm > 0.0) {
      for (std::size_t j = 0; j < n; ++j) {
        gcos = std::max(gcos, std::abs(g[j]) / (d[j] * rnorm));
      }
    }
    res.grad_norm = gcos;
    if (rnorm == 0.0 || gcos <= opt.grad_tol) {
      res.converged = true;
      break;
    }

    const double cost_before = cost;
    bool stepped = false;
    bool floored = false;
    while (lambda < 1e15) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          l[i * n + j] = a[i * n + j] / (d[i] * d[j]);
        }
        l[i * n + i] += lambda;
        step[i] = -g[i] / d[i];
      }
      if (!detail::cholesky(l, n)) {
        lambda *= 10.0;
        continue;
      }
      detail::cholesky_solve(l, n, step);
      for (std::size_t j = 0; j < n; ++j) {
        step[j] /= d[j];
        trial[j] = res.params[j] + step[j];
      }

      // Cost decrease promised by the local quadratic model. With the
      // normal equations above, r^T J step = -(|J step|^2 + lambda
      // |D step|^2), so the prediction is exact in these two terms.
      double jstep2 = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += jac[i * n + j] * step[j];
        jstep2 += s * s;
      }
      double dstep2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        dstep2 += d[j] * step[j] * d[j] * step[j];
      }
      const double prered = jstep2 + 2.0 * lambda * dstep2;

      std::vector<double> rt = residual_fn(trial);
      const double trial_cost = detail::squared_norm(rt);
      const bool downhill = std::isfinite(trial_cost) && trial_cost < cost;
      // When neither the model nor the trial moves the cost by a relative
      // cost_tol, this is the numerical floor of a minimum, not a stall.
      // Rejected trials at a noisy optimum land here too.
      const bool at_floor = prered <= opt.cost_tol * cost &&
                            cost - trial_cost <= opt.cost_tol * cost;
      if (downhill) {
        res.params = trial;
        r = std::move(rt);
        cost = trial_cost;
        lambda = std::max(lambda * 0.3, 1e-14);
        stepped = true;
      }
      if (at_floor) {
        floored = true;
        break;
      }
      if (downhill) break;
      lambda *= 10.0;
    }
    if (floored) {
      res.converged = true;
      ++iter;
      break;
    }
    if (!stepped) break;  // damping exhausted, no downhill direction left

    // Step convergence in the Jacobi-scaled norm, so that a parameter
    // sitting at zero does not poison the test. Only counts when the
    // damping is relaxed and the step no longer buys real cost reduction:
    // a tiny step that still slashed the cost means the quadratic phase
    // is mid-flight, not finished.
    double dstep = 0.0, dp = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      dstep += d[j] * step[j] * d[j] * step[j];
      dp += d[j] * res.params[j] * d[j] * res.params[j];
    }
    if (lambda <= 1.0 && cost_before - cost <= 0.1 * cost_before &&
        std::sqrt(dstep) <= opt.step_tol * (std::sqrt(dp) + opt.step_tol)) {
      res.converged = true;
      ++iter;
      break;
    }
  }

  res.n_iter = iter;
  res.residual_norm = std::sqrt(cost);

  if (m > n) {
    // Covariance from the scaled normal matrix; unscale afterwards.
    fill_jacobian(res.params);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += jac[k * n + i] * jac[k * n + j];
        a[i * n + j] = a[j * n + i] = s;
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      d[j] = a[j * n + j] > 0.0 ? std::sqrt(a[j * n + j]) : 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        l[i * n + j] = a[i * n + j] / (d[i] * d[j]);
      }
    }
    if (detail::cholesky(l, n)) {
      const double sigma2 = cost / static_cast<double>(m - n);
      res.stderrs.resize(n);
      std::vector<double> e(n);
      for (std::size_t j = 0; j < n; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        detail::cholesky_solve(l, n, e);
        res.stderrs[j] = std::sqrt(std::max(e[j], 0.0) * sigma2) / d[j];
      }
    }
  }
  return res;
}

}  // namespace squidres
