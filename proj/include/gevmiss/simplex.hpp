#pragma once

// Nelder-Mead downhill simplex with the standard coefficients
// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
//
// The objective may return +inf for infeasible points; such vertices are
// always ranked worst and are replaced by contraction or shrinking.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace gevmiss {

struct SimplexOptions {
  double rel_tol = 1e-8;   // on both simplex diameter and objective spread
  int max_evals = 4000;
};

template <typename Scalar, int Dim>
struct SimplexResult {
  Eigen::Matrix<Scalar, Dim, 1> x;
  Scalar f = std::numeric_limits<Scalar>::infinity();
  int evals = 0;
  bool converged = false;
};

/// Minimizes f from an axis-aligned initial simplex x0 + steps[i] e_i.
template <typename Scalar, int Dim, typename Objective>
SimplexResult<Scalar, Dim> nelder_mead(Objective&& f, const Eigen::Matrix<Scalar, Dim, 1>& x0,
                                       const Eigen::Matrix<Scalar, Dim, 1>& steps,
                                       const SimplexOptions& opts = {}) {
  using Vec = Eigen::Matrix<Scalar, Dim, 1>;
  const int n = static_cast<int>(x0.size());
  std::vector<Vec> x(n + 1, x0);
  std::vector<Scalar> fx(n + 1);
  SimplexResult<Scalar, Dim> res;

  auto eval = [&](const Vec& p) {
    ++res.evals;
    const Scalar v = f(p);
    return std::isnan(v) ? std::numeric_limits<Scalar>::infinity() : v;
  };

  fx[0] = eval(x[0]);
  for (int i = 0; i < n; ++i) {
    x[i + 1](i) += steps(i);
    fx[i + 1] = eval(x[i + 1]);
  }

  std::vector<int> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    std::vector<Vec> xs(n + 1);
    std::vector<Scalar> fs(n + 1);
    for (int k = 0; k <= n; ++k) {
      xs[k] = x[order[k]];
      fs[k] = fx[order[k]];
    }
    x.swap(xs);
    fx.swap(fs);
  };

  auto converged = [&] {
    if (!std::isfinite(fx[n])) return false;
    const Scalar scale_x = std::max(Scalar(1), x[0].cwiseAbs().maxCoeff());
    Scalar diameter = 0;
    for (int k = 1; k <= n; ++k) diameter = std::max(diameter, (x[k] - x[0]).cwiseAbs().maxCoeff());
    const Scalar spread = fx[n] - fx[0];
    const Scalar scale_f = std::max(Scalar(1), std::abs(fx[0]));
    return diameter <= opts.rel_tol * scale_x && spread <= opts.rel_tol * scale_f;
  };

  sort_simplex();
  while (res.evals < opts.max_evals) {
    if (converged()) {
      res.converged = true;
      break;
    }
    Vec centroid = Vec::Zero(n);
    for (int k = 0; k < n; ++k) centroid += x[k];
    centroid /= Scalar(n);

    const Vec xr = centroid + (centroid - x[n]);
    const Scalar fr = eval(xr);
    if (fr < fx[0]) {
      const Vec xe = centroid + Scalar(2) * (xr - centroid);
      const Scalar fe = eval(xe);
      if (fe < fr) {
        x[n] = xe;
        fx[n] = fe;
      } else {
        x[n] = xr;
        fx[n] = fr;
      }
    } else if (fr < fx[n - 1]) {
      x[n] = xr;
      fx[n] = fr;
    } else {
      const bool outside = fr < fx[n];
      const Vec xc = outside ? Vec(centroid + Scalar(0.5) * (xr - centroid))
                             : Vec(centroid + Scalar(0.5) * (x[n] - centroid));
      const Scalar fc = eval(xc);
      if (fc < (outside ? fr : fx[n])) {
        x[n] = xc;
        fx[n] = fc;
      } else {
        for (int k = 1; k <= n; ++k) {
          x[k] = x[0] + Scalar(0.5) * (x[k] - x[0]);
          fx[k] = eval(x[k]);
        }
      }
    }
    sort_simplex();
  }
  res.x = x[0];
  res.f = fx[0];
  return res;
}

}  // namespace gevmiss
