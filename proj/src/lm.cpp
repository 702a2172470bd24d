#include "transducer/lm.hpp"

#include <algorithm>
#include <cmath>

namespace transducer::lm {

Matrix numerical_jacobian(const ResidualFn& fn, const Vector& x, const Vector& r0,
                          double rel_step) {
  Matrix J(r0.size(), x.size());
  Vector xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = rel_step * std::max(std::abs(x[j]), 1.0);
    xp[j] = x[j] + h;
    const Vector rp = fn(xp);
    xp[j] = x[j] - h;
    const Vector rm = fn(xp);
    xp[j] = x[j];
    J.col(j) = (rp - rm) / (2.0 * h);
  }
  return J;
}

Result minimize(const ResidualFn& fn, const Vector& x0, const Options& opt) {
  Result res;
  res.x = x0;
  res.residual = fn(x0);
  res.cost = 0.5 * res.residual.squaredNorm();
  res.jacobian = numerical_jacobian(fn, res.x, res.residual, opt.fd_step);

  double mu = -1.0;
  double nu = 2.0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    res.iterations = it + 1;
    const Matrix& J = res.jacobian;
    const Matrix JtJ = J.transpose() * J;
    const Vector g = J.transpose() * res.residual;

    Vector diag = JtJ.diagonal();
    const double dmax = diag.maxCoeff();
    for (Eigen::Index j = 0; j < diag.size(); ++j) diag[j] = std::max(diag[j], 1e-12 * dmax);
    if (mu < 0.0) mu = opt.initial_damping;

    // Scaled gradient test.
    double gscaled = 0.0;
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      gscaled = std::max(gscaled, std::abs(g[j]) / std::sqrt(diag[j]));
    }
    if (gscaled <= opt.gtol * std::max(std::sqrt(2.0 * res.cost), 1e-300)) {
      res.status = Status::converged_g;
      return res;
    }

    Matrix A = JtJ;
    A.diagonal() += mu * diag;
    const Vector dx = A.ldlt().solve(-g);
    const Vector x_new = res.x + dx;
    const Vector r_new = fn(x_new);
    const double cost_new = 0.5 * r_new.squaredNorm();
    const double predicted = -(g.dot(dx) + 0.5 * dx.dot(JtJ * dx));
    const double actual = res.cost - cost_new;
    const double rho = predicted > 0.0 ? actual / predicted : -1.0;

    if (std::isfinite(cost_new) && rho > 0.0) {
      const double rel_step = dx.norm() / (res.x.norm() + opt.xtol);
      const double rel_cost = actual / std::max(res.cost, 1e-300);
      res.x = x_new;
      res.residual = r_new;
      res.cost = cost_new;
      res.jacobian = numerical_jacobian(fn, res.x, res.residual, opt.fd_step);
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (rel_cost < opt.ftol || res.cost == 0.0) {
        res.status = Status::converged_f;
        return res;
      }
      if (rel_step < opt.xtol) {
        res.status = Status::converged_x;
        return res;
      }
    } else {
      mu *= nu;
      nu *= 2.0;
      if (dx.norm() < opt.xtol * (res.x.norm() + opt.xtol) || mu > 1e20) {
        // No further progress possible; the current iterate is a minimum to
        // within the achievable step.
        res.status = Status::converged_x;
        return res;
      }
    }
  }
  res.status = Status::max_iterations;
  return res;
}

std::string to_string(Status status) {
  switch (status) {
    case Status::converged_f: return "converged (cost)";
    case Status::converged_x: return "converged (step)";
    case Status::converged_g: return "converged (gradient)";
    case Status::max_iterations: return "maximum iterations reached";
  }
  return "unknown";
}

}  // namespace transducer::lm
