#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace transducer::lm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using ResidualFn = std::function<Vector(const Vector&)>;

struct Options {
  int max_iterations = 300;
  double ftol = 1e-15;   // relative reduction of the cost
  double xtol = 1e-13;   // relative step size
  double gtol = 1e-15;   // scaled gradient
  double initial_damping = 1e-3;
  double fd_step = 1e-7; // central-difference step, relative to max(|x|, 1)
};

enum class Status { converged_f, converged_x, converged_g, max_iterations };

struct Result {
  Vector x;
  Vector residual;
  Matrix jacobian;  // at x
  double cost = 0.0;  // 0.5 |r|^2
  int iterations = 0;
  Status status = Status::max_iterations;
  bool converged() const { return status != Status::max_iterations; }
};

// Central-difference Jacobian of fn at x.
Matrix numerical_jacobian(const ResidualFn& fn, const Vector& x, const Vector& r0,
                          double rel_step);

// Damped Gauss-Newton with Marquardt diagonal scaling and Nielsen's damping
// update. The step solves (J^T J + mu D) dx = -J^T r with D = diag(J^T J)
// (floored to keep the system positive definite).
Result minimize(const ResidualFn& fn, const Vector& x0, const Options& options = {});

std::string to_string(Status status);

}  // namespace transducer::lm
