#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "axiscat/common.hpp"

namespace axiscat {

struct GmresConfig {
  double tol = 1e-9;   // relative residual target, in (0, 1)
  int max_iter = 300;
  int restart = 0;     // 0 = full memory (no restart)
  bool precondition = true;

  void validate() const {
    if (!(tol > 0) || !(tol < 1)) throw std::invalid_argument("GmresConfig: tol must be in (0,1)");
    if (max_iter < 1) throw std::invalid_argument("GmresConfig: max_iter must be >= 1");
    if (restart < 0) throw std::invalid_argument("GmresConfig: restart must be >= 0");
  }
};

struct GmresResult {
  Eigen::VectorXcd x;
  std::vector<double> residual_history;  // relative residual after each iteration
  int iterations = 0;
  bool converged = false;
};

using LinearOperator = std::function<void(std::span<const Complex>, std::span<Complex>)>;

// Full-memory GMRES with modified Gram-Schmidt (one re-orthogonalization
// pass when cancellation is detected) and Givens-rotation residual updates.
// Restarted cycles are used only when cfg.restart > 0.
GmresResult gmres(const LinearOperator& op, std::span<const Complex> rhs,
                  const GmresConfig& cfg);

}  // namespace axiscat
