#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "axiscat/common.hpp"

namespace axiscat::detail {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum to 2
};

/// n-point Gauss-Legendre rule on [-1, 1]; cached per n.
const GaussRule& gauss_legendre(int n);

/// Maps a [-1,1] rule onto [a,b], appending nodes/weights.
void map_rule(const GaussRule& rule, double a, double b,
              std::vector<double>& nodes, std::vector<double>& weights);

struct AdaptiveResult {
  Eigen::VectorXcd value;
  bool converged = true;
  long evals = 0;
};

/// Adaptive bisection quadrature of a vector-valued integrand on [a, b].
/// A segment is accepted when a 15-point Gauss estimate agrees with the sum
/// over its halves in max-norm; tolerance is relative to `scale` (computed
/// from a first coarse pass when <= 0). Subdivision stops at `max_depth`
/// levels, in which case `converged` is false.
AdaptiveResult adaptive_integrate(
    const std::function<void(double, std::span<Complex>)>& f, int dim,
    double a, double b, double tol, int max_depth = 40, double scale = 0.0);

}  // namespace axiscat::detail
