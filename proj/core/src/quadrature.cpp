#include "axiscat/detail/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace axiscat::detail {

namespace {

GaussRule compute_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Newton iteration on P_n from Chebyshev initial guesses.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex mtx;
  static std::map<int, GaussRule> cache;
  std::scoped_lock lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

void map_rule(const GaussRule& rule, double a, double b,
              std::vector<double>& nodes, std::vector<double>& weights) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    nodes.push_back(mid + half * rule.nodes[i]);
    weights.push_back(half * rule.weights[i]);
  }
}

namespace {

void gauss_segment(const std::function<void(double, std::span<Complex>)>& f,
                   int dim, double a, double b, const GaussRule& rule,
                   std::vector<Complex>& scratch, Eigen::VectorXcd& out, long& evals) {
  out.setZero(dim);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (size_t q = 0; q < rule.nodes.size(); ++q) {
    f(mid + half * rule.nodes[q], scratch);
    ++evals;
    const double w = half * rule.weights[q];
    for (int d = 0; d < dim; ++d) out[d] += w * scratch[d];
  }
}

struct AdaptiveCtx {
  const std::function<void(double, std::span<Complex>)>* f;
  int dim;
  double tol_abs;
  int max_depth;
  const GaussRule* rule;
  std::vector<Complex> scratch;
  Eigen::VectorXcd total;
  bool converged = true;
  long evals = 0;
};

void refine(AdaptiveCtx& ctx, double a, double b, const Eigen::VectorXcd& coarse, int depth) {
  const double mid = 0.5 * (a + b);
  Eigen::VectorXcd left(ctx.dim), right(ctx.dim);
  gauss_segment(*ctx.f, ctx.dim, a, mid, *ctx.rule, ctx.scratch, left, ctx.evals);
  gauss_segment(*ctx.f, ctx.dim, mid, b, *ctx.rule, ctx.scratch, right, ctx.evals);
  const double err = (coarse - left - right).lpNorm<Eigen::Infinity>();
  if (err <= ctx.tol_abs || depth >= ctx.max_depth) {
    if (err > ctx.tol_abs) ctx.converged = false;
    ctx.total += left + right;
    return;
  }
  refine(ctx, a, mid, left, depth + 1);
  refine(ctx, mid, b, right, depth + 1);
}

}  // namespace

AdaptiveResult adaptive_integrate(
    const std::function<void(double, std::span<Complex>)>& f, int dim,
    double a, double b, double tol, int max_depth, double scale) {
  AdaptiveCtx ctx;
  ctx.f = &f;
  ctx.dim = dim;
  ctx.max_depth = max_depth;
  ctx.rule = &gauss_legendre(15);
  ctx.scratch.resize(dim);
  ctx.total = Eigen::VectorXcd::Zero(dim);

  Eigen::VectorXcd coarse(dim);
  gauss_segment(f, dim, a, b, *ctx.rule, ctx.scratch, coarse, ctx.evals);
  if (scale <= 0.0) scale = coarse.lpNorm<Eigen::Infinity>();
  ctx.tol_abs = tol * std::max(scale, 1e-300);

  refine(ctx, a, b, coarse, 1);

  AdaptiveResult res;
  res.value = std::move(ctx.total);
  res.converged = ctx.converged;
  res.evals = ctx.evals;
  return res;
}

}  // namespace axiscat::detail
