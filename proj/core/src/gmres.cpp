#include "axiscat/gmres.hpp"

#include <cmath>

namespace axiscat {

namespace {

// One Arnoldi/GMRES cycle starting from x; updates x in place and appends to
// history. Returns true on convergence.
bool gmres_cycle(const LinearOperator& op, const Eigen::VectorXcd& b, Eigen::VectorXcd& x,
                 double rhs_norm, double tol, int max_steps, int& done_iters,
                 std::vector<double>& history) {
  const auto n = b.size();
  Eigen::VectorXcd r = b;
  if (x.squaredNorm() > 0) {
    Eigen::VectorXcd ax(n);
    op(std::span<const Complex>(x.data(), n), std::span<Complex>(ax.data(), n));
    r -= ax;
  }
  const double beta = r.norm();
  if (beta / rhs_norm <= tol) return true;

  std::vector<Eigen::VectorXcd> v;
  v.push_back(r / beta);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(max_steps + 1, max_steps);
  Eigen::VectorXd gc(max_steps);    // Givens cosines (real)
  Eigen::VectorXcd gs(max_steps);   // Givens sines
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(max_steps + 1);
  g[0] = beta;

  int k = 0;
  bool converged = false;
  for (; k < max_steps; ++k) {
    Eigen::VectorXcd w(n);
    op(std::span<const Complex>(v[k].data(), n), std::span<Complex>(w.data(), n));

    const double before = w.norm();
    for (int i = 0; i <= k; ++i) {
      const Complex hik = v[i].dot(w);  // conjugated dot
      h(i, k) = hik;
      w -= hik * v[i];
    }
    if (w.norm() < 0.70710678 * before) {
      for (int i = 0; i <= k; ++i) {
        const Complex corr = v[i].dot(w);
        h(i, k) += corr;
        w -= corr * v[i];
      }
    }
    const double hnext = w.norm();
    h(k + 1, k) = hnext;

    for (int i = 0; i < k; ++i) {
      const Complex t = gc[i] * h(i, k) + gs[i] * h(i + 1, k);
      h(i + 1, k) = -std::conj(gs[i]) * h(i, k) + gc[i] * h(i + 1, k);
      h(i, k) = t;
    }
    // New rotation zeroing the (real, non-negative) subdiagonal entry.
    {
      const Complex a = h(k, k);
      const double bb = hnext;
      const double rho = std::sqrt(std::norm(a) + bb * bb);
      double c;
      Complex s;
      if (rho == 0.0) {
        c = 1.0;
        s = 0.0;
      } else if (std::abs(a) == 0.0) {
        c = 0.0;
        s = 1.0;
      } else {
        c = std::abs(a) / rho;
        s = (bb / rho) * (std::conj(a) / std::abs(a));
      }
      gc[k] = c;
      gs[k] = s;
      h(k, k) = c * a + s * bb;
      h(k + 1, k) = 0.0;
      g[k + 1] = -std::conj(s) * g[k];
      g[k] = c * g[k];
    }

    ++done_iters;
    const double rel = std::abs(g[k + 1]) / rhs_norm;
    history.push_back(rel);
    if (rel <= tol) {
      converged = true;
      ++k;
      break;
    }
    if (hnext < 1e-300) {  // exact breakdown: Krylov space exhausted
      ++k;
      break;
    }
    v.push_back(w / hnext);
  }

  // Back-substitute R y = g and update x.
  if (k > 0) {
    Eigen::VectorXcd y = h.topLeftCorner(k, k)
                             .triangularView<Eigen::Upper>()
                             .solve(g.head(k));
    for (int i = 0; i < k; ++i) x += y[i] * v[i];
  }
  return converged;
}

}  // namespace

GmresResult gmres(const LinearOperator& op, std::span<const Complex> rhs,
                  const GmresConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(rhs.size());
  GmresResult res;
  res.x = Eigen::VectorXcd::Zero(n);

  const Eigen::VectorXcd b = Eigen::Map<const Eigen::VectorXcd>(rhs.data(), n);
  const double rhs_norm = b.norm();
  if (rhs_norm == 0.0) {
    res.converged = true;
    return res;
  }

  const int cycle_len = cfg.restart > 0 ? cfg.restart : cfg.max_iter;
  while (res.iterations < cfg.max_iter) {
    const int steps = std::min(cycle_len, cfg.max_iter - res.iterations);
    const bool ok = gmres_cycle(op, b, res.x, rhs_norm, cfg.tol, steps, res.iterations,
                                res.residual_history);
    if (ok) {
      res.converged = true;
      break;
    }
    if (cfg.restart == 0) break;  // full-memory: single cycle
  }
  return res;
}

}  // namespace axiscat
