#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "axiscat/body_operator.hpp"
#include "axiscat/common.hpp"
#include "axiscat/geometry.hpp"
#include "axiscat/gmres.hpp"
#include "axiscat/kernels.hpp"

namespace axiscat {

struct SceneBody {
  BodyGrid grid;
  std::shared_ptr<const BodyOperator> op;
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;
  bool stagnated = false;
  bool preconditioned = true;
  double gmres_tol = 0;
  double t_pre = 0;    // seconds; filled by the pipeline that built operators
  double t_solve = 0;
  long total_nodes = 0;
  int num_bodies = 0;
  std::vector<int> nodes_per_body;
  double e_rel_inf = -1;  // < 0 when verification was not run
};

// m placed bodies plus the implicit m x m block system: diagonal blocks are
// the corrected per-body operators, off-diagonal blocks the naive kernel
// entries A_pq(i,j) = G(x_i, x_j) w_j.
class Scene {
public:
  Scene(std::vector<SceneBody> bodies, KernelSpec spec, WaveNumber kappa);

  int num_bodies() const { return static_cast<int>(bodies_.size()); }
  long total_nodes() const { return total_nodes_; }
  const SceneBody& body(int p) const { return bodies_.at(p); }
  long offset(int p) const { return offsets_.at(p); }
  const KernelSpec& spec() const { return spec_; }
  WaveNumber kappa() const { return kappa_; }

  double pair_distance(int p, int q) const;  // min 3-D node distance
  double min_separation() const;
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Off-diagonal block entry A_pq(i, j) for bodies p != q.
  Complex offdiag_entry(int p, int i, int q, int j) const;

  // out = B sigma: block row p receives sum_{q != p} A_pq sigma_q by direct
  // kernel summation. Per-target sums use pairwise accumulation in a fixed
  // order, so results do not depend on the thread count.
  void apply_B(std::span<const Complex> sigma, std::span<Complex> out) const;

  /// Block-diagonal applications (per body forward / factorized inverse).
  void apply_D_forward(std::span<const Complex> in, std::span<Complex> out) const;
  void apply_D_inverse(std::span<const Complex> in, std::span<Complex> out) const;

private:
  std::vector<SceneBody> bodies_;
  KernelSpec spec_;
  WaveNumber kappa_;
  std::vector<long> offsets_;
  long total_nodes_ = 0;
  Eigen::MatrixXd pair_distance_;
  std::vector<std::string> warnings_;
};

// Solves the multibody system for the density sigma given boundary data v
// sampled at all nodes (the minus sign of the right-hand side is applied
// internally). With cfg.precondition the iteration runs on
// sigma + D^{-1} B sigma = -D^{-1} v, otherwise on (D + B) sigma = -v.
std::pair<Eigen::VectorXcd, SolveReport> solve(const Scene& scene,
                                               std::span<const Complex> v,
                                               const GmresConfig& cfg);

}  // namespace axiscat
