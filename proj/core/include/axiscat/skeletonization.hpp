#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "axiscat/common.hpp"
#include "axiscat/multibody.hpp"

namespace axiscat {

// Sphere of point sources enclosing one body; spans every incoming field the
// body can receive from sources outside the sphere.
struct ProxySurface {
  Vec3 center = Vec3::Zero();
  double radius = 0;
  std::vector<Vec3> points;  // near-uniform spiral layout
};

ProxySurface build_proxy_surface(const BodyGrid& body, double radius, int n_points);

/// n x n_proxy: column j is the field at the body nodes radiated by a unit
/// combined-kernel source at proxy point j (proxy-sphere outward normal).
Eigen::MatrixXcd build_incoming_matrix(const BodyGrid& body, const ProxySurface& proxy,
                                       const KernelSpec& spec, WaveNumber kappa);

/// n x n_proxy: row i is the weighted influence of body node i sampled at
/// the proxy points (the transposed outgoing evaluation map).
Eigen::MatrixXcd build_outgoing_matrix(const BodyGrid& body, const ProxySurface& proxy,
                                       const KernelSpec& spec, WaveNumber kappa);

struct IdOptions {
  int oversampling = 10;
  int power_iterations = 0;  // 1 recommended for Helmholtz spectra
  double coef_cap = 2.0;     // interpolation-coefficient magnitude bound
  std::uint64_t seed = 0;
  int rank_guess = 50;
};

struct IdResult {
  int rank = 0;
  std::vector<int> skeleton;  // selected row indices
  Eigen::MatrixXcd interp;    // rows x rank with interp(skeleton, :) = I exactly
  double error_estimate = 0;  // trailing/leading diagonal ratio of the sketch R
};

// Row-skeleton interpolative decomposition M ~ interp * M(skeleton, :) at
// relative precision epsilon, via a randomized range sketch (Gaussian test
// matrix, fixed oversampling, optional power iteration) followed by a
// column-pivoted QR of the sketch. Pivots are re-chosen if any interpolation
// coefficient exceeds coef_cap.
IdResult randomized_id(const Eigen::MatrixXcd& M, double epsilon, const IdOptions& opt = {});

struct SkeletonOptions {
  double proxy_radius_factor = 1.75;  // floor, in units of the circumradius
  bool separation_aware = true;       // grow the proxy toward the nearest body
  int min_proxy_points = 200;
  int oversampling = 10;
  double coef_cap = 2.0;
  std::uint64_t seed = 0;
};

struct SkeletonData {
  int body = -1;
  int rank = 0;
  std::vector<int> skeleton;  // node indices, subset of the body grid
  Eigen::MatrixXcd U, V;      // n x rank, U(skeleton,:) = V(skeleton,:) = I
  double epsilon = 0;
  double proxy_radius = 0;
  int proxy_points = 0;
  int enlargements = 0;  // proxy doublings forced by rank saturation
  bool proxy_clipped = false;  // proxy reaches past the nearest neighbor
  std::uint64_t seed = 0;
};

// Shared-index skeleton for one body: a single row-ID of the concatenated
// (incoming | outgoing) proxy matrices yields the index set and both
// interpolation matrices.
SkeletonData skeletonize_body(const Scene& scene, int body_index, double epsilon,
                              const SkeletonOptions& opt = {});

// Reduced multibody system over skeleton nodes: sigma~ + S B~ sigma~ = -v~
// with S_p = V_p* A_pp^{-1} U_p and B~ the literal submatrix of B at the
// skeleton indices.
struct ReducedSystem {
  const Scene* scene = nullptr;
  std::vector<SkeletonData> skeletons;
  std::vector<Eigen::MatrixXcd> S;          // k_p x k_p per body
  std::vector<Eigen::VectorXcd> v_reduced;  // filled by set_rhs
  std::vector<long> offsets;
  long total_reduced = 0;

  void set_rhs(std::span<const Complex> v);
  void apply_B_reduced(std::span<const Complex> x, std::span<Complex> out) const;
};

ReducedSystem form_reduced_system(const Scene& scene, std::vector<SkeletonData> skeletons);

/// GMRES on the reduced system; requires set_rhs to have been called.
std::pair<Eigen::VectorXcd, SolveReport> solve_reduced(const ReducedSystem& reduced,
                                                       const GmresConfig& cfg);

/// Full-length density from the reduced solution:
/// sigma_p = -A_pp^{-1} (v_p + U_p sum_{q != p} A~_pq sigma~_q).
Eigen::VectorXcd reconstruct_density(const ReducedSystem& reduced,
                                     std::span<const Complex> sigma_reduced,
                                     std::span<const Complex> v);

}  // namespace axiscat
