#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "axiscat/common.hpp"
#include "axiscat/multibody.hpp"

namespace axiscat {

struct PointSource {
  Vec3 position = Vec3::Zero();
  Complex strength{1, 0};
  int body = -1;  // owning body; sources must lie strictly inside it
};

struct IncidentField {
  enum class Kind { PointSources, PlaneWave };
  Kind kind = Kind::PointSources;
  std::vector<PointSource> sources;
  Vec3 direction = Vec3::UnitZ();  // plane wave propagation direction

  static IncidentField point_sources(std::vector<PointSource> s) {
    IncidentField f;
    f.kind = Kind::PointSources;
    f.sources = std::move(s);
    return f;
  }
  static IncidentField plane_wave(const Vec3& dir);
};

struct TargetSet {
  std::vector<Vec3> points;
  double margin = 0;  // required clearance from every body surface
};

/// Incident boundary data v sampled at all scene nodes. Point sources are
/// checked to lie strictly inside their owning body.
Eigen::VectorXcd dirichlet_data(const IncidentField& incident, const Scene& scene);

struct FieldValues {
  Eigen::VectorXcd values;
  std::vector<bool> degraded;  // target closer to a surface than the margin
};

// Scattered field u(x) = sum_i G(x, x_i) sigma_i w_i at off-surface targets
// (plain quadrature; accurate only beyond the margin, nearer targets are
// flagged).
FieldValues evaluate_field(const Scene& scene, std::span<const Complex> sigma,
                           std::span<const Vec3> targets, double margin = 0);

/// || a - e ||_inf / || e ||_inf.
double rel_inf_error(std::span<const Complex> approx, std::span<const Complex> exact);

// Verification protocol: one point source seeded inside each body, targets
// well outside all bodies; the scattered field produced by the solver must
// reproduce u_exact = -(field of the interior sources) at the targets.
struct VerificationProblem {
  IncidentField incident;
  TargetSet targets;
  Eigen::VectorXcd u_exact;
  std::uint64_t seed = 0;
};

struct VerificationOptions {
  int n_targets = 10;
  double margin_spacings = 2.0;    // target clearance in units of node spacing
  double source_ball_fraction = 0.35;  // fraction of the inscribed clearance
};

VerificationProblem make_verification_problem(const Scene& scene, std::uint64_t seed,
                                              const VerificationOptions& opt = {});

}  // namespace axiscat
