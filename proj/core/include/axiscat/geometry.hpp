#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "axiscat/common.hpp"

namespace axiscat {

using Vec3 = Eigen::Vector3d;

/// Point on a generating curve in the (r, z) half-plane.
struct CurvePoint {
  double r = 0, z = 0;
  double dr = 0, dz = 0;  // derivatives w.r.t. the curve parameter
  double nr = 0, nz = 0;  // outward unit normal in the half-plane
  double speed() const { return std::sqrt(dr * dr + dz * dz); }
};

enum class CurveKind { Ellipsoid, Bowl, Starfish, Custom };

// Generating curve of a smooth surface of revolution about the z-axis.
// Axis-anchored curves start and end on the axis (r = 0) with tangent
// perpendicular to it; closed-loop curves are periodic and bounded away
// from the axis. Immutable and cheap to copy.
class GeneratingCurve {
public:
  CurveKind kind() const;
  /// Parameter interval is [0, period()].
  double period() const;
  bool closed_loop() const;
  CurvePoint eval(double t) const;
  const std::string& name() const;
  const std::vector<std::pair<std::string, double>>& params() const;
  std::uint64_t shape_hash() const;
  /// Largest extent: max(2 r_max, z_max - z_min).
  double diameter() const;

  static GeneratingCurve ellipsoid(double a, double c);
  static GeneratingCurve bowl(double mid_radius = 1.0, double half_thickness = 0.2,
                              double opening_angle = kPi / 6.0);
  static GeneratingCurve starfish(int lobes = 5, double amplitude = 0.3,
                                  double tube_radius = 0.5, double ring_radius = 1.0);
  /// Closed-loop curve through the given half-plane samples (periodic
  /// cubic-spline reconstruction).
  static GeneratingCurve custom(std::span<const double> r, std::span<const double> z);

private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  explicit GeneratingCurve(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
};

/// Proper rigid motion (rotation + translation).
class RigidMotion {
public:
  RigidMotion() : q_(Eigen::Quaterniond::Identity()), t_(Vec3::Zero()) {}

  static RigidMotion identity() { return {}; }
  static RigidMotion translation(const Vec3& t);
  static RigidMotion axis_angle(const Vec3& axis, double angle, const Vec3& t = Vec3::Zero());
  /// Quaternion given as {w, x, y, z}; normalized on construction.
  static RigidMotion quaternion(double w, double x, double y, double z,
                                const Vec3& t = Vec3::Zero());

  Vec3 apply(const Vec3& p) const { return q_ * p + t_; }
  Vec3 rotate(const Vec3& v) const { return q_ * v; }
  RigidMotion inverse() const;
  RigidMotion then(const RigidMotion& second) const;  // second ∘ this

  const Eigen::Quaterniond& rotation() const { return q_; }
  const Vec3& translation_part() const { return t_; }

private:
  Eigen::Quaterniond q_;
  Vec3 t_;
};

/// Composite Gauss-Legendre quadrature on a generating curve.
struct CurveQuadrature {
  GeneratingCurve curve;
  int n_panels = 0;
  int gauss_order = 0;
  std::vector<double> panel_breaks;  // n_panels + 1 parameter breakpoints
  std::vector<double> t;             // parameter nodes, panel-major
  std::vector<double> weight;        // parameter-space weights q_i > 0
  std::vector<CurvePoint> point;     // geometry cached at the nodes

  int size() const { return static_cast<int>(t.size()); }
  double arclength() const;
  double surface_area() const;  // 2π Σ q_i speed_i r_i
  /// Max local node spacing (curve direction), used for closeness warnings.
  double max_spacing() const;
};

/// Splits [0, period] into r_panels panels (uniform in parameter, or mapped
/// through an optional monotone grading g: [0,1] -> [0,1]) and applies a
/// gauss_order-point rule per panel.
CurveQuadrature build_curve_quadrature(const GeneratingCurve& curve, int r_panels,
                                       int gauss_order,
                                       const std::function<double(double)>& grading = {});

// Tensor-product surface grid: curve nodes x equispaced azimuthal nodes
// theta_j = 2 pi j / n_fourier. Node ordering is curve-major (curve index
// fastest): global index = j * n_curve + i. All modules rely on this.
struct BodyGrid {
  CurveQuadrature cq;
  int n_fourier = 0;
  RigidMotion motion;
  int body_id = -1;

  std::vector<Vec3> node;    // size n_curve * n_fourier
  std::vector<Vec3> normal;  // outward unit normals
  std::vector<double> weight;

  int n_curve() const { return cq.size(); }
  int size() const { return n_curve() * n_fourier; }
  int index(int i_curve, int j_azimuth) const { return j_azimuth * n_curve() + i_curve; }

  Vec3 center;          // node centroid
  double circumradius = 0;  // max node distance from center
  double max_spacing = 0;   // max of curve and azimuthal node spacings
};

BodyGrid tensor_grid(const CurveQuadrature& cq, int n_fourier,
                     const RigidMotion& motion = RigidMotion::identity(), int body_id = -1);

// Meridian interior utilities (body-local coordinates). The meridian region
// is bounded by the curve, closed along the symmetry axis for axis-anchored
// curves.
std::vector<std::array<double, 2>> meridian_polygon(const GeneratingCurve& curve,
                                                    int samples = 1024);
bool point_in_meridian(const GeneratingCurve& curve, double r, double z);

struct InteriorAnchor {
  double r = 0, z = 0;
  double clearance = 0;  // distance from the anchor to the curve
};
/// Deepest interior point of the meridian region (coarse grid search).
InteriorAnchor inscribed_anchor(const GeneratingCurve& curve);

}  // namespace axiscat
