#include "axiscat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "axiscat/detail/quadrature.hpp"
#include "axiscat/detail/spline.hpp"

namespace axiscat {

namespace {

std::uint64_t fnv1a(const void* data, size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_params(CurveKind kind, const std::vector<std::pair<std::string, double>>& params) {
  auto h = fnv1a(&kind, sizeof kind);
  for (const auto& [k, v] : params) {
    h = fnv1a(k.data(), k.size(), h);
    h = fnv1a(&v, sizeof v, h);
  }
  return h;
}

}  // namespace

struct GeneratingCurve::Impl {
  CurveKind kind;
  std::string name;
  std::vector<std::pair<std::string, double>> params;
  double period = 0;
  bool closed = false;
  double normal_sign = 1.0;
  std::function<void(double, CurvePoint&)> eval_raw;  // fills r, z, dr, dz
  std::uint64_t hash = 0;
  double diameter = 0;
};

CurveKind GeneratingCurve::kind() const { return impl_->kind; }
double GeneratingCurve::period() const { return impl_->period; }
bool GeneratingCurve::closed_loop() const { return impl_->closed; }
const std::string& GeneratingCurve::name() const { return impl_->name; }
const std::vector<std::pair<std::string, double>>& GeneratingCurve::params() const {
  return impl_->params;
}
std::uint64_t GeneratingCurve::shape_hash() const { return impl_->hash; }
double GeneratingCurve::diameter() const { return impl_->diameter; }

CurvePoint GeneratingCurve::eval(double t) const {
  CurvePoint p;
  impl_->eval_raw(t, p);
  const double sp = p.speed();
  if (sp < 1e-14) {
    std::ostringstream os;
    os << "degenerate curve speed at t = " << t << " on " << impl_->name;
    throw std::invalid_argument(os.str());
  }
  p.nr = impl_->normal_sign * (-p.dz) / sp;
  p.nz = impl_->normal_sign * (p.dr) / sp;
  return p;
}

namespace {

// Orientation and invariant checks shared by all factories. Fixes the normal
// sign so the field points away from the enclosed meridian region
// (flux of x about the origin is 2*Area > 0 for outward normals; the axis
// closure of anchored curves contributes nothing since the origin lies on
// the axis).
void finalize_curve(GeneratingCurve::Impl& impl) {
  const int n = 2048;
  const double T = impl.period;
  double flux = 0;
  double rmax = 0, zmin = 1e300, zmax = -1e300;
  CurvePoint p;
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) * T / n;
    impl.eval_raw(t, p);
    const double sp = p.speed();
    if (!(sp > 1e-12)) {
      std::ostringstream os;
      os << "degenerate curve speed at t = " << t << " on " << impl.name;
      throw std::invalid_argument(os.str());
    }
    if (p.r < -1e-10)
      throw std::invalid_argument(impl.name + ": generating curve crosses r < 0");
    flux += ((-p.dz) * p.r + p.dr * p.z) * (T / n);
    rmax = std::max(rmax, p.r);
    zmin = std::min(zmin, p.z);
    zmax = std::max(zmax, p.z);
  }
  impl.normal_sign = flux >= 0 ? 1.0 : -1.0;
  impl.diameter = std::max(2 * rmax, zmax - zmin);

  if (!impl.closed) {
    CurvePoint a, b;
    impl.eval_raw(0.0, a);
    impl.eval_raw(T, b);
    const double scale = std::max(1.0, rmax);
    if (std::abs(a.r) > 1e-9 * scale || std::abs(b.r) > 1e-9 * scale)
      throw std::invalid_argument(impl.name + ": open curve endpoints must lie on the axis");
    if (std::abs(a.dz) > 1e-8 * a.speed() || std::abs(b.dz) > 1e-8 * b.speed())
      throw std::invalid_argument(impl.name + ": endpoint tangent must be perpendicular to the axis");
  }

  // Simplicity check on a coarse polyline.
  const int m = 512;
  std::vector<std::array<double, 2>> poly(m + 1);
  for (int i = 0; i <= m; ++i) {
    impl.eval_raw(i * T / m, p);
    poly[i] = {p.r, p.z};
  }
  auto seg_cross = [](const std::array<double, 2>& a, const std::array<double, 2>& b,
                      const std::array<double, 2>& c, const std::array<double, 2>& d) {
    auto orient = [](const std::array<double, 2>& p0, const std::array<double, 2>& p1,
                     const std::array<double, 2>& p2) {
      return (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
    };
    const double o1 = orient(a, b, c), o2 = orient(a, b, d);
    const double o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 * o2 < 0 && o3 * o4 < 0;
  };
  for (int i = 0; i < m; ++i) {
    for (int j = i + 2; j < m; ++j) {
      if (impl.closed && i == 0 && j == m - 1) continue;
      if (seg_cross(poly[i], poly[i + 1], poly[j], poly[j + 1]))
        throw std::invalid_argument(impl.name + ": generating curve self-intersects");
    }
  }

  impl.hash = hash_params(impl.kind, impl.params);
}

}  // namespace

GeneratingCurve GeneratingCurve::ellipsoid(double a, double c) {
  if (!(a > 0) || !(c > 0)) throw std::invalid_argument("ellipsoid: semi-axes must be positive");
  auto impl = std::make_shared<Impl>();
  impl->kind = CurveKind::Ellipsoid;
  impl->name = "ellipsoid";
  impl->params = {{"a", a}, {"c", c}};
  impl->period = kPi;
  impl->closed = false;
  impl->eval_raw = [a, c](double t, CurvePoint& p) {
    p.r = a * std::sin(t);
    p.z = c * std::cos(t);
    p.dr = a * std::cos(t);
    p.dz = -c * std::sin(t);
  };
  finalize_curve(*impl);
  return GeneratingCurve(std::move(impl));
}

GeneratingCurve GeneratingCurve::starfish(int lobes, double amplitude, double tube_radius,
                                          double ring_radius) {
  if (lobes < 3) throw std::invalid_argument("starfish: lobe count must be >= 3");
  if (!(amplitude >= 0) || amplitude >= 1)
    throw std::invalid_argument("starfish: amplitude must be in [0, 1)");
  if (!(tube_radius > 0)) throw std::invalid_argument("starfish: tube radius must be positive");
  if (!(ring_radius > tube_radius * (1 + amplitude)))
    throw std::invalid_argument("starfish: ring radius must exceed max tube radius");
  auto impl = std::make_shared<Impl>();
  impl->kind = CurveKind::Starfish;
  impl->name = "starfish";
  impl->params = {{"lobes", double(lobes)},
                  {"amplitude", amplitude},
                  {"tube_radius", tube_radius},
                  {"ring_radius", ring_radius}};
  impl->period = kTwoPi;
  impl->closed = true;
  const double L = lobes, rho0 = tube_radius, R0 = ring_radius, al = amplitude;
  impl->eval_raw = [L, rho0, R0, al](double t, CurvePoint& p) {
    const double rho = rho0 * (1 + al * std::cos(L * t));
    const double drho = -rho0 * al * L * std::sin(L * t);
    p.r = R0 + rho * std::cos(t);
    p.z = rho * std::sin(t);
    p.dr = drho * std::cos(t) - rho * std::sin(t);
    p.dz = drho * std::sin(t) + rho * std::cos(t);
  };
  finalize_curve(*impl);
  return GeneratingCurve(std::move(impl));
}

namespace {

// Bowl profile: a circular arc of mid-radius R spanning polar angles
// [theta0, pi], thickened by half-width h. The boundary consists of outer
// and inner arcs joined by a semicircular rim cap; the piecewise-constant
// signed curvature is mollified in arclength (closed-form polynomial bump)
// so the final curve is better than C2, and a flat-ended blend pulls the
// inner endpoint back onto the axis.
struct BowlBuilder {
  double R, h, theta0;
  double L1, L2, L3, L, delta;
  double k1, k2, k3;

  BowlBuilder(double R_, double h_, double th) : R(R_), h(h_), theta0(th) {
    L1 = (R + h) * (kPi - theta0);
    L2 = kPi * h;
    L3 = (R - h) * (kPi - theta0);
    L = L1 + L2 + L3;
    delta = 0.45 * std::min({L1, L2, L3});
    k1 = 1.0 / (R + h);
    k2 = 1.0 / h;
    k3 = -1.0 / (R - h);
  }

  // Smooth step H (integral of the (1-y^2)^4 bump) and its integral G.
  static double stepH(double y) {
    if (y <= -1) return 0;
    if (y >= 1) return 1;
    const double c = 315.0 / 256.0;
    auto F = [](double v) {
      const double v2 = v * v;
      return v * (1 - v2 * (4.0 / 3.0 - v2 * (6.0 / 5.0 - v2 * (4.0 / 7.0 - v2 / 9.0))));
    };
    return c * (F(y) - F(-1.0));
  }
  double stepG(double x) const {
    if (x <= -delta) return 0;
    if (x >= delta) return x;
    const double w = x / delta;
    const double c = 315.0 / 256.0;
    const double omw2 = 1 - w * w;
    return delta * (w * stepH(w) + c * omw2 * omw2 * omw2 * omw2 * omw2 / 10.0);
  }

  double xi(double s) const {
    return k1 * s + (k2 - k1) * stepG(s - L1) + (k3 - k2) * stepG(s - L1 - L2);
  }
};

}  // namespace

GeneratingCurve GeneratingCurve::bowl(double mid_radius, double half_thickness,
                                      double opening_angle) {
  if (!(half_thickness > 0)) throw std::invalid_argument("bowl: thickness must be positive");
  if (!(mid_radius > 2 * half_thickness))
    throw std::invalid_argument("bowl: mid radius must exceed twice the half thickness");
  if (!(opening_angle > 0.02) || !(opening_angle < 0.6 * kPi))
    throw std::invalid_argument("bowl: opening angle out of range (0.02, 0.6*pi)");

  BowlBuilder bb(mid_radius, half_thickness, opening_angle);

  // Integrate the tangent field on a fine uniform grid; 8-point Gauss per
  // cell keeps the cumulative position error near machine precision.
  const int n_knots = 16384;
  std::vector<double> s_knot(n_knots + 1), r_knot(n_knots + 1), z_knot(n_knots + 1);
  const auto& cell_rule = detail::gauss_legendre(8);
  double r = 0, z = -(bb.R + bb.h);
  r_knot[0] = r;
  z_knot[0] = z;
  s_knot[0] = 0;
  const double ds = bb.L / n_knots;
  for (int i = 0; i < n_knots; ++i) {
    const double a = i * ds, b = (i + 1) * ds;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double dr = 0, dz = 0;
    for (size_t q = 0; q < cell_rule.nodes.size(); ++q) {
      const double xi = bb.xi(mid + half * cell_rule.nodes[q]);
      dr += half * cell_rule.weights[q] * std::cos(xi);
      dz += half * cell_rule.weights[q] * std::sin(xi);
    }
    r += dr;
    z += dz;
    s_knot[i + 1] = b;
    r_knot[i + 1] = r;
    z_knot[i + 1] = z;
  }

  // Blend the residual radial offset to zero over the tail of the inner arc
  // with a quintic step (flat first and second derivatives at both ends).
  const double dr_end = -r_knot[n_knots];
  const double s_blend = bb.L1 + bb.L2 + bb.delta;
  auto blend = [](double x) { return x * x * x * (10 + x * (-15 + 6 * x)); };
  for (int i = 0; i <= n_knots; ++i) {
    if (s_knot[i] > s_blend) {
      const double x = (s_knot[i] - s_blend) / (bb.L - s_blend);
      r_knot[i] += blend(x) * dr_end;
    }
  }
  r_knot[n_knots] = 0.0;

  auto r_spline = std::make_shared<detail::CubicSpline>(
      detail::CubicSpline::clamped(s_knot, r_knot, std::cos(bb.xi(0)), std::cos(bb.xi(bb.L))));
  auto z_spline = std::make_shared<detail::CubicSpline>(
      detail::CubicSpline::clamped(s_knot, z_knot, std::sin(bb.xi(0)), std::sin(bb.xi(bb.L))));

  auto impl = std::make_shared<Impl>();
  impl->kind = CurveKind::Bowl;
  impl->name = "bowl";
  impl->params = {{"mid_radius", mid_radius},
                  {"half_thickness", half_thickness},
                  {"opening_angle", opening_angle}};
  impl->period = bb.L;
  impl->closed = false;
  impl->eval_raw = [r_spline, z_spline](double t, CurvePoint& p) {
    r_spline->eval(t, p.r, p.dr);
    z_spline->eval(t, p.z, p.dz);
  };
  finalize_curve(*impl);
  return GeneratingCurve(std::move(impl));
}

GeneratingCurve GeneratingCurve::custom(std::span<const double> r, std::span<const double> z) {
  if (r.size() != z.size() || r.size() < 8)
    throw std::invalid_argument("custom curve: need >= 8 matching (r, z) samples");
  for (double ri : r)
    if (!(ri > 0)) throw std::invalid_argument("custom curve: samples must satisfy r > 0");
  const size_t n = r.size();
  std::vector<double> ts(n);
  for (size_t i = 0; i < n; ++i) ts[i] = static_cast<double>(i);
  auto rs = std::make_shared<detail::CubicSpline>(
      detail::CubicSpline::periodic(ts, std::vector<double>(r.begin(), r.end()), double(n)));
  auto zs = std::make_shared<detail::CubicSpline>(
      detail::CubicSpline::periodic(ts, std::vector<double>(z.begin(), z.end()), double(n)));

  auto impl = std::make_shared<Impl>();
  impl->kind = CurveKind::Custom;
  impl->name = "custom";
  impl->params.reserve(2 * n);
  for (size_t i = 0; i < n; ++i) {
    impl->params.emplace_back("r" + std::to_string(i), r[i]);
    impl->params.emplace_back("z" + std::to_string(i), z[i]);
  }
  impl->period = static_cast<double>(n);
  impl->closed = true;
  impl->eval_raw = [rs, zs](double t, CurvePoint& p) {
    rs->eval(t, p.r, p.dr);
    zs->eval(t, p.z, p.dz);
  };
  finalize_curve(*impl);
  return GeneratingCurve(std::move(impl));
}

// ---------------------------------------------------------------------------
// RigidMotion

RigidMotion RigidMotion::translation(const Vec3& t) {
  RigidMotion m;
  m.t_ = t;
  return m;
}

RigidMotion RigidMotion::axis_angle(const Vec3& axis, double angle, const Vec3& t) {
  const double n = axis.norm();
  if (!(n > 1e-300)) throw std::invalid_argument("RigidMotion: zero rotation axis");
  RigidMotion m;
  m.q_ = Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis / n));
  m.t_ = t;
  return m;
}

RigidMotion RigidMotion::quaternion(double w, double x, double y, double z, const Vec3& t) {
  Eigen::Quaterniond q(w, x, y, z);
  const double n = q.norm();
  if (!(n > 1e-12)) throw std::invalid_argument("RigidMotion: quaternion too close to zero");
  RigidMotion m;
  m.q_ = q.normalized();
  m.t_ = t;
  return m;
}

RigidMotion RigidMotion::inverse() const {
  RigidMotion m;
  m.q_ = q_.conjugate();
  m.t_ = -(m.q_ * t_);
  return m;
}

RigidMotion RigidMotion::then(const RigidMotion& second) const {
  RigidMotion m;
  m.q_ = second.q_ * q_;
  m.t_ = second.q_ * t_ + second.t_;
  return m;
}

// ---------------------------------------------------------------------------
// Quadrature and grid

double CurveQuadrature::arclength() const {
  double s = 0;
  for (int i = 0; i < size(); ++i) s += weight[i] * point[i].speed();
  return s;
}

double CurveQuadrature::surface_area() const {
  double s = 0;
  for (int i = 0; i < size(); ++i) s += weight[i] * point[i].speed() * point[i].r;
  return kTwoPi * s;
}

double CurveQuadrature::max_spacing() const {
  double h = 0;
  for (int p = 0; p < n_panels; ++p) {
    const double len = panel_breaks[p + 1] - panel_breaks[p];
    for (int g = 0; g < gauss_order; ++g)
      h = std::max(h, point[p * gauss_order + g].speed() * len / gauss_order);
  }
  return h;
}

CurveQuadrature build_curve_quadrature(const GeneratingCurve& curve, int r_panels,
                                       int gauss_order,
                                       const std::function<double(double)>& grading) {
  if (r_panels < 1) throw std::invalid_argument("build_curve_quadrature: r_panels must be >= 1");
  if (gauss_order < 2) throw std::invalid_argument("build_curve_quadrature: gauss order must be >= 2");

  CurveQuadrature cq;
  cq.curve = curve;
  cq.n_panels = r_panels;
  cq.gauss_order = gauss_order;
  const double T = curve.period();
  cq.panel_breaks.resize(r_panels + 1);
  for (int p = 0; p <= r_panels; ++p) {
    const double u = static_cast<double>(p) / r_panels;
    const double g = grading ? grading(u) : u;
    cq.panel_breaks[p] = T * g;
  }
  if (grading) {
    for (int p = 0; p < r_panels; ++p)
      if (!(cq.panel_breaks[p + 1] > cq.panel_breaks[p]))
        throw std::invalid_argument("build_curve_quadrature: grading map must be strictly increasing");
    if (std::abs(cq.panel_breaks[0]) > 1e-14 * T || std::abs(cq.panel_breaks[r_panels] - T) > 1e-14 * T)
      throw std::invalid_argument("build_curve_quadrature: grading must map 0 -> 0 and 1 -> 1");
  }

  const auto& rule = detail::gauss_legendre(gauss_order);
  cq.t.reserve(r_panels * gauss_order);
  cq.weight.reserve(r_panels * gauss_order);
  for (int p = 0; p < r_panels; ++p)
    detail::map_rule(rule, cq.panel_breaks[p], cq.panel_breaks[p + 1], cq.t, cq.weight);

  cq.point.resize(cq.t.size());
  for (size_t i = 0; i < cq.t.size(); ++i) cq.point[i] = curve.eval(cq.t[i]);
  return cq;
}

BodyGrid tensor_grid(const CurveQuadrature& cq, int n_fourier, const RigidMotion& motion,
                     int body_id) {
  if (n_fourier < 4 || n_fourier % 2 == 0)
    throw std::invalid_argument("tensor_grid: n_fourier must be odd and >= 4");

  BodyGrid g;
  g.cq = cq;
  g.n_fourier = n_fourier;
  g.motion = motion;
  g.body_id = body_id;

  const int nc = cq.size();
  const int n = nc * n_fourier;
  g.node.resize(n);
  g.normal.resize(n);
  g.weight.resize(n);

  const double dtheta = kTwoPi / n_fourier;
  for (int j = 0; j < n_fourier; ++j) {
    const double th = j * dtheta;
    const double ct = std::cos(th), st = std::sin(th);
    for (int i = 0; i < nc; ++i) {
      const CurvePoint& p = cq.point[i];
      const int idx = j * nc + i;
      g.node[idx] = motion.apply(Vec3(p.r * ct, p.r * st, p.z));
      g.normal[idx] = motion.rotate(Vec3(p.nr * ct, p.nr * st, p.nz));
      g.weight[idx] = cq.weight[i] * p.speed() * p.r * dtheta;
    }
  }

  Vec3 c = Vec3::Zero();
  for (const auto& x : g.node) c += x;
  c /= n;
  g.center = c;
  double rad = 0, rmax = 0;
  for (const auto& x : g.node) rad = std::max(rad, (x - c).norm());
  g.circumradius = rad;
  for (const auto& p : cq.point) rmax = std::max(rmax, p.r);
  g.max_spacing = std::max(cq.max_spacing(), rmax * dtheta);
  return g;
}

// ---------------------------------------------------------------------------
// Meridian interior utilities

std::vector<std::array<double, 2>> meridian_polygon(const GeneratingCurve& curve, int samples) {
  std::vector<std::array<double, 2>> poly;
  poly.reserve(samples + 2);
  const double T = curve.period();
  for (int i = 0; i < samples; ++i) {
    const CurvePoint p = curve.eval(i * T / samples);
    poly.push_back({p.r, p.z});
  }
  if (!curve.closed_loop()) {
    // Close along the axis between the two endpoint heights.
    const CurvePoint pe = curve.eval(T);
    poly.push_back({0.0, pe.z});
    const CurvePoint p0 = curve.eval(0.0);
    poly.push_back({0.0, p0.z});
  }
  return poly;
}

namespace {

bool point_in_polygon(const std::vector<std::array<double, 2>>& poly, double x, double y) {
  bool inside = false;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const bool cross = (poly[i][1] > y) != (poly[j][1] > y);
    if (cross) {
      const double xi = poly[j][0] + (poly[i][0] - poly[j][0]) * (y - poly[j][1]) /
                                         (poly[i][1] - poly[j][1]);
      if (x < xi) inside = !inside;
    }
  }
  return inside;
}

}  // namespace

bool point_in_meridian(const GeneratingCurve& curve, double r, double z) {
  if (r < 0) return false;
  static thread_local std::vector<std::array<double, 2>> poly;
  static thread_local std::uint64_t cached_hash = 0;
  if (cached_hash != curve.shape_hash()) {
    poly = meridian_polygon(curve, 2048);
    cached_hash = curve.shape_hash();
  }
  return point_in_polygon(poly, r, z);
}

InteriorAnchor inscribed_anchor(const GeneratingCurve& curve) {
  const auto poly = meridian_polygon(curve, 1024);
  double rmin = 1e300, rmax = -1e300, zmin = 1e300, zmax = -1e300;
  for (const auto& p : poly) {
    rmin = std::min(rmin, p[0]);
    rmax = std::max(rmax, p[0]);
    zmin = std::min(zmin, p[1]);
    zmax = std::max(zmax, p[1]);
  }
  auto dist_to_poly = [&](double r, double z) {
    double d2 = 1e300;
    for (size_t i = 0; i < poly.size(); ++i) {
      const auto& a = poly[i];
      const auto& b = poly[(i + 1) % poly.size()];
      const double vx = b[0] - a[0], vy = b[1] - a[1];
      const double wx = r - a[0], wy = z - a[1];
      const double vv = vx * vx + vy * vy;
      double tproj = vv > 0 ? (wx * vx + wy * vy) / vv : 0.0;
      tproj = std::clamp(tproj, 0.0, 1.0);
      const double dx = wx - tproj * vx, dy = wy - tproj * vy;
      d2 = std::min(d2, dx * dx + dy * dy);
    }
    return std::sqrt(d2);
  };

  InteriorAnchor best;
  const int nr = 96, nz = 96;
  for (int i = 0; i <= nr; ++i) {
    const double r = rmin + (rmax - rmin) * i / nr;
    if (r < 0) continue;
    for (int j = 0; j <= nz; ++j) {
      const double z = zmin + (zmax - zmin) * j / nz;
      if (!point_in_polygon(poly, r, z)) continue;
      const double d = dist_to_poly(r, z);
      if (d > best.clearance) best = {r, z, d};
    }
  }
  if (best.clearance <= 0)
    throw SolverError("inscribed_anchor: no interior point found for " + curve.name());
  return best;
}

}  // namespace axiscat
