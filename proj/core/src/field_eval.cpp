#include "axiscat/field_eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "axiscat/detail/parallel.hpp"
#include "axiscat/detail/rng.hpp"

namespace axiscat {

IncidentField IncidentField::plane_wave(const Vec3& dir) {
  const double n = dir.norm();
  if (!(n > 0)) throw std::invalid_argument("plane_wave: zero direction");
  IncidentField f;
  f.kind = Kind::PlaneWave;
  f.direction = dir / n;
  return f;
}

namespace {

bool source_inside_body(const PointSource& s, const SceneBody& body) {
  const Vec3 local = body.grid.motion.inverse().apply(s.position);
  const double r = std::hypot(local.x(), local.y());
  return point_in_meridian(body.grid.cq.curve, r, local.z());
}

}  // namespace

Eigen::VectorXcd dirichlet_data(const IncidentField& incident, const Scene& scene) {
  const long n = scene.total_nodes();
  Eigen::VectorXcd v(n);

  if (incident.kind == IncidentField::Kind::PlaneWave) {
    const double k = scene.kappa().value;
    long idx = 0;
    for (int p = 0; p < scene.num_bodies(); ++p)
      for (const auto& x : scene.body(p).grid.node)
        v[idx++] = std::polar(1.0, k * incident.direction.dot(x));
    return v;
  }

  for (const auto& s : incident.sources) {
    if (s.body < 0 || s.body >= scene.num_bodies())
      throw std::invalid_argument("dirichlet_data: source without a valid owning body");
    if (!source_inside_body(s, scene.body(s.body))) {
      std::ostringstream os;
      os << "dirichlet_data: source at (" << s.position.transpose() << ") lies outside body "
         << s.body;
      throw std::invalid_argument(os.str());
    }
  }

  long idx = 0;
  for (int p = 0; p < scene.num_bodies(); ++p) {
    for (const auto& x : scene.body(p).grid.node) {
      Complex val = 0;
      for (const auto& s : incident.sources)
        val += s.strength * phi(x, s.position, scene.kappa());
      v[idx++] = val;
    }
  }
  return v;
}

FieldValues evaluate_field(const Scene& scene, std::span<const Complex> sigma,
                           std::span<const Vec3> targets, double margin) {
  if (static_cast<long>(sigma.size()) != scene.total_nodes())
    throw std::invalid_argument("evaluate_field: density length mismatch");

  FieldValues out;
  out.values.resize(static_cast<long>(targets.size()));
  out.degraded.assign(targets.size(), false);

  detail::parallel_for(static_cast<std::int64_t>(targets.size()),
                       [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t t = lo; t < hi; ++t) {
      const Vec3& x = targets[t];
      Complex acc = 0;
      double min_dist = 1e300;
      for (int p = 0; p < scene.num_bodies(); ++p) {
        const auto& g = scene.body(p).grid;
        const long off = scene.offset(p);
        Complex body_acc = 0;
        for (int j = 0; j < g.size(); ++j) {
          const Vec3 diff = x - g.node[j];
          const double d = diff.norm();
          min_dist = std::min(min_dist, d);
          body_acc += combined_kernel(x, g.node[j], g.normal[j], scene.spec(), scene.kappa()) *
                      g.weight[j] * sigma[off + j];
        }
        acc += body_acc;
      }
      out.values[t] = acc;
      if (margin > 0 && min_dist < margin) out.degraded[t] = true;
    }
  });
  return out;
}

double rel_inf_error(std::span<const Complex> approx, std::span<const Complex> exact) {
  if (approx.size() != exact.size())
    throw std::invalid_argument("rel_inf_error: length mismatch");
  double num = 0, den = 0;
  for (size_t i = 0; i < exact.size(); ++i) {
    num = std::max(num, std::abs(approx[i] - exact[i]));
    den = std::max(den, std::abs(exact[i]));
  }
  if (!(den > 0)) throw std::invalid_argument("rel_inf_error: exact field has zero norm");
  return num / den;
}

VerificationProblem make_verification_problem(const Scene& scene, std::uint64_t seed,
                                              const VerificationOptions& opt) {
  VerificationProblem prob;
  prob.seed = seed;

  // One unit-strength source per body, placed inside a ball around the
  // deepest interior point of the meridian region.
  std::vector<PointSource> sources;
  for (int p = 0; p < scene.num_bodies(); ++p) {
    const auto& body = scene.body(p);
    detail::Rng rng(detail::derive_seed(seed, 1000 + p));
    const InteriorAnchor anchor = inscribed_anchor(body.grid.cq.curve);
    const double theta = rng.uniform(0, kTwoPi);
    const Vec3 anchor3d(anchor.r * std::cos(theta), anchor.r * std::sin(theta), anchor.z);
    PointSource s;
    s.body = p;
    s.strength = Complex(1, 0);
    for (int attempt = 0; attempt < 128; ++attempt) {
      const auto b = rng.in_unit_ball();
      const Vec3 local = anchor3d + opt.source_ball_fraction * anchor.clearance *
                                        Vec3(b[0], b[1], b[2]);
      const double r = std::hypot(local.x(), local.y());
      if (point_in_meridian(body.grid.cq.curve, r, local.z())) {
        s.position = body.grid.motion.apply(local);
        break;
      }
      if (attempt == 127)
        throw SolverError("make_verification_problem: could not place an interior source");
    }
    sources.push_back(s);
  }
  prob.incident = IncidentField::point_sources(std::move(sources));

  // Targets outside the scene, respecting the clearance margin.
  Vec3 center = Vec3::Zero();
  for (int p = 0; p < scene.num_bodies(); ++p) center += scene.body(p).grid.center;
  center /= scene.num_bodies();
  double scene_radius = 0, max_spacing = 0;
  for (int p = 0; p < scene.num_bodies(); ++p) {
    const auto& g = scene.body(p).grid;
    scene_radius = std::max(scene_radius, (g.center - center).norm() + g.circumradius);
    max_spacing = std::max(max_spacing, g.max_spacing);
  }
  prob.targets.margin = opt.margin_spacings * max_spacing;

  detail::Rng trng(detail::derive_seed(seed, 77));
  while (static_cast<int>(prob.targets.points.size()) < opt.n_targets) {
    const auto d = trng.on_unit_sphere();
    const double rad = scene_radius * (1.4 + 1.1 * trng.uniform());
    const Vec3 x = center + rad * Vec3(d[0], d[1], d[2]);
    bool ok = true;
    for (int p = 0; p < scene.num_bodies() && ok; ++p) {
      const auto& g = scene.body(p).grid;
      if ((x - g.center).norm() - g.circumradius > prob.targets.margin) continue;
      for (const auto& node : g.node)
        if ((x - node).norm() < prob.targets.margin) {
          ok = false;
          break;
        }
    }
    if (ok) prob.targets.points.push_back(x);
  }

  // The scattered field must cancel the interior sources outside the bodies.
  prob.u_exact.resize(opt.n_targets);
  for (int t = 0; t < opt.n_targets; ++t) {
    Complex val = 0;
    for (const auto& s : prob.incident.sources)
      val += s.strength * phi(prob.targets.points[t], s.position, scene.kappa());
    prob.u_exact[t] = -val;
  }
  return prob;
}

}  // namespace axiscat
