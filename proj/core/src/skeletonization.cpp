#include "axiscat/skeletonization.hpp"

#include <algorithm>
#include <cmath>

#include "axiscat/detail/parallel.hpp"
#include "axiscat/detail/rng.hpp"

namespace axiscat {

ProxySurface build_proxy_surface(const BodyGrid& body, double radius, int n_points) {
  if (!(radius > body.circumradius))
    throw std::invalid_argument("build_proxy_surface: proxy must strictly enclose the body");
  if (n_points < 8) throw std::invalid_argument("build_proxy_surface: too few proxy points");

  ProxySurface proxy;
  proxy.center = body.center;
  proxy.radius = radius;
  proxy.points.reserve(n_points);
  // Fibonacci spiral.
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n_points; ++i) {
    const double zf = 1.0 - 2.0 * (i + 0.5) / n_points;
    const double rf = std::sqrt(std::max(0.0, 1.0 - zf * zf));
    const double th = golden * i;
    proxy.points.push_back(proxy.center +
                           radius * Vec3(rf * std::cos(th), rf * std::sin(th), zf));
  }
  return proxy;
}

Eigen::MatrixXcd build_incoming_matrix(const BodyGrid& body, const ProxySurface& proxy,
                                       const KernelSpec& spec, WaveNumber kappa) {
  const int n = body.size();
  const int np = static_cast<int>(proxy.points.size());
  Eigen::MatrixXcd M(n, np);
  detail::parallel_for(np, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t j = lo; j < hi; ++j) {
      const Vec3& pj = proxy.points[j];
      const Vec3 nj = (pj - proxy.center).normalized();
      for (int i = 0; i < n; ++i)
        M(i, j) = combined_kernel(body.node[i], pj, nj, spec, kappa);
    }
  });
  return M;
}

Eigen::MatrixXcd build_outgoing_matrix(const BodyGrid& body, const ProxySurface& proxy,
                                       const KernelSpec& spec, WaveNumber kappa) {
  const int n = body.size();
  const int np = static_cast<int>(proxy.points.size());
  Eigen::MatrixXcd M(n, np);
  detail::parallel_for(np, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t j = lo; j < hi; ++j) {
      const Vec3& pj = proxy.points[j];
      for (int i = 0; i < n; ++i)
        M(i, j) = combined_kernel(pj, body.node[i], body.normal[i], spec, kappa) *
                  body.weight[i];
    }
  });
  return M;
}

namespace {

struct PivotedFactors {
  Eigen::VectorXi perm;      // column order of the sketch (= row order of M)
  Eigen::MatrixXcd R;        // upper-triangular factor in that order
  Eigen::VectorXd diag_abs;  // |R(i,i)|
};

PivotedFactors column_pivoted_qr(const Eigen::MatrixXcd& A) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(A);
  PivotedFactors f;
  f.perm = qr.colsPermutation().indices();
  const auto m = std::min(A.rows(), A.cols());
  f.R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  f.diag_abs.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) f.diag_abs[i] = std::abs(f.R(i, i));
  return f;
}

// Householder QR with a fixed column order (used after pivot swaps).
void requantify_fixed_order(const Eigen::MatrixXcd& A, PivotedFactors& f) {
  Eigen::MatrixXcd Ap(A.rows(), A.cols());
  for (Eigen::Index j = 0; j < A.cols(); ++j) Ap.col(j) = A.col(f.perm[j]);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Ap);
  const auto m = std::min(A.rows(), A.cols());
  f.R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < m; ++i) f.diag_abs[i] = std::abs(f.R(i, i));
}

}  // namespace

IdResult randomized_id(const Eigen::MatrixXcd& M, double epsilon, const IdOptions& opt) {
  if (!(epsilon > 0) || !(epsilon < 1))
    throw std::invalid_argument("randomized_id: epsilon must be in (0, 1)");
  if (!M.allFinite()) throw std::invalid_argument("randomized_id: matrix has non-finite entries");

  const Eigen::Index n = M.rows(), s = M.cols();
  const Eigen::Index max_sketch = std::min(n, s);

  Eigen::Index l = std::min<Eigen::Index>(max_sketch, opt.rank_guess + opt.oversampling);
  int attempt = 0;
  PivotedFactors f;
  Eigen::MatrixXcd sketch_t;
  Eigen::Index k = 0;

  while (true) {
    detail::Rng rng(detail::derive_seed(opt.seed, 31 + attempt));
    Eigen::MatrixXcd omega(s, l);
    for (Eigen::Index j = 0; j < l; ++j)
      for (Eigen::Index i = 0; i < s; ++i) omega(i, j) = rng.normal_complex();

    Eigen::MatrixXcd sketch = M * omega;  // n x l; rows inherit row dependencies of M
    for (int it = 0; it < opt.power_iterations; ++it) sketch = M * (M.adjoint() * sketch);
    sketch_t = sketch.transpose();

    f = column_pivoted_qr(sketch_t);

    const double d0 = f.diag_abs.size() ? f.diag_abs[0] : 0.0;
    k = 0;
    while (k < f.diag_abs.size() && f.diag_abs[k] > epsilon * d0) ++k;

    const bool saturated = k + opt.oversampling / 2 >= l;
    if (saturated && l < max_sketch) {
      l = std::min(max_sketch, 2 * l);
      ++attempt;
      continue;
    }
    break;
  }

  IdResult res;
  res.rank = static_cast<int>(k);
  if (k == 0) {
    res.interp.resize(n, 0);
    return res;
  }

  // Interpolation coefficients T = R11^{-1} R12 with the magnitude cap
  // enforced by pivot swaps (Gu-Eisenstat style, recomputing the fixed-order
  // QR after each swap).
  Eigen::MatrixXcd T;
  for (int swaps = 0;; ++swaps) {
    T = f.R.topLeftCorner(k, k)
            .triangularView<Eigen::Upper>()
            .solve(f.R.block(0, k, k, n - k));
    Eigen::Index bi = 0, bj = 0;
    const double tmax = k > 0 && n > k ? T.cwiseAbs().maxCoeff(&bi, &bj) : 0.0;
    if (tmax <= opt.coef_cap || swaps >= 64) break;
    std::swap(f.perm[bi], f.perm[k + bj]);
    requantify_fixed_order(sketch_t, f);
  }

  res.skeleton.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) res.skeleton[i] = f.perm[i];

  res.interp = Eigen::MatrixXcd::Zero(n, k);
  for (Eigen::Index i = 0; i < k; ++i) res.interp(f.perm[i], i) = 1.0;
  for (Eigen::Index j = k; j < n; ++j)
    for (Eigen::Index i = 0; i < k; ++i) res.interp(f.perm[j], i) = T(i, j - k);

  double tail = 0, head = 0;
  for (Eigen::Index i = 0; i < f.diag_abs.size(); ++i) {
    const double d2 = f.diag_abs[i] * f.diag_abs[i];
    if (i < k)
      head += d2;
    else
      tail += d2;
  }
  res.error_estimate = head > 0 ? std::sqrt(tail / head) : 0.0;
  return res;
}

SkeletonData skeletonize_body(const Scene& scene, int body_index, double epsilon,
                              const SkeletonOptions& opt) {
  const auto& body = scene.body(body_index).grid;
  const int n = body.size();

  // Clearance from this body's center to the nearest foreign node bounds how
  // far the proxy sphere may grow while still separating the body from all
  // possible sources.
  double clearance = 1e300;
  for (int q = 0; q < scene.num_bodies(); ++q) {
    if (q == body_index) continue;
    for (const auto& x : scene.body(q).grid.node)
      clearance = std::min(clearance, (x - body.center).norm());
  }

  double radius = opt.proxy_radius_factor * body.circumradius;
  bool clipped = false;
  if (opt.separation_aware && scene.num_bodies() > 1) {
    radius = std::max(radius, 0.95 * clearance);
    if (radius >= clearance) clipped = true;
  }
  radius = std::max(radius, 1.02 * body.circumradius);

  SkeletonData sk;
  sk.body = body_index;
  sk.epsilon = epsilon;
  sk.seed = detail::derive_seed(opt.seed, 5000 + body_index);
  sk.proxy_clipped = clipped;

  IdOptions id_opt;
  id_opt.oversampling = opt.oversampling;
  id_opt.coef_cap = opt.coef_cap;
  id_opt.power_iterations = scene.spec().equation == Equation::Helmholtz ? 1 : 0;
  id_opt.seed = sk.seed;

  int n_proxy = std::max(opt.min_proxy_points, 4 * id_opt.rank_guess);
  for (int round = 0;; ++round) {
    const ProxySurface proxy = build_proxy_surface(body, radius, n_proxy);
    Eigen::MatrixXcd incoming = build_incoming_matrix(body, proxy, scene.spec(), scene.kappa());
    Eigen::MatrixXcd outgoing = build_outgoing_matrix(body, proxy, scene.spec(), scene.kappa());
    const double ni = incoming.norm(), no = outgoing.norm();
    if (ni > 0) incoming /= ni;
    if (no > 0) outgoing /= no;
    Eigen::MatrixXcd both(n, 2 * n_proxy);
    both << incoming, outgoing;

    IdResult id = randomized_id(both, epsilon, id_opt);

    // Rank saturating against the proxy sample count means the basis was too
    // coarse: enlarge and rerun.
    if (id.rank >= static_cast<int>(0.45 * 2 * n_proxy) && round < 6) {
      n_proxy *= 2;
      ++sk.enlargements;
      id_opt.rank_guess = std::max(id_opt.rank_guess, id.rank);
      continue;
    }

    sk.rank = id.rank;
    sk.skeleton = std::move(id.skeleton);
    sk.U = std::move(id.interp);
    sk.V = sk.U.conjugate();
    sk.proxy_radius = radius;
    sk.proxy_points = n_proxy;
    return sk;
  }
}

ReducedSystem form_reduced_system(const Scene& scene, std::vector<SkeletonData> skeletons) {
  if (static_cast<int>(skeletons.size()) != scene.num_bodies())
    throw std::invalid_argument("form_reduced_system: one skeleton per body required");

  ReducedSystem rs;
  rs.scene = &scene;
  rs.skeletons = std::move(skeletons);
  rs.offsets.resize(scene.num_bodies() + 1, 0);
  for (int p = 0; p < scene.num_bodies(); ++p)
    rs.offsets[p + 1] = rs.offsets[p] + rs.skeletons[p].rank;
  rs.total_reduced = rs.offsets.back();

  rs.S.resize(scene.num_bodies());
  for (int p = 0; p < scene.num_bodies(); ++p) {
    const auto& op = *scene.body(p).op;
    const auto& sk = rs.skeletons[p];
    const int n = scene.body(p).grid.size();
    const int k = sk.rank;
    Eigen::MatrixXcd ainv_u(n, k);
    for (int c = 0; c < k; ++c) ainv_u.col(c) = op.apply_inverse(Eigen::VectorXcd(sk.U.col(c)));
    rs.S[p] = sk.V.adjoint() * ainv_u;
  }
  return rs;
}

void ReducedSystem::set_rhs(std::span<const Complex> v) {
  const Scene& sc = *scene;
  if (static_cast<long>(v.size()) != sc.total_nodes())
    throw std::invalid_argument("set_rhs: boundary data length mismatch");
  v_reduced.assign(sc.num_bodies(), {});
  for (int p = 0; p < sc.num_bodies(); ++p) {
    const int n = sc.body(p).grid.size();
    Eigen::VectorXcd vp =
        Eigen::Map<const Eigen::VectorXcd>(v.data() + sc.offset(p), n);
    v_reduced[p] = skeletons[p].V.adjoint() * sc.body(p).op->apply_inverse(vp);
  }
}

void ReducedSystem::apply_B_reduced(std::span<const Complex> x,
                                    std::span<Complex> out) const {
  const Scene& sc = *scene;
  if (static_cast<long>(x.size()) != total_reduced ||
      static_cast<long>(out.size()) != total_reduced)
    throw std::invalid_argument("apply_B_reduced: length mismatch");

  detail::parallel_for(total_reduced, [&](std::int64_t lo, std::int64_t hi) {
    std::vector<Complex> terms;
    for (std::int64_t gi = lo; gi < hi; ++gi) {
      int tp = 0;
      while (offsets[tp + 1] <= gi) ++tp;
      const int a = skeletons[tp].skeleton[gi - offsets[tp]];
      Complex acc = 0;
      for (int q = 0; q < sc.num_bodies(); ++q) {
        if (q == tp) continue;
        const auto& skq = skeletons[q];
        terms.resize(skq.rank);
        for (int b = 0; b < skq.rank; ++b)
          terms[b] = sc.offdiag_entry(tp, a, q, skq.skeleton[b]) * x[offsets[q] + b];
        Complex s = 0;
        for (size_t i = 0; i < terms.size(); ++i) s += terms[i];
        acc += s;
      }
      out[gi] = acc;
    }
  });
}

std::pair<Eigen::VectorXcd, SolveReport> solve_reduced(const ReducedSystem& reduced,
                                                       const GmresConfig& cfg) {
  cfg.validate();
  if (reduced.v_reduced.empty())
    throw std::invalid_argument("solve_reduced: call set_rhs first");
  const Scene& sc = *reduced.scene;
  const long nred = reduced.total_reduced;

  const auto t0 = std::chrono::steady_clock::now();

  Eigen::VectorXcd b(nred);
  for (int p = 0; p < sc.num_bodies(); ++p)
    b.segment(reduced.offsets[p], reduced.skeletons[p].rank) = -reduced.v_reduced[p];

  LinearOperator op = [&](std::span<const Complex> in, std::span<Complex> out) {
    Eigen::VectorXcd bx(nred);
    reduced.apply_B_reduced(in, std::span<Complex>(bx.data(), nred));
    for (int p = 0; p < sc.num_bodies(); ++p) {
      const long off = reduced.offsets[p];
      const int k = reduced.skeletons[p].rank;
      Eigen::Map<Eigen::VectorXcd>(out.data() + off, k) =
          Eigen::Map<const Eigen::VectorXcd>(in.data() + off, k) +
          reduced.S[p] * bx.segment(off, k);
    }
  };

  GmresResult gm = gmres(op, std::span<const Complex>(b.data(), nred), cfg);

  SolveReport rep;
  rep.iterations = gm.iterations;
  rep.residual_history = std::move(gm.residual_history);
  rep.converged = gm.converged;
  rep.stagnated = !gm.converged;
  rep.preconditioned = true;
  rep.gmres_tol = cfg.tol;
  rep.total_nodes = nred;
  rep.num_bodies = sc.num_bodies();
  for (const auto& sk : reduced.skeletons) rep.nodes_per_body.push_back(sk.rank);
  rep.t_solve = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(gm.x), std::move(rep)};
}

Eigen::VectorXcd reconstruct_density(const ReducedSystem& reduced,
                                     std::span<const Complex> sigma_reduced,
                                     std::span<const Complex> v) {
  const Scene& sc = *reduced.scene;
  if (static_cast<long>(sigma_reduced.size()) != reduced.total_reduced)
    throw std::invalid_argument("reconstruct_density: reduced solution length mismatch");
  if (static_cast<long>(v.size()) != sc.total_nodes())
    throw std::invalid_argument("reconstruct_density: boundary data length mismatch");

  Eigen::VectorXcd coupling(reduced.total_reduced);
  reduced.apply_B_reduced(sigma_reduced,
                          std::span<Complex>(coupling.data(), reduced.total_reduced));

  Eigen::VectorXcd sigma(sc.total_nodes());
  for (int p = 0; p < sc.num_bodies(); ++p) {
    const int n = sc.body(p).grid.size();
    const auto& sk = reduced.skeletons[p];
    Eigen::VectorXcd g = Eigen::Map<const Eigen::VectorXcd>(v.data() + sc.offset(p), n);
    g += sk.U * coupling.segment(reduced.offsets[p], sk.rank);
    sigma.segment(sc.offset(p), n) = -sc.body(p).op->apply_inverse(g);
  }
  return sigma;
}

}  // namespace axiscat
