#include "axiscat/multibody.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "axiscat/detail/parallel.hpp"

namespace axiscat {

namespace {

Complex pairwise_sum(std::span<const Complex> terms) {
  const size_t n = terms.size();
  if (n <= 32) {
    Complex s = 0;
    for (const Complex& t : terms) s += t;
    return s;
  }
  const size_t half = n / 2;
  return pairwise_sum(terms.subspan(0, half)) + pairwise_sum(terms.subspan(half));
}

}  // namespace

Scene::Scene(std::vector<SceneBody> bodies, KernelSpec spec, WaveNumber kappa)
    : bodies_(std::move(bodies)), spec_(spec), kappa_(kappa) {
  if (bodies_.empty()) throw std::invalid_argument("Scene: needs at least one body");
  if (spec_.equation == Equation::Helmholtz && kappa_.value == 0)
    throw std::invalid_argument("Scene: helmholtz requires kappa > 0");

  offsets_.resize(bodies_.size() + 1, 0);
  for (size_t p = 0; p < bodies_.size(); ++p) {
    if (!bodies_[p].op) throw std::invalid_argument("Scene: body without factorized operator");
    if (bodies_[p].op->size() != bodies_[p].grid.size())
      throw std::invalid_argument("Scene: grid/operator size mismatch");
    offsets_[p + 1] = offsets_[p] + bodies_[p].grid.size();
  }
  total_nodes_ = offsets_.back();

  const int m = num_bodies();
  pair_distance_.setZero(m, m);
  std::vector<std::pair<int, int>> pairs;
  for (int p = 0; p < m; ++p)
    for (int q = p + 1; q < m; ++q) pairs.emplace_back(p, q);

  detail::parallel_for(static_cast<std::int64_t>(pairs.size()),
                       [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t k = lo; k < hi; ++k) {
      const auto [p, q] = pairs[k];
      const auto& a = bodies_[p].grid;
      const auto& b = bodies_[q].grid;
      double d2 = 1e300;
      for (const auto& xa : a.node)
        for (const auto& xb : b.node) d2 = std::min(d2, (xa - xb).squaredNorm());
      pair_distance_(p, q) = pair_distance_(q, p) = std::sqrt(d2);
    }
  });

  for (const auto& [p, q] : pairs) {
    const double d = pair_distance_(p, q);
    const double h = 2 * std::max(bodies_[p].grid.max_spacing, bodies_[q].grid.max_spacing);
    if (!(d > 0)) {
      std::ostringstream os;
      os << "Scene: bodies " << p << " and " << q << " touch or overlap";
      throw std::invalid_argument(os.str());
    }
    if (d < h) {
      std::ostringstream os;
      os << "bodies " << p << " and " << q << " are closer (" << d
         << ") than twice the local node spacing (" << h << "); accuracy may degrade";
      warnings_.push_back(os.str());
    }
  }
}

double Scene::pair_distance(int p, int q) const {
  if (p == q) return 0;
  return pair_distance_(p, q);
}

double Scene::min_separation() const {
  double d = 1e300;
  for (int p = 0; p < num_bodies(); ++p)
    for (int q = p + 1; q < num_bodies(); ++q) d = std::min(d, pair_distance_(p, q));
  return num_bodies() > 1 ? d : 1e300;
}

Complex Scene::offdiag_entry(int p, int i, int q, int j) const {
  if (p == q) throw std::invalid_argument("offdiag_entry: same-body pair");
  const auto& tb = bodies_[p].grid;
  const auto& sb = bodies_[q].grid;
  return combined_kernel(tb.node[i], sb.node[j], sb.normal[j], spec_, kappa_) * sb.weight[j];
}

void Scene::apply_B(std::span<const Complex> sigma, std::span<Complex> out) const {
  if (static_cast<long>(sigma.size()) != total_nodes_ ||
      static_cast<long>(out.size()) != total_nodes_)
    throw std::invalid_argument("apply_B: vector length mismatch");
  if (num_bodies() == 1) {
    std::fill(out.begin(), out.end(), Complex(0));
    return;
  }

  detail::parallel_for(total_nodes_, [&](std::int64_t lo, std::int64_t hi) {
    std::vector<Complex> terms;
    for (std::int64_t gi = lo; gi < hi; ++gi) {
      int tp = 0;
      while (offsets_[tp + 1] <= gi) ++tp;
      const Vec3& x = bodies_[tp].grid.node[gi - offsets_[tp]];
      Complex acc = 0;
      for (int q = 0; q < num_bodies(); ++q) {
        if (q == tp) continue;
        const auto& src = bodies_[q].grid;
        const long off = offsets_[q];
        const int nq = src.size();
        terms.resize(nq);
        for (int j = 0; j < nq; ++j)
          terms[j] = combined_kernel(x, src.node[j], src.normal[j], spec_, kappa_) *
                     src.weight[j] * sigma[off + j];
        acc += pairwise_sum(terms);
      }
      out[gi] = acc;
    }
  });
}

void Scene::apply_D_forward(std::span<const Complex> in, std::span<Complex> out) const {
  for (int p = 0; p < num_bodies(); ++p) {
    const long off = offsets_[p];
    const long n = bodies_[p].grid.size();
    bodies_[p].op->apply_forward(in.subspan(off, n), out.subspan(off, n));
  }
}

void Scene::apply_D_inverse(std::span<const Complex> in, std::span<Complex> out) const {
  for (int p = 0; p < num_bodies(); ++p) {
    const long off = offsets_[p];
    const long n = bodies_[p].grid.size();
    bodies_[p].op->apply_inverse(in.subspan(off, n), out.subspan(off, n));
  }
}

std::pair<Eigen::VectorXcd, SolveReport> solve(const Scene& scene,
                                               std::span<const Complex> v,
                                               const GmresConfig& cfg) {
  cfg.validate();
  const long n = scene.total_nodes();
  if (static_cast<long>(v.size()) != n)
    throw std::invalid_argument("solve: boundary data length mismatch");

  const auto t0 = std::chrono::steady_clock::now();

  Eigen::VectorXcd b(n);
  for (long i = 0; i < n; ++i) b[i] = -v[i];
  if (cfg.precondition) {
    Eigen::VectorXcd tmp = b;
    scene.apply_D_inverse(std::span<const Complex>(tmp.data(), n),
                          std::span<Complex>(b.data(), n));
  }

  LinearOperator op;
  if (cfg.precondition) {
    op = [&scene, n](std::span<const Complex> in, std::span<Complex> out) {
      Eigen::VectorXcd bs(n), dbs(n);
      scene.apply_B(in, std::span<Complex>(bs.data(), n));
      scene.apply_D_inverse(std::span<const Complex>(bs.data(), n),
                            std::span<Complex>(dbs.data(), n));
      for (long i = 0; i < n; ++i) out[i] = in[i] + dbs[i];
    };
  } else {
    op = [&scene, n](std::span<const Complex> in, std::span<Complex> out) {
      Eigen::VectorXcd bs(n);
      scene.apply_B(in, std::span<Complex>(bs.data(), n));
      scene.apply_D_forward(in, out);
      for (long i = 0; i < n; ++i) out[i] += bs[i];
    };
  }

  GmresResult gm = gmres(op, std::span<const Complex>(b.data(), n), cfg);

  SolveReport rep;
  rep.iterations = gm.iterations;
  rep.residual_history = std::move(gm.residual_history);
  rep.converged = gm.converged;
  rep.stagnated = !gm.converged;
  rep.preconditioned = cfg.precondition;
  rep.gmres_tol = cfg.tol;
  rep.total_nodes = n;
  rep.num_bodies = scene.num_bodies();
  for (int p = 0; p < scene.num_bodies(); ++p)
    rep.nodes_per_body.push_back(scene.body(p).grid.size());
  rep.t_solve = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(gm.x), std::move(rep)};
}

}  // namespace axiscat
