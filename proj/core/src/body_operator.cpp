#include "axiscat/body_operator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "axiscat/detail/fft.hpp"
#include "axiscat/detail/parallel.hpp"
#include "axiscat/detail/quadrature.hpp"

namespace axiscat {

namespace {

// 3-D combined kernel between curve node `target` and the source meridian
// point, as a function of the azimuth difference.
struct PairKernel {
  double r, z, rp, zp, nrp, nzp, kappa, rr2;
  Complex coupling;

  PairKernel(const CurvePoint& target, const CurvePoint& src, const KernelSpec& spec,
             double kappa_)
      : r(target.r), z(target.z), rp(src.r), zp(src.z), nrp(src.nr), nzp(src.nz),
        kappa(kappa_), coupling(spec.coupling) {
    const double dz = z - zp;
    rr2 = r * r + rp * rp + dz * dz;
  }

  Complex operator()(double psi) const {
    const double c = std::cos(psi);
    const double d2 = rr2 - 2 * r * rp * c;
    const double d = std::sqrt(d2);
    const double inv4pid = 1.0 / (4 * kPi * d);
    const double dn = (r * c - rp) * nrp + (z - zp) * nzp;
    if (kappa == 0) return Complex((dn / d2 + coupling.real()) * inv4pid,
                                   coupling.imag() * inv4pid);
    const Complex e = std::polar(inv4pid, kappa * d);
    return e * (Complex(1.0, -kappa * d) * dn / d2) + coupling * e;
  }
};

int panel_distance(int a, int b, int n_panels, bool closed) {
  int d = std::abs(a - b);
  if (closed) d = std::min(d, n_panels - d);
  return d;
}

struct AssemblyPlan {
  const CurveQuadrature& cq;
  int n_fourier;
  const KernelSpec& spec;
  WaveNumber kappa;
  const std::vector<int>& mode_list;  // signed modes to assemble
  const AssemblyOptions& opt;
};

// Entries for all non-band pairs of one target row come from the N_F-point
// azimuthal trapezoid rule evaluated by FFT; this keeps the single-body
// operator exactly circulant against the naive 3-D rule.
void assemble_far_row(const AssemblyPlan& plan, int i, std::vector<Eigen::MatrixXcd>& out) {
  const auto& cq = plan.cq;
  const int nc = cq.size();
  const int nf = plan.n_fourier;
  const int g = cq.gauss_order;
  const bool closed = cq.curve.closed_loop();
  std::vector<Complex> samples(nf);
  for (int j = 0; j < nc; ++j) {
    if (panel_distance(i / g, j / g, cq.n_panels, closed) <= 1) continue;
    const PairKernel ker(cq.point[i], cq.point[j], plan.spec, plan.kappa.value);
    for (int l = 0; l < nf; ++l) samples[l] = ker(kTwoPi * l / nf);
    detail::fft_forward(samples);
    const double wj = cq.weight[j] * cq.point[j].speed() * cq.point[j].r;
    const double scale = kTwoPi / nf * wj;
    for (size_t mi = 0; mi < plan.mode_list.size(); ++mi) {
      const int p = plan.mode_list[mi];
      const int bin = ((p % nf) + nf) % nf;
      out[mi](i, j) = scale * samples[bin];
    }
  }
}

// Interpolatory corrected weights for one target row: the contribution of
// the target's own panel and its neighbours is recomputed by adaptive
// quadrature of the modal kernel against the panels' Legendre cardinal
// functions, replacing the naive weights there.
void correct_row(const AssemblyPlan& plan, int i, std::vector<Eigen::MatrixXcd>& out) {
  const auto& cq = plan.cq;
  const int g = cq.gauss_order;
  const bool closed = cq.curve.closed_loop();
  const int own = i / g;
  const int max_abs_mode =
      std::abs(*std::max_element(plan.mode_list.begin(), plan.mode_list.end(),
                                 [](int a, int b) { return std::abs(a) < std::abs(b); }));
  const int n_modes = static_cast<int>(plan.mode_list.size());
  const double ri = cq.point[i].r, zi = cq.point[i].z;

  std::set<int> panels;
  for (int d = -1; d <= 1; ++d) {
    int p = own + d;
    if (closed) p = (p + cq.n_panels) % cq.n_panels;
    if (p >= 0 && p < cq.n_panels) panels.insert(p);
  }

  for (int panel : panels) {
    const double a = cq.panel_breaks[panel], b = cq.panel_breaks[panel + 1];
    const int j0 = panel * g;

    auto integrand = [&](double t, std::span<Complex> vals) {
      const CurvePoint src = cq.curve.eval(t);
      const ModalKernelTable table =
          modal_kernels(ri, zi, src, plan.spec, plan.kappa, max_abs_mode);
      const double jac = src.r * src.speed();
      for (int jl = 0; jl < g; ++jl) {
        double lag = 1.0;
        const double tj = cq.t[j0 + jl];
        for (int k = 0; k < g; ++k) {
          if (k == jl) continue;
          lag *= (t - cq.t[j0 + k]) / (tj - cq.t[j0 + k]);
        }
        for (int mi = 0; mi < n_modes; ++mi)
          vals[mi * g + jl] = table.mode(plan.mode_list[mi]) * lag * jac;
      }
    };

    const int dim = n_modes * g;
    Eigen::VectorXcd total = Eigen::VectorXcd::Zero(dim);
    const double ti = cq.t[i];
    if (panel == own) {
      auto left = detail::adaptive_integrate(integrand, dim, a, ti, plan.opt.correction_tol,
                                             plan.opt.correction_max_depth);
      auto right = detail::adaptive_integrate(integrand, dim, ti, b, plan.opt.correction_tol,
                                              plan.opt.correction_max_depth);
      total = left.value + right.value;
    } else {
      total = detail::adaptive_integrate(integrand, dim, a, b, plan.opt.correction_tol,
                                         plan.opt.correction_max_depth)
                  .value;
    }

    const double s2pi = std::sqrt(kTwoPi);
    for (int mi = 0; mi < n_modes; ++mi)
      for (int jl = 0; jl < g; ++jl) out[mi](i, j0 + jl) = s2pi * total[mi * g + jl];
  }
}

std::vector<Eigen::MatrixXcd> assemble_core(const CurveQuadrature& cq, int n_fourier,
                                            const KernelSpec& spec, WaveNumber kappa,
                                            const std::vector<int>& mode_list,
                                            const AssemblyOptions& opt) {
  if (n_fourier < 4 || n_fourier % 2 == 0)
    throw std::invalid_argument("assemble: n_fourier must be odd and >= 4");
  const int max_mode = (n_fourier - 1) / 2;
  for (int p : mode_list)
    if (std::abs(p) > max_mode)
      throw std::invalid_argument("assemble: mode out of range for n_fourier");

  const int nc = cq.size();
  std::vector<Eigen::MatrixXcd> out(mode_list.size());
  for (auto& m : out) m = Eigen::MatrixXcd::Zero(nc, nc);

  AssemblyPlan plan{cq, n_fourier, spec, kappa, mode_list, opt};
  detail::parallel_for(nc, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      assemble_far_row(plan, static_cast<int>(i), out);
      correct_row(plan, static_cast<int>(i), out);
    }
  });

  for (auto& m : out) m.diagonal().array() += 0.5;

  for (size_t mi = 0; mi < out.size(); ++mi) {
    if (!out[mi].allFinite()) {
      for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nc; ++j)
          if (!std::isfinite(out[mi](i, j).real()) || !std::isfinite(out[mi](i, j).imag())) {
            std::ostringstream os;
            os << "assembly produced a non-finite entry at mode " << mode_list[mi]
               << ", node pair (" << i << ", " << j << ")";
            throw SolverError(os.str());
          }
    }
  }
  return out;
}

}  // namespace

ModalSystem assemble_modal_system(const CurveQuadrature& cq, int n_fourier,
                                  const KernelSpec& spec, WaveNumber kappa,
                                  const AssemblyOptions& opt) {
  ModalSystem ms;
  ms.n_curve = cq.size();
  ms.n_fourier = n_fourier;
  ms.kappa = kappa;
  ms.spec = spec;
  std::vector<int> modes(ms.max_mode() + 1);
  for (int p = 0; p <= ms.max_mode(); ++p) modes[p] = p;
  ms.modes = assemble_core(cq, n_fourier, spec, kappa, modes, opt);
  return ms;
}

Eigen::MatrixXcd assemble_modal_matrix(const CurveQuadrature& cq, int n_fourier,
                                       const KernelSpec& spec, WaveNumber kappa, int p,
                                       const AssemblyOptions& opt) {
  return assemble_core(cq, n_fourier, spec, kappa, {p}, opt)[0];
}

// ---------------------------------------------------------------------------

BodyOperator BodyOperator::factorize(std::shared_ptr<const ModalSystem> system) {
  if (!system || system->modes.empty())
    throw std::invalid_argument("factorize: empty modal system");
  const int n_modes = static_cast<int>(system->modes.size());

  BodyOperator op;
  op.system_ = std::move(system);
  op.lu_.resize(n_modes);
  op.perm_.resize(n_modes);
  op.cond_.resize(n_modes);

  std::vector<std::string> failures(n_modes);
  detail::parallel_for(n_modes, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t p = lo; p < hi; ++p) {
      const auto& mat = op.system_->modes[p];
      if (!mat.allFinite()) {
        failures[p] = "non-finite entries";
        continue;
      }
      Eigen::PartialPivLU<Eigen::MatrixXcd> lu(mat);
      const double rc = lu.rcond();
      if (!(rc > 1e-15)) {
        std::ostringstream os;
        os << "reciprocal condition estimate " << rc;
        failures[p] = os.str();
        continue;
      }
      op.lu_[p] = lu.matrixLU();
      Eigen::VectorXd iota = Eigen::VectorXd::LinSpaced(mat.rows(), 0, mat.rows() - 1.0);
      Eigen::VectorXd pidx = lu.permutationP() * iota;
      op.perm_[p] = pidx.array().round().cast<int>();
      op.cond_[p] = 1.0 / rc;
    }
  });
  for (int p = 0; p < n_modes; ++p)
    if (!failures[p].empty())
      throw SolverError("factorize: mode " + std::to_string(p) +
                        " is numerically singular (" + failures[p] + ")");
  return op;
}

BodyOperator BodyOperator::from_parts(std::shared_ptr<const ModalSystem> system,
                                      std::vector<Eigen::MatrixXcd> lu,
                                      std::vector<Eigen::VectorXi> perm,
                                      std::vector<double> cond) {
  BodyOperator op;
  op.system_ = std::move(system);
  op.lu_ = std::move(lu);
  op.perm_ = std::move(perm);
  op.cond_ = std::move(cond);
  return op;
}

Eigen::VectorXcd BodyOperator::solve_mode(int p, const Eigen::VectorXcd& rhs) const {
  const auto& lu = lu_[std::abs(p)];
  const auto& pm = perm_[std::abs(p)];
  Eigen::VectorXcd y(rhs.size());
  for (int i = 0; i < rhs.size(); ++i) y[i] = rhs[pm[i]];
  lu.triangularView<Eigen::UnitLower>().solveInPlace(y);
  lu.triangularView<Eigen::Upper>().solveInPlace(y);
  return y;
}

void BodyOperator::apply(std::span<const Complex> in, std::span<Complex> out,
                         bool inverse) const {
  const int nc = n_curve(), nf = n_fourier();
  const int n = nc * nf;
  if (static_cast<int>(in.size()) != n || static_cast<int>(out.size()) != n)
    throw std::invalid_argument("BodyOperator::apply: vector length mismatch");

  Eigen::MatrixXcd hat(nc, nf);
  {
    std::vector<Complex> row(nf);
    for (int i = 0; i < nc; ++i) {
      for (int j = 0; j < nf; ++j) row[j] = in[j * nc + i];
      detail::fft_forward(row);
      for (int j = 0; j < nf; ++j) hat(i, j) = row[j];
    }
  }

  Eigen::MatrixXcd result(nc, nf);
  const int max_mode = (nf - 1) / 2;
  detail::parallel_for(nf, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t bin = lo; bin < hi; ++bin) {
      const int p = bin <= max_mode ? static_cast<int>(bin) : static_cast<int>(bin) - nf;
      if (inverse)
        result.col(bin) = solve_mode(p, hat.col(bin));
      else
        result.col(bin) = system_->mode(p) * hat.col(bin);
    }
  });

  {
    std::vector<Complex> row(nf);
    for (int i = 0; i < nc; ++i) {
      for (int j = 0; j < nf; ++j) row[j] = result(i, j);
      detail::fft_inverse(row);
      for (int j = 0; j < nf; ++j) out[j * nc + i] = row[j] / double(nf);
    }
  }
}

void BodyOperator::apply_forward(std::span<const Complex> in, std::span<Complex> out) const {
  apply(in, out, false);
}
void BodyOperator::apply_inverse(std::span<const Complex> in, std::span<Complex> out) const {
  apply(in, out, true);
}

Eigen::VectorXcd BodyOperator::apply_forward(const Eigen::VectorXcd& in) const {
  Eigen::VectorXcd out(in.size());
  apply_forward(std::span<const Complex>(in.data(), in.size()),
                std::span<Complex>(out.data(), out.size()));
  return out;
}

Eigen::VectorXcd BodyOperator::apply_inverse(const Eigen::VectorXcd& in) const {
  Eigen::VectorXcd out(in.size());
  apply_inverse(std::span<const Complex>(in.data(), in.size()),
                std::span<Complex>(out.data(), out.size()));
  return out;
}

}  // namespace axiscat
