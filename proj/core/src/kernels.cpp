#include "axiscat/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "axiscat/detail/fft.hpp"
#include "axiscat/detail/quadrature.hpp"

namespace axiscat {

Complex phi(const Vec3& x, const Vec3& xp, WaveNumber kappa) {
  const double d = (x - xp).norm();
  if (!(d > 0)) throw std::domain_error("phi: coincident evaluation points");
  if (kappa.value == 0) return Complex(1.0 / (4 * kPi * d), 0.0);
  return std::polar(1.0 / (4 * kPi * d), kappa.value * d);
}

Complex combined_kernel(const Vec3& x, const Vec3& xp, const Vec3& np,
                        const KernelSpec& spec, WaveNumber kappa) {
  const Vec3 diff = x - xp;
  const double d2 = diff.squaredNorm();
  if (!(d2 > 0)) throw std::domain_error("combined_kernel: coincident evaluation points");
  const double d = std::sqrt(d2);
  const double dn = diff.dot(np);
  const double k = kappa.value;
  if (k == 0) {
    // (1/4pi) (coupling/d + n'.(x-x')/d^3)
    return (spec.coupling / d + dn / (d2 * d)) * (1.0 / (4 * kPi));
  }
  const Complex e = std::polar(1.0 / (4 * kPi * d), k * d);
  const Complex dphi_dn = e * (Complex(1.0, -k * d) * dn / d2);
  return dphi_dn + spec.coupling * e;
}

namespace {

// Kernel between target at azimuth psi and source at azimuth 0, both given
// by meridian coordinates. Depends on the azimuth difference only.
struct AzimuthalKernel {
  double r, z, rp, zp, nrp, nzp;
  double kappa;
  Complex coupling;
  Layer layer;
  double rr2;  // r^2 + r'^2 + (z - z')^2

  AzimuthalKernel(double r_, double z_, const CurvePoint& src, const KernelSpec& spec,
                  double kappa_, Layer layer_)
      : r(r_), z(z_), rp(src.r), zp(src.z), nrp(src.nr), nzp(src.nz),
        kappa(kappa_), coupling(spec.coupling), layer(layer_) {
    const double dz = z - zp;
    rr2 = r * r + rp * rp + dz * dz;
  }

  Complex operator()(double psi) const {
    const double c = std::cos(psi);
    const double d2 = rr2 - 2 * r * rp * c;
    const double d = std::sqrt(d2);
    const double inv4pid = 1.0 / (4 * kPi * d);
    // n'.(x - x') with the source meridian at azimuth 0.
    const double dn = (r * c - rp) * nrp + (z - zp) * nzp;
    Complex single, dbl;
    if (kappa == 0) {
      single = Complex(inv4pid, 0);
      dbl = Complex(dn * inv4pid / d2, 0);
    } else {
      const Complex e = std::polar(inv4pid, kappa * d);
      single = e;
      dbl = e * (Complex(1.0, -kappa * d) * dn / d2);
    }
    switch (layer) {
      case Layer::Single: return single;
      case Layer::Double: return dbl;
      case Layer::Combined: return dbl + coupling * single;
    }
    return {};
  }
};

constexpr double kAxisEps = 1e-13;
constexpr int kMaxFftSamples = 1 << 16;
constexpr double kModeTol = 1e-12;

int next_pow2(int n) {
  int m = 1;
  while (m < n) m <<= 1;
  return m;
}

void modes_from_samples(const std::vector<Complex>& samples, int max_mode,
                        Eigen::VectorXcd& out) {
  const int m = static_cast<int>(samples.size());
  std::vector<Complex> work(samples);
  detail::fft_forward(work);
  const double scale = std::sqrt(kTwoPi) / m;
  for (int p = -max_mode; p <= max_mode; ++p) {
    const int bin = ((p % m) + m) % m;
    out[p + max_mode] = scale * work[bin];
  }
}

// Composite Gauss rule on psi in (0, pi], graded geometrically toward the
// near-singular point at psi = 0, top length limited so each panel resolves
// the e^{i p psi} oscillation of the highest mode.
void graded_modes(const AzimuthalKernel& ker, int max_mode, int gauss_n,
                  double psi0, Eigen::VectorXcd& out, int& evals) {
  const double max_len = std::min(kPi / 3, 18.0 / std::max(max_mode, 1));
  std::vector<double> breaks{0.0, std::min(psi0, max_len)};
  while (breaks.back() < kPi) {
    const double x = breaks.back();
    breaks.push_back(std::min({2 * x, x + max_len, kPi}));
  }

  const auto& rule = detail::gauss_legendre(gauss_n);
  Eigen::VectorXd acc_re = Eigen::VectorXd::Zero(max_mode + 1);
  Eigen::VectorXd acc_im = Eigen::VectorXd::Zero(max_mode + 1);
  for (size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double mid = 0.5 * (breaks[s] + breaks[s + 1]);
    const double half = 0.5 * (breaks[s + 1] - breaks[s]);
    for (int q = 0; q < gauss_n; ++q) {
      const double psi = mid + half * rule.nodes[q];
      const double w = half * rule.weights[q];
      const Complex g = ker(psi);
      ++evals;
      // cos(p psi) recurrence over modes
      const double c1 = std::cos(psi);
      double cp_prev = 1.0, cp = c1;
      acc_re[0] += w * g.real();
      acc_im[0] += w * g.imag();
      for (int p = 1; p <= max_mode; ++p) {
        acc_re[p] += w * g.real() * cp;
        acc_im[p] += w * g.imag() * cp;
        const double next = 2 * c1 * cp - cp_prev;
        cp_prev = cp;
        cp = next;
      }
    }
  }
  // G even in psi: G_p = (2/sqrt(2 pi)) \int_0^pi G cos(p psi) dpsi, G_{-p} = G_p.
  const double scale = 2.0 / std::sqrt(kTwoPi);
  for (int p = 0; p <= max_mode; ++p) {
    const Complex v = scale * Complex(acc_re[p], acc_im[p]);
    out[max_mode + p] = v;
    out[max_mode - p] = v;
  }
}

}  // namespace

ModalKernelTable modal_kernels(double r, double z, const CurvePoint& source,
                               const KernelSpec& spec, WaveNumber kappa, int max_mode,
                               Layer layer) {
  if (r < 0 || source.r < 0)
    throw std::domain_error("modal_kernels: meridian radii must be non-negative");
  const double dist = std::hypot(r - source.r, z - source.z);
  if (!(dist > 0) && std::abs(r - source.r) == 0 && std::abs(z - source.z) == 0)
    throw std::domain_error("modal_kernels: coincident meridian points");

  ModalKernelTable table;
  table.max_mode = max_mode;
  table.modes.setZero(2 * max_mode + 1);

  AzimuthalKernel ker(r, z, source, spec, kappa.value, layer);

  if (r < kAxisEps || source.r < kAxisEps) {
    // Azimuthal integrand is constant: only p = 0 survives.
    table.modes[max_mode] = std::sqrt(kTwoPi) * ker(0.0);
    table.samples_used = 1;
    table.accuracy = 1e-16;
    return table;
  }

  const double delta = dist / (r + source.r + dist);

  if (delta < 1.0 / 64.0) {
    const double psi0 = std::max(dist / std::sqrt(r * source.r), 1e-14);
    Eigen::VectorXcd coarse(2 * max_mode + 1), fine(2 * max_mode + 1);
    int evals = 0;
    graded_modes(ker, max_mode, 16, psi0, coarse, evals);
    graded_modes(ker, max_mode, 24, psi0, fine, evals);
    const double norm = fine.lpNorm<Eigen::Infinity>();
    const double err = (coarse - fine).lpNorm<Eigen::Infinity>() / std::max(norm, 1e-300);
    table.modes = fine;
    table.samples_used = evals;
    table.accuracy = std::max(err, 1e-16);
    table.converged = err <= 1e-11;
    return table;
  }

  int m = next_pow2(std::max(2 * max_mode + 2, static_cast<int>(std::ceil(64.0 / delta))));
  m = std::min(m, kMaxFftSamples);

  std::vector<Complex> samples(m);
  for (int i = 0; i < m; ++i) samples[i] = ker(kTwoPi * i / m);

  Eigen::VectorXcd prev(2 * max_mode + 1);
  modes_from_samples(samples, max_mode, prev);

  double err = 1.0;
  while (true) {
    if (m >= kMaxFftSamples) {
      table.converged = err <= kModeTol;
      break;
    }
    const int m2 = 2 * m;
    std::vector<Complex> refined(m2);
    for (int i = 0; i < m; ++i) {
      refined[2 * i] = samples[i];
      refined[2 * i + 1] = ker(kTwoPi * (2 * i + 1) / m2);
    }
    samples.swap(refined);
    m = m2;
    Eigen::VectorXcd cur(2 * max_mode + 1);
    modes_from_samples(samples, max_mode, cur);
    const double norm = cur.lpNorm<Eigen::Infinity>();
    err = (cur - prev).lpNorm<Eigen::Infinity>() / std::max(norm, 1e-300);
    prev.swap(cur);
    if (err <= kModeTol) break;
  }

  table.modes = prev;
  table.samples_used = m;
  table.accuracy = std::max(err, 1e-16);
  return table;
}

}  // namespace axiscat
