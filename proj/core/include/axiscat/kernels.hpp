#pragma once

#include <Eigen/Dense>

#include "axiscat/common.hpp"
#include "axiscat/geometry.hpp"

namespace axiscat {

/// Validated non-negative real wave number; 0 selects the Laplace kernel.
struct WaveNumber {
  double value = 0;
  WaveNumber() = default;
  explicit WaveNumber(double v) : value(v) {
    if (!std::isfinite(v) || v < 0)
      throw std::invalid_argument("WaveNumber: must be finite and >= 0");
  }
};

enum class Equation { Laplace, Helmholtz };

// Combined-field kernel specification: G = dPhi/dn' + coupling * Phi.
// Laplace uses coupling 1, Helmholtz coupling i*kappa.
struct KernelSpec {
  Equation equation = Equation::Laplace;
  Complex coupling{1.0, 0.0};

  static KernelSpec laplace() { return {Equation::Laplace, Complex(1, 0)}; }
  static KernelSpec helmholtz(WaveNumber kappa) {
    if (kappa.value == 0)
      throw std::invalid_argument("KernelSpec: helmholtz with kappa = 0; use laplace()");
    return {Equation::Helmholtz, Complex(0, kappa.value)};
  }
};

/// Free-space fundamental solution e^{i kappa |x-x'|} / (4 pi |x-x'|).
Complex phi(const Vec3& x, const Vec3& xp, WaveNumber kappa);

/// Combined-field kernel at 3-D points: dPhi/dn(x') + coupling * Phi.
Complex combined_kernel(const Vec3& x, const Vec3& xp, const Vec3& np,
                        const KernelSpec& spec, WaveNumber kappa);

enum class Layer { Single, Double, Combined };

// Azimuthal Fourier coefficients of a kernel between two meridian points:
//   G_p(r,z,r',z') = (1/sqrt(2 pi)) \int_0^{2 pi} G(psi) e^{-i p psi} dpsi.
struct ModalKernelTable {
  int max_mode = 0;
  Eigen::VectorXcd modes;  // size 2*max_mode + 1, mode p at index p + max_mode
  int samples_used = 0;
  double accuracy = 0;  // estimated relative accuracy of the table
  bool converged = true;

  Complex mode(int p) const { return modes[p + max_mode]; }
};

// Evaluates modes |p| <= max_mode of the chosen layer kernel. Well-separated
// pairs use an equispaced azimuthal rule evaluated by FFT with the sample
// count doubled until two successive results agree to 1e-12; near-singular
// pairs switch to a composite Gauss rule graded toward psi = 0. Sources or
// targets on the axis short-circuit to the p = 0 mode.
//
// Pre: the two meridian points are distinct and have r, r' >= 0. The
// coincident limit is the business of the singular quadrature corrections,
// not of this routine.
ModalKernelTable modal_kernels(double r, double z, const CurvePoint& source,
                               const KernelSpec& spec, WaveNumber kappa, int max_mode,
                               Layer layer = Layer::Combined);

}  // namespace axiscat
