#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

#include "axiscat/common.hpp"
#include "axiscat/geometry.hpp"
#include "axiscat/kernels.hpp"

namespace axiscat {

struct AssemblyOptions {
  double correction_tol = 1e-13;  // adaptive panel-correction tolerance
  int correction_max_depth = 40;  // bisection depth cap
};

// Per-mode Nystrom matrices for a single body:
//   A~_p(i,j) = 1/2 delta_ij + sqrt(2 pi) G_p(y_i, y_j) w_j,
// with w_j the curve weight times arclength Jacobian times r_j. Rows are
// corrected over each target's own panel and its two neighbours so the
// discretization stays high-order across the kernel's logarithmic
// singularity: those entries are interpolatory weights obtained by adaptive
// integration of the modal kernel against the panel's Legendre cardinal
// functions. Matrices satisfy A~_p = A~_{-p}; only p >= 0 is stored.
struct ModalSystem {
  int n_curve = 0;
  int n_fourier = 0;
  WaveNumber kappa;
  KernelSpec spec;
  std::vector<Eigen::MatrixXcd> modes;  // index p = 0..(n_fourier-1)/2

  int max_mode() const { return (n_fourier - 1) / 2; }
  int size() const { return n_curve * n_fourier; }
  const Eigen::MatrixXcd& mode(int p) const { return modes.at(std::abs(p)); }
};

ModalSystem assemble_modal_system(const CurveQuadrature& cq, int n_fourier,
                                  const KernelSpec& spec, WaveNumber kappa,
                                  const AssemblyOptions& opt = {});

/// Single mode |p| <= (n_fourier - 1) / 2 of the system above.
Eigen::MatrixXcd assemble_modal_matrix(const CurveQuadrature& cq, int n_fourier,
                                       const KernelSpec& spec, WaveNumber kappa, int p,
                                       const AssemblyOptions& opt = {});

// Factorized per-body operator. apply_forward / apply_inverse realize
// A = F* A~ F and A^{-1} = F* A~^{-1} F with F the azimuthal DFT; vectors
// are curve-major (curve index fastest) of length n_curve * n_fourier.
class BodyOperator {
public:
  BodyOperator() = default;

  static BodyOperator factorize(std::shared_ptr<const ModalSystem> system);

  int n_curve() const { return system_->n_curve; }
  int n_fourier() const { return system_->n_fourier; }
  int size() const { return system_->size(); }
  const ModalSystem& system() const { return *system_; }
  std::shared_ptr<const ModalSystem> system_ptr() const { return system_; }

  /// Reciprocal-condition-style estimate for mode p (from the LU factors).
  double condition_estimate(int p) const { return cond_.at(std::abs(p)); }

  void apply_forward(std::span<const Complex> in, std::span<Complex> out) const;
  void apply_inverse(std::span<const Complex> in, std::span<Complex> out) const;
  Eigen::VectorXcd apply_forward(const Eigen::VectorXcd& in) const;
  Eigen::VectorXcd apply_inverse(const Eigen::VectorXcd& in) const;

  // Raw factor access (serialization).
  const Eigen::MatrixXcd& lu_matrix(int p) const { return lu_.at(p); }
  const Eigen::VectorXi& permutation(int p) const { return perm_.at(p); }
  static BodyOperator from_parts(std::shared_ptr<const ModalSystem> system,
                                 std::vector<Eigen::MatrixXcd> lu,
                                 std::vector<Eigen::VectorXi> perm,
                                 std::vector<double> cond);

private:
  std::shared_ptr<const ModalSystem> system_;
  std::vector<Eigen::MatrixXcd> lu_;    // per mode, PartialPivLU packed factors
  std::vector<Eigen::VectorXi> perm_;   // row permutation maps: (Pb)[i] = b[perm[i]]
  std::vector<double> cond_;

  void apply(std::span<const Complex> in, std::span<Complex> out, bool inverse) const;
  Eigen::VectorXcd solve_mode(int p, const Eigen::VectorXcd& rhs) const;
};

}  // namespace axiscat
