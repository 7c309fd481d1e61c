#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "axiscat/common.hpp"
#include "axiscat/geometry.hpp"
#include "axiscat/multibody.hpp"

namespace axiscat {

struct BodyConfig {
  std::string shape;  // ellipsoid | bowl | starfish | custom
  nlohmann::json params;
  RigidMotion motion;
  int r_panels = 8;
  int gauss_order = 10;
  int n_fourier = 41;
};

struct SolverConfig {
  double tol = 1e-9;
  int max_iter = 300;
  bool precond = true;
  int restart = 0;
};

struct CompressionConfig {
  bool enabled = false;
  double epsilon = 1e-10;
  double proxy_radius_factor = 1.75;
  int min_proxy_points = 200;
  bool separation_aware = true;
};

struct VerificationConfig {
  bool enabled = true;
  std::uint64_t seed = 20140101;
  int n_targets = 10;
  double margin_spacings = 2.0;
  double source_ball_fraction = 0.35;
};

struct IncidentConfig {
  std::string type = "verification_sources";  // or "plane_wave"
  Vec3 direction = Vec3::UnitZ();
};

struct StudyResolution {
  int r_panels = 0;
  int gauss_order = 0;
  int n_fourier = 0;
};

// Scene description consumed by the CLI and the run pipeline. Parsing is
// strict: unknown keys are rejected, invariants are checked, defaults are
// those documented in the README.
struct SceneConfig {
  std::string equation;  // "laplace" | "helmholtz"
  std::optional<double> kappa;
  std::optional<double> wavelengths_per_diameter;
  std::vector<BodyConfig> bodies;
  SolverConfig solver;
  CompressionConfig compression;
  VerificationConfig verification;
  IncidentConfig incident;
  std::vector<StudyResolution> study_resolutions;
  std::string output_dir;

  static SceneConfig from_json(const nlohmann::json& j);
  static SceneConfig from_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  GeneratingCurve make_curve(const BodyConfig& body) const;
  /// Resolved wave number (converts wavelengths-per-diameter if needed).
  double resolve_kappa() const;
  KernelSpec make_spec() const;
};

inline constexpr const char* kReportSchema = "axiscat-report/1";

// Machine-readable solve report (paper-style row: N, n, T_pre, I, T_solve,
// E_rel_inf, plus compression ranks when enabled). JSON round-trips
// losslessly; the "timings" subobject is excluded from determinism
// comparisons.
struct RunReport {
  std::string schema = kReportSchema;
  nlohmann::json config_echo;

  int num_bodies = 0;
  long total_nodes = 0;
  std::vector<int> nodes_per_body;
  double min_separation = 0;
  std::vector<std::string> warnings;
  double kappa = 0;

  int iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;
  bool stagnated = false;
  bool preconditioned = true;
  double gmres_tol = 0;
  std::string residual_type;  // "preconditioned" | "plain"

  bool compressed = false;
  std::vector<int> ranks;
  long n_compressed = 0;
  double epsilon = 0;
  std::uint64_t compression_seed = 0;

  bool verified = false;
  std::uint64_t verification_seed = 0;
  int n_targets = 0;
  double e_rel_inf = -1;

  double t_pre = 0, t_solve = 0, t_compress = 0, t_total = 0;

  nlohmann::json to_json() const;
  static RunReport from_json(const nlohmann::json& j);
};

/// CSV header shared by study sweeps and documented in the README.
inline constexpr const char* kStudyCsvHeader =
    "label,N,n,m,I,T_pre,T_compress,T_solve,E_rel_inf,N_compressed,converged";

std::string study_csv_row(const std::string& label, const RunReport& r);

}  // namespace axiscat
