#pragma once

#include <filesystem>
#include <optional>

#include "axiscat/scene_config.hpp"

namespace axiscat {

struct RunOptions {
  std::filesystem::path out_dir;    // empty: no files written
  std::filesystem::path cache_dir;  // empty: cache disabled
  bool use_cache = true;
  std::optional<std::uint64_t> seed_override;
  std::string label;  // tag used in study CSV rows and report filenames
};

/// Builds the scene, precomputes operators (optionally via the binary
/// cache), solves, verifies, and optionally writes report.json plus the
/// field-sample CSV to out_dir.
RunReport run_solve(const SceneConfig& cfg, const RunOptions& opt = {});

enum class StudyKind { Convergence, PrecondCompare, CompressCompare };

StudyKind parse_study_kind(const std::string& name);

/// Runs a sweep and returns one report per cell; with out_dir set, also
/// writes per-cell reports and a combined study.csv.
std::vector<RunReport> run_study(const SceneConfig& cfg, StudyKind kind,
                                 const RunOptions& opt = {});

}  // namespace axiscat
