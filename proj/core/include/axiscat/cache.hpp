#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "axiscat/body_operator.hpp"
#include "axiscat/skeletonization.hpp"

namespace axiscat {

// Single-file binary cache of factorized body operators (and skeletons),
// keyed by shape hash, discretization, wave number and kernel spec. Files
// carry a versioned magic header and little-endian IEEE-754 payloads; a
// cache hit restores the exact bits of a fresh rebuild.
class OperatorCache {
public:
  struct Key {
    std::uint64_t shape_hash = 0;
    int r_panels = 0;
    int gauss_order = 0;
    int n_fourier = 0;
    double kappa = 0;
    Equation equation = Equation::Laplace;
    Complex coupling{0, 0};

    std::uint64_t hash() const;
  };

  struct SkeletonKey {
    Key op;
    double epsilon = 0;
    double proxy_radius = 0;
    int proxy_points_hint = 0;
    std::uint64_t seed = 0;

    std::uint64_t hash() const;
  };

  struct EntryInfo {
    std::string file;
    std::string kind;  // "operator" | "skeleton"
    std::uint64_t key_hash = 0;
    std::uintmax_t bytes = 0;
  };

  explicit OperatorCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  std::optional<BodyOperator> load(const Key& key) const;
  void store(const Key& key, const BodyOperator& op) const;

  std::optional<SkeletonData> load_skeleton(const SkeletonKey& key) const;
  void store_skeleton(const SkeletonKey& key, const SkeletonData& sk) const;

  std::vector<EntryInfo> inspect() const;
  int clear() const;  // removes cache files, returns the count

private:
  std::filesystem::path dir_;
  std::filesystem::path operator_path(const Key& key) const;
  std::filesystem::path skeleton_path(const SkeletonKey& key) const;
};

}  // namespace axiscat
