#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gpgd/rng.hpp"
#include "gpgd/signal.hpp"

namespace gpgd {

inline constexpr double kMembershipTolerance = 1e-8;

namespace sets {

/// k-sparse vectors in R^n.
struct KSparse {
  std::size_t k = 1;
  std::size_t n = 2;
};

/// Union of subspaces span(B_j); each basis has orthonormal columns.
struct UnionOfSubspaces {
  std::vector<Matrix> bases;
};

/// Homogeneous model: union of lines span(x_i), stored as unit columns.
struct UnionOfLines {
  Matrix directions;
};

}  // namespace sets

/// A low-dimensional model set with a computable orthogonal projection.
class ModelSet {
 public:
  using Kind = std::variant<sets::KSparse, sets::UnionOfSubspaces, sets::UnionOfLines>;

  explicit ModelSet(Kind kind);

  static ModelSet k_sparse(std::size_t k, std::size_t n);
  static ModelSet union_of_subspaces(std::vector<Matrix> bases);
  /// Columns are normalized to unit length.
  static ModelSet union_of_lines(Matrix directions);
  static ModelSet random_lines(std::size_t count, std::size_t n, std::uint64_t seed);

  const Kind& kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept;

  /// Argmin over the set of ||x - z||; ties broken by lowest index.
  Vector project(const Vector& z) const;

  /// Random element: a random component of the union with N(0,1) coefficients.
  Vector sample(Rng& rng) const;

  bool is_homogeneous_lines() const noexcept { return std::holds_alternative<sets::UnionOfLines>(kind_); }

 private:
  Kind kind_;
};

/// Keeps the k largest-magnitude entries (ties: lowest index).
Vector hard_threshold(const Vector& z, std::size_t k);

/// Orthogonal projection onto a union of subspaces or lines: B_j B_j^T z for
/// the component maximizing ||B_j^T z||.
Vector project_union(const Vector& z, const ModelSet& set);

/// Index of the component selected by project_union.
std::size_t best_component(const Vector& z, const ModelSet& set);

/// ||x - P(x)|| <= tol (1 + ||x||).
bool is_member(const ModelSet& set, const Vector& x, double tol = kMembershipTolerance);

void to_json(nlohmann::json& j, const ModelSet& set);
ModelSet model_set_from_json(const nlohmann::json& j);

}  // namespace gpgd
