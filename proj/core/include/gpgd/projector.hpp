#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <variant>

#include "gpgd/dense_net.hpp"
#include "gpgd/model_set.hpp"

namespace gpgd {

namespace projectors {

struct ExactOrthogonal {
  ModelSet set;
};

struct Learned {
  std::shared_ptr<const DenseNet> net;
};

/// Orthogonal projection onto a union of lines, deliberately made
/// non-orthogonal. Points already in the set are returned unchanged.
/// Otherwise the line is the best one unless a per-point coin (derived from
/// `seed` and the bits of z, so P stays a deterministic map) with success
/// probability `normal` selects the runner-up; the coefficient on the chosen
/// line is scaled by (1 + tangential).
struct Perturbed {
  ModelSet set;
  double tangential = 0.0;
  double normal = 0.0;
  std::uint64_t seed = 0;
};

/// Arbitrary map, for harnesses and tests.
struct Custom {
  std::string name;
  std::function<Vector(const Vector&)> fn;
};

}  // namespace projectors

/// A generalized projection R^n -> Sigma.
class Projector {
 public:
  using Kind = std::variant<projectors::ExactOrthogonal, projectors::Learned, projectors::Perturbed, projectors::Custom>;

  explicit Projector(Kind kind) : kind_(std::move(kind)) {}

  Vector operator()(const Vector& z) const;

  const Kind& kind() const noexcept { return kind_; }
  /// The model set the projection targets, when known.
  const ModelSet* model_set() const noexcept;
  std::string describe() const;

 private:
  Kind kind_;
};

Projector make_exact_projector(ModelSet set);
Projector make_learned_projector(std::shared_ptr<const DenseNet> net);
Projector make_learned_projector(DenseNet net);
/// Only unions of lines are accepted.
Projector make_perturbed_projector(ModelSet set, double tangential, double normal, std::uint64_t seed);
Projector make_custom_projector(std::string name, std::function<Vector(const Vector&)> fn);

}  // namespace gpgd
