#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gpgd/signal.hpp"

namespace gpgd {

enum class ActivationKind { LeakyReLU, Identity };

struct Activation {
  ActivationKind kind = ActivationKind::Identity;
  double slope = 0.01;  // LeakyReLU negative-side slope

  bool operator==(const Activation&) const = default;
};

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation;
};

/// Fully connected network R^n -> R^n. When set, `latent_index` is the number
/// of leading layers forming the encoder; the rest form the decoder.
class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers, std::optional<std::size_t> latent_index = std::nullopt);

  /// LeakyReLU(slope) on hidden layers, Identity on the output layer, weights
  /// drawn U(-a, a) with a = sqrt(6 / (fan_in + fan_out)), zero biases.
  /// The latent split is placed at the narrowest layer.
  static DenseNet make(std::span<const std::size_t> dims, std::uint64_t seed, double slope = 0.01);

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::optional<std::size_t>& latent_index() const noexcept { return latent_index_; }

  std::size_t input_dim() const noexcept;
  std::size_t output_dim() const noexcept;
  std::size_t parameter_count() const noexcept;
  std::vector<std::size_t> dims() const;

  Vector forward(const Vector& x) const;
  /// Columns are samples.
  Matrix forward_batch(const Matrix& x) const;

  /// Flattened parameters, per layer: weight row-major, then bias.
  Vector parameters() const;
  void set_parameters(const Vector& flat);

  bool same_architecture(const DenseNet& other) const noexcept;

 private:
  std::vector<DenseLayer> layers_;
  std::optional<std::size_t> latent_index_;
};

/// Gradient with respect to every parameter, same layout as the net.
struct NetGradient {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;

  static NetGradient zeros_like(const DenseNet& net);
  Vector flatten() const;
  NetGradient& operator+=(const NetGradient& other);
  NetGradient& operator*=(double s);
};

/// Activations kept by a batched forward pass for reverse-mode differentiation.
struct ForwardCache {
  std::vector<Matrix> inputs;  // inputs[l] feeds layer l
  std::vector<Matrix> pre;     // pre-activation of layer l
  Matrix output;
};

ForwardCache forward_cached(const DenseNet& net, const Matrix& x);

/// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
void backward(const DenseNet& net, const ForwardCache& cache, const Matrix& grad_output, NetGradient& grad);

}  // namespace gpgd
