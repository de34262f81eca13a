#include "gpgd/dense_net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gpgd/rng.hpp"

namespace gpgd {
namespace {

void activate(const Activation& act, Matrix& m) {
  if (act.kind == ActivationKind::LeakyReLU)
    m = m.unaryExpr([s = act.slope](double v) { return v > 0.0 ? v : s * v; });
}

Matrix activation_derivative(const Activation& act, const Matrix& pre) {
  if (act.kind == ActivationKind::Identity) return Matrix::Ones(pre.rows(), pre.cols());
  return pre.unaryExpr([s = act.slope](double v) { return v > 0.0 ? 1.0 : s; });
}

}  // namespace

DenseNet::DenseNet(std::vector<DenseLayer> layers, std::optional<std::size_t> latent_index)
    : layers_(std::move(layers)), latent_index_(latent_index) {
  if (layers_.empty()) throw std::invalid_argument("DenseNet: no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.bias.size() != layer.weight.rows())
      throw DimensionError("DenseNet: bias of layer " + std::to_string(l), static_cast<std::size_t>(layer.weight.rows()),
                           static_cast<std::size_t>(layer.bias.size()));
    if (l > 0 && layer.weight.cols() != layers_[l - 1].weight.rows())
      throw DimensionError("DenseNet: layer " + std::to_string(l) + " input",
                           static_cast<std::size_t>(layers_[l - 1].weight.rows()),
                           static_cast<std::size_t>(layer.weight.cols()));
    if (!layer.weight.allFinite() || !layer.bias.allFinite())
      throw std::invalid_argument("DenseNet: non-finite parameter in layer " + std::to_string(l));
  }
  if (input_dim() != output_dim())
    throw DimensionError("DenseNet: output dimension must equal input dimension", input_dim(), output_dim());
  if (latent_index_ && (*latent_index_ == 0 || *latent_index_ >= layers_.size()))
    throw std::invalid_argument("DenseNet: latent index out of range");
}

DenseNet DenseNet::make(std::span<const std::size_t> dims, std::uint64_t seed, double slope) {
  if (dims.size() < 2) throw std::invalid_argument("DenseNet::make: need at least two dims");
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(dims[l]);
    const auto out = static_cast<Eigen::Index>(dims[l + 1]);
    const double a = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> uni(-a, a);
    DenseLayer layer;
    layer.weight.resize(out, in);
    for (Eigen::Index i = 0; i < out; ++i)
      for (Eigen::Index j = 0; j < in; ++j) layer.weight(i, j) = uni(rng);
    layer.bias = Vector::Zero(out);
    const bool last = l + 2 == dims.size();
    layer.activation = last ? Activation{ActivationKind::Identity, slope} : Activation{ActivationKind::LeakyReLU, slope};
    layers.push_back(std::move(layer));
  }
  std::optional<std::size_t> latent;
  if (dims.size() > 2) {
    const auto narrowest = std::min_element(dims.begin() + 1, dims.end() - 1);
    latent = static_cast<std::size_t>(narrowest - dims.begin());
  }
  return DenseNet(std::move(layers), latent);
}

std::size_t DenseNet::input_dim() const noexcept { return static_cast<std::size_t>(layers_.front().weight.cols()); }

std::size_t DenseNet::output_dim() const noexcept { return static_cast<std::size_t>(layers_.back().weight.rows()); }

std::size_t DenseNet::parameter_count() const noexcept {
  std::size_t count = 0;
  for (const auto& l : layers_) count += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return count;
}

std::vector<std::size_t> DenseNet::dims() const {
  std::vector<std::size_t> d{input_dim()};
  for (const auto& l : layers_) d.push_back(static_cast<std::size_t>(l.weight.rows()));
  return d;
}

Vector DenseNet::forward(const Vector& x) const {
  require_length("DenseNet::forward", input_dim(), static_cast<std::size_t>(x.size()));
  Matrix h = x;
  for (const auto& l : layers_) {
    h = (l.weight * h).colwise() + l.bias;
    activate(l.activation, h);
  }
  return h.col(0);
}

Matrix DenseNet::forward_batch(const Matrix& x) const {
  require_length("DenseNet::forward_batch", input_dim(), static_cast<std::size_t>(x.rows()));
  Matrix h = x;
  for (const auto& l : layers_) {
    h = (l.weight * h).colwise() + l.bias;
    activate(l.activation, h);
  }
  return h;
}

Vector DenseNet::parameters() const {
  Vector flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index k = 0;
  for (const auto& l : layers_) {
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
      for (Eigen::Index j = 0; j < l.weight.cols(); ++j) flat[k++] = l.weight(i, j);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) flat[k++] = l.bias[i];
  }
  return flat;
}

void DenseNet::set_parameters(const Vector& flat) {
  require_length("DenseNet::set_parameters", parameter_count(), static_cast<std::size_t>(flat.size()));
  Eigen::Index k = 0;
  for (auto& l : layers_) {
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
      for (Eigen::Index j = 0; j < l.weight.cols(); ++j) l.weight(i, j) = flat[k++];
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = flat[k++];
  }
}

bool DenseNet::same_architecture(const DenseNet& other) const noexcept {
  if (layers_.size() != other.layers_.size() || latent_index_ != other.latent_index_) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& a = layers_[l];
    const auto& b = other.layers_[l];
    if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() || !(a.activation == b.activation))
      return false;
  }
  return true;
}

NetGradient NetGradient::zeros_like(const DenseNet& net) {
  NetGradient g;
  for (const auto& l : net.layers()) {
    g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Vector::Zero(l.bias.size()));
  }
  return g;
}

Vector NetGradient::flatten() const {
  Eigen::Index total = 0;
  for (std::size_t l = 0; l < weight.size(); ++l) total += weight[l].size() + bias[l].size();
  Vector flat(total);
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weight.size(); ++l) {
    for (Eigen::Index i = 0; i < weight[l].rows(); ++i)
      for (Eigen::Index j = 0; j < weight[l].cols(); ++j) flat[k++] = weight[l](i, j);
    for (Eigen::Index i = 0; i < bias[l].size(); ++i) flat[k++] = bias[l][i];
  }
  return flat;
}

NetGradient& NetGradient::operator+=(const NetGradient& other) {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    weight[l] += other.weight[l];
    bias[l] += other.bias[l];
  }
  return *this;
}

NetGradient& NetGradient::operator*=(double s) {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    weight[l] *= s;
    bias[l] *= s;
  }
  return *this;
}

ForwardCache forward_cached(const DenseNet& net, const Matrix& x) {
  require_length("forward_cached", net.input_dim(), static_cast<std::size_t>(x.rows()));
  ForwardCache cache;
  Matrix h = x;
  for (const auto& l : net.layers()) {
    cache.inputs.push_back(h);
    Matrix pre = (l.weight * h).colwise() + l.bias;
    h = pre;
    activate(l.activation, h);
    cache.pre.push_back(std::move(pre));
  }
  cache.output = std::move(h);
  return cache;
}

void backward(const DenseNet& net, const ForwardCache& cache, const Matrix& grad_output, NetGradient& grad) {
  Matrix delta = grad_output;
  for (std::size_t l = net.layers().size(); l-- > 0;) {
    const auto& layer = net.layers()[l];
    delta = delta.cwiseProduct(activation_derivative(layer.activation, cache.pre[l]));
    grad.weight[l].noalias() += delta * cache.inputs[l].transpose();
    grad.bias[l] += delta.rowwise().sum();
    if (l > 0) delta = layer.weight.transpose() * delta;
  }
}

}  // namespace gpgd
