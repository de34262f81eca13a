#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "gpgd/dense_net.hpp"

namespace gpgd {

/// Malformed checkpoint; `offset` is the byte position where parsing failed.
class CheckpointError : public std::runtime_error {
 public:
  CheckpointError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Checkpoint whose architecture differs from the one requested.
class ShapeMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kCheckpointVersion = 1;

/// One line of JSON (format, version, dims, activations, latent_index,
/// parameter_count) terminated by '\n', then parameter_count little-endian
/// doubles in DenseNet::parameters() order.
std::string encode_checkpoint(const DenseNet& net);
DenseNet decode_checkpoint(const std::string& bytes);

void save_checkpoint(const DenseNet& net, const std::filesystem::path& path);
DenseNet load_checkpoint(const std::filesystem::path& path);
/// Loads and checks the architecture against `expected`.
DenseNet load_checkpoint(const std::filesystem::path& path, const DenseNet& expected);

}  // namespace gpgd
