#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gpgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Image geometry. Pixels are stored row-major: index = row * width + col.
struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const noexcept { return height * width; }
  bool operator==(const Shape&) const = default;
};

class DimensionError : public std::invalid_argument {
 public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t actual);

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// Throws DimensionError naming both lengths when they differ.
void require_length(const char* context, std::size_t expected, std::size_t actual);

/// A finite real vector with an optional 2-D image shape.
class Signal {
 public:
  Signal() = default;
  explicit Signal(Vector data, std::optional<Shape> shape = std::nullopt);

  const Vector& data() const noexcept { return data_; }
  Vector& data() noexcept { return data_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(data_.size()); }
  const std::optional<Shape>& shape() const noexcept { return shape_; }

  /// Copy with every entry clamped to [0,1].
  Signal clamped() const;

 private:
  Vector data_;
  std::optional<Shape> shape_;
};

bool all_finite(const Vector& v) noexcept;

/// CSV: one value per cell, row-major. A shaped signal is written as `height`
/// lines of `width` cells, an unshaped one as a single line.
void write_signal_csv(const std::filesystem::path& path, const Signal& s);
Signal read_signal_csv(const std::filesystem::path& path);

/// Binary: little-endian uint64 element count followed by little-endian
/// IEEE-754 doubles. Shape is not stored.
void write_signal_binary(const std::filesystem::path& path, const Signal& s);
Signal read_signal_binary(const std::filesystem::path& path);

}  // namespace gpgd
