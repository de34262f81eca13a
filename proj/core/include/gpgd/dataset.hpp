#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gpgd/signal.hpp"

namespace gpgd {

/// Images in [0,1]^n sharing one shape.
struct Dataset {
  std::vector<Vector> items;
  Shape shape;
  std::string source;

  std::size_t size() const noexcept { return items.size(); }
  std::size_t dimension() const noexcept { return shape.size(); }
  void validate() const;
};

class IdxFormatError : public std::runtime_error {
 public:
  IdxFormatError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;

/// IDX image file (big-endian magic 0x00000803, count, rows, cols, then
/// unsigned bytes). Pixels are scaled by 1/255. `limit` caps the item count.
Dataset parse_idx(const std::string& bytes, std::size_t limit = 0);
Dataset load_idx(const std::filesystem::path& path, std::size_t limit = 0);
std::string encode_idx(const Dataset& ds);

/// One item per line, `height * width` comma-separated values.
Dataset load_dataset_csv(const std::filesystem::path& path, Shape shape);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds);

/// "bars": random horizontal/vertical unit bars; "gaussians": random-center
/// blobs clamped to [0,1]; "sparse-combos": k-sparse non-negative vectors
/// scaled to max 1 (k = max(1, n/8)).
Dataset synth_dataset(const std::string& name, Shape shape, std::size_t count, std::uint64_t seed);

const std::vector<std::string>& synth_dataset_names();

}  // namespace gpgd
