#include "gpgd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "gpgd/detail/bytes.hpp"
#include "gpgd/io.hpp"
#include "gpgd/rng.hpp"

namespace gpgd {

void Dataset::validate() const {
  if (items.empty()) throw std::invalid_argument("Dataset: no items");
  for (std::size_t i = 0; i < items.size(); ++i) {
    require_length("Dataset item", shape.size(), static_cast<std::size_t>(items[i].size()));
    if (!items[i].allFinite() || items[i].minCoeff() < 0.0 || items[i].maxCoeff() > 1.0)
      throw std::invalid_argument("Dataset: item " + std::to_string(i) + " has entries outside [0,1]");
  }
}

IdxFormatError::IdxFormatError(const std::string& what, std::size_t offset)
    : std::runtime_error("idx: " + what + " (byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

namespace {
std::string hex32(std::uint32_t v) {
  char buf[11];
  std::snprintf(buf, sizeof(buf), "0x%08x", v);
  return buf;
}
}  // namespace

Dataset parse_idx(const std::string& bytes, std::size_t limit) {
  // Magic first, so a label file (shorter header) is reported as such.
  if (bytes.size() >= 4) {
    const std::uint32_t magic = detail::get_u32_be(bytes, 0);
    if (magic != kIdxImageMagic)
      throw IdxFormatError("bad magic: expected " + hex32(kIdxImageMagic) + ", got " + hex32(magic), 0);
  }
  if (bytes.size() < 16) throw IdxFormatError("file shorter than the 16-byte image header", bytes.size());
  const std::size_t count = detail::get_u32_be(bytes, 4);
  const std::size_t rows = detail::get_u32_be(bytes, 8);
  const std::size_t cols = detail::get_u32_be(bytes, 12);
  const std::size_t n = rows * cols;
  if (n == 0) throw IdxFormatError("zero-sized images", 8);
  if (bytes.size() < 16 + count * n)
    throw IdxFormatError("truncated payload: header promises " + std::to_string(count) + " images of " +
                             std::to_string(n) + " bytes",
                         bytes.size());
  const std::size_t take = limit ? std::min(limit, count) : count;
  Dataset ds;
  ds.shape = Shape{rows, cols};
  ds.source = "idx";
  ds.items.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t p = 0; p < n; ++p)
      v[static_cast<Eigen::Index>(p)] = static_cast<unsigned char>(bytes[16 + i * n + p]) / 255.0;
    ds.items.push_back(std::move(v));
  }
  return ds;
}

Dataset load_idx(const std::filesystem::path& path, std::size_t limit) {
  Dataset ds = parse_idx(read_file_bytes(path), limit);
  ds.source = "idx:" + path.string();
  return ds;
}

std::string encode_idx(const Dataset& ds) {
  std::string out;
  auto put_be = [&out](std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  };
  put_be(kIdxImageMagic);
  put_be(static_cast<std::uint32_t>(ds.items.size()));
  put_be(static_cast<std::uint32_t>(ds.shape.height));
  put_be(static_cast<std::uint32_t>(ds.shape.width));
  for (const auto& item : ds.items)
    for (Eigen::Index i = 0; i < item.size(); ++i)
      out.push_back(static_cast<char>(std::lround(std::clamp(item[i], 0.0, 1.0) * 255.0)));
  return out;
}

Dataset load_dataset_csv(const std::filesystem::path& path, Shape shape) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  Dataset ds;
  ds.shape = shape;
  ds.source = "csv:" + path.string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != shape.size())
      throw DimensionError("dataset CSV line " + std::to_string(lineno), shape.size(), cells.size());
    Vector v(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) v[static_cast<Eigen::Index>(i)] = std::stod(cells[i]);
    ds.items.push_back(std::move(v));
  }
  ds.validate();
  return ds;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::string out;
  for (const auto& item : ds.items) {
    for (Eigen::Index i = 0; i < item.size(); ++i) {
      if (i) out.push_back(',');
      out += format_double(item[i]);
    }
    out.push_back('\n');
  }
  write_file_bytes(path, out);
}

const std::vector<std::string>& synth_dataset_names() {
  static const std::vector<std::string> names{"bars", "gaussians", "sparse-combos"};
  return names;
}

namespace {

Vector make_bars(Shape shape, Rng& rng) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(shape.size()));
  std::uniform_int_distribution<int> count_dist(1, 3);
  std::bernoulli_distribution horizontal(0.5);
  const int bars = count_dist(rng);
  for (int b = 0; b < bars; ++b) {
    if (horizontal(rng)) {
      std::uniform_int_distribution<std::size_t> row(0, shape.height - 1);
      const std::size_t r = row(rng);
      for (std::size_t c = 0; c < shape.width; ++c) v[static_cast<Eigen::Index>(r * shape.width + c)] = 1.0;
    } else {
      std::uniform_int_distribution<std::size_t> col(0, shape.width - 1);
      const std::size_t c = col(rng);
      for (std::size_t r = 0; r < shape.height; ++r) v[static_cast<Eigen::Index>(r * shape.width + c)] = 1.0;
    }
  }
  return v;
}

Vector make_gaussian_blob(Shape shape, Rng& rng) {
  std::uniform_real_distribution<double> cy(0.0, static_cast<double>(shape.height - 1));
  std::uniform_real_distribution<double> cx(0.0, static_cast<double>(shape.width - 1));
  const double scale = static_cast<double>(std::max(shape.height, shape.width));
  std::uniform_real_distribution<double> width(0.08 * scale, 0.25 * scale);
  std::uniform_real_distribution<double> amp(0.5, 1.2);
  const double y0 = cy(rng);
  const double x0 = cx(rng);
  const double s = width(rng);
  const double a = amp(rng);
  Vector v(static_cast<Eigen::Index>(shape.size()));
  for (std::size_t r = 0; r < shape.height; ++r)
    for (std::size_t c = 0; c < shape.width; ++c) {
      const double dy = static_cast<double>(r) - y0;
      const double dx = static_cast<double>(c) - x0;
      v[static_cast<Eigen::Index>(r * shape.width + c)] = std::min(1.0, a * std::exp(-(dx * dx + dy * dy) / (2 * s * s)));
    }
  return v;
}

Vector make_sparse_combo(Shape shape, Rng& rng) {
  const std::size_t n = shape.size();
  const std::size_t k = std::max<std::size_t>(1, n / 8);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < k; ++i) v[static_cast<Eigen::Index>(idx[i])] = mag(rng);
  return v / v.maxCoeff();
}

}  // namespace

Dataset synth_dataset(const std::string& name, Shape shape, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("synth_dataset: count must be >= 1");
  if (shape.size() == 0) throw std::invalid_argument("synth_dataset: empty shape");
  Vector (*make)(Shape, Rng&) = nullptr;
  if (name == "bars") make = make_bars;
  else if (name == "gaussians") make = make_gaussian_blob;
  else if (name == "sparse-combos") make = make_sparse_combo;
  else throw std::invalid_argument("synth_dataset: unknown generator '" + name + "' (bars, gaussians, sparse-combos)");
  Rng rng(seed);
  Dataset ds;
  ds.shape = shape;
  ds.source = "synthetic:" + name + ":" + std::to_string(seed);
  ds.items.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ds.items.push_back(make(shape, rng));
  return ds;
}

}  // namespace gpgd
