#include "gpgd/signal.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "gpgd/detail/bytes.hpp"
#include "gpgd/io.hpp"

namespace gpgd {

DimensionError::DimensionError(const std::string& what, std::size_t expected, std::size_t actual)
    : std::invalid_argument(what + ": expected length " + std::to_string(expected) + ", got " +
                            std::to_string(actual)),
      expected_(expected),
      actual_(actual) {}

void require_length(const char* context, std::size_t expected, std::size_t actual) {
  if (expected != actual) throw DimensionError(context, expected, actual);
}

bool all_finite(const Vector& v) noexcept { return v.allFinite(); }

Signal::Signal(Vector data, std::optional<Shape> shape) : data_(std::move(data)), shape_(shape) {
  if (data_.size() < 1) throw std::invalid_argument("Signal: length must be at least 1");
  if (!data_.allFinite()) throw std::invalid_argument("Signal: entries must be finite");
  if (shape_ && shape_->size() != size())
    throw DimensionError("Signal: shape does not match data", shape_->size(), size());
}

Signal Signal::clamped() const {
  Signal out = *this;
  out.data_ = data_.cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

void write_signal_csv(const std::filesystem::path& path, const Signal& s) {
  const std::size_t width = s.shape() ? s.shape()->width : s.size();
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += format_double(s.data()[static_cast<Eigen::Index>(i)]);
    out.push_back((i + 1) % width == 0 ? '\n' : ',');
  }
  write_file_bytes(path, out);
}

Signal read_signal_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t width = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (rows == 0) width = cells.size();
    else if (cells.size() != width)
      throw std::runtime_error("signal CSV '" + path.string() + "': ragged row " + std::to_string(rows + 1));
    for (const auto& c : cells) values.push_back(std::stod(c));
    ++rows;
  }
  if (values.empty()) throw std::runtime_error("signal CSV '" + path.string() + "' is empty");
  Vector v = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  if (rows > 1) return Signal(std::move(v), Shape{rows, width});
  return Signal(std::move(v));
}

void write_signal_binary(const std::filesystem::path& path, const Signal& s) {
  std::string out;
  out.reserve(8 + 8 * s.size());
  detail::put_u64_le(out, s.size());
  for (Eigen::Index i = 0; i < s.data().size(); ++i) detail::put_f64_le(out, s.data()[i]);
  write_file_bytes(path, out);
}

Signal read_signal_binary(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  if (bytes.size() < 8) throw std::runtime_error("signal binary '" + path.string() + "': missing length header");
  const std::uint64_t n = detail::get_u64_le(bytes, 0);
  if (bytes.size() != 8 + 8 * n)
    throw std::runtime_error("signal binary '" + path.string() + "': header says " + std::to_string(n) +
                             " values but payload holds " + std::to_string((bytes.size() - 8) / 8));
  Vector v(static_cast<Eigen::Index>(n));
  for (std::uint64_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = detail::get_f64_le(bytes, 8 + 8 * i);
  return Signal(std::move(v));
}

}  // namespace gpgd
