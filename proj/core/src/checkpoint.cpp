#include "gpgd/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include "gpgd/detail/bytes.hpp"
#include "gpgd/io.hpp"

namespace gpgd {

CheckpointError::CheckpointError(const std::string& what, std::size_t offset)
    : std::runtime_error("checkpoint: " + what + " (byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

std::string encode_checkpoint(const DenseNet& net) {
  nlohmann::json acts = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    if (l.activation.kind == ActivationKind::LeakyReLU)
      acts.push_back({{"kind", "leaky_relu"}, {"slope", l.activation.slope}});
    else
      acts.push_back({{"kind", "identity"}});
  }
  nlohmann::json header = {{"format", "gpgd-densenet"},
                           {"version", kCheckpointVersion},
                           {"dims", net.dims()},
                           {"activations", acts},
                           {"latent_index", net.latent_index() ? nlohmann::json(*net.latent_index()) : nlohmann::json()},
                           {"parameter_count", net.parameter_count()}};
  std::string out = header.dump();
  out.push_back('\n');
  const Vector p = net.parameters();
  out.reserve(out.size() + 8 * static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) detail::put_f64_le(out, p[i]);
  return out;
}

DenseNet decode_checkpoint(const std::string& bytes) {
  const std::size_t eol = bytes.find('\n');
  if (eol == std::string::npos) throw CheckpointError("header is not terminated", bytes.size());
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, eol));
  } catch (const nlohmann::json::parse_error& e) {
    throw CheckpointError(std::string("header is not valid JSON: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  std::vector<std::size_t> dims;
  std::vector<Activation> acts;
  std::optional<std::size_t> latent;
  std::size_t count = 0;
  try {
    if (header.at("format").get<std::string>() != "gpgd-densenet") throw CheckpointError("unknown format tag", 0);
    if (header.at("version").get<int>() != kCheckpointVersion)
      throw CheckpointError("unsupported version " + header.at("version").dump(), 0);
    dims = header.at("dims").get<std::vector<std::size_t>>();
    for (const auto& a : header.at("activations")) {
      const auto kind = a.at("kind").get<std::string>();
      if (kind == "leaky_relu") acts.push_back({ActivationKind::LeakyReLU, a.at("slope").get<double>()});
      else if (kind == "identity") acts.push_back({ActivationKind::Identity, 0.01});
      else throw CheckpointError("unknown activation '" + kind + "'", 0);
    }
    if (!header.at("latent_index").is_null()) latent = header.at("latent_index").get<std::size_t>();
    count = header.at("parameter_count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad header field: ") + e.what(), 0);
  }
  if (dims.size() < 2 || acts.size() + 1 != dims.size()) throw CheckpointError("dims and activations disagree", 0);

  std::vector<DenseLayer> layers;
  std::size_t expected = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(dims[l]);
    const auto out = static_cast<Eigen::Index>(dims[l + 1]);
    layers.push_back({Matrix::Zero(out, in), Vector::Zero(out), acts[l]});
    expected += dims[l] * dims[l + 1] + dims[l + 1];
  }
  if (expected != count)
    throw CheckpointError("parameter_count " + std::to_string(count) + " does not match dims (" +
                              std::to_string(expected) + ")",
                          0);
  const std::size_t blob = eol + 1;
  const std::size_t available = bytes.size() - blob;
  if (available < 8 * count)
    throw CheckpointError("truncated parameter blob: expected " + std::to_string(8 * count) + " bytes, found " +
                              std::to_string(available),
                          bytes.size());
  if (available > 8 * count) throw CheckpointError("trailing bytes after parameter blob", blob + 8 * count);
  Vector p(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) p[static_cast<Eigen::Index>(i)] = detail::get_f64_le(bytes, blob + 8 * i);
  try {
    DenseNet net(std::move(layers), latent);
    net.set_parameters(p);
    return net;
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(e.what(), 0);
  }
}

void save_checkpoint(const DenseNet& net, const std::filesystem::path& path) {
  write_file_bytes(path, encode_checkpoint(net));
}

DenseNet load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file_bytes(path)); }

DenseNet load_checkpoint(const std::filesystem::path& path, const DenseNet& expected) {
  DenseNet net = load_checkpoint(path);
  if (!net.same_architecture(expected)) {
    auto fmt = [](const std::vector<std::size_t>& d) {
      std::string s;
      for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "-" : "") + std::to_string(d[i]);
      return s;
    };
    throw ShapeMismatchError("checkpoint '" + path.string() + "' has architecture " + fmt(net.dims()) +
                             ", expected " + fmt(expected.dims()));
  }
  return net;
}

}  // namespace gpgd
