#include "gpgd/projector.hpp"

#include <cstring>
#include <stdexcept>
#include <string_view>

#include "gpgd/detail/bytes.hpp"
#include "gpgd/io.hpp"

namespace gpgd {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double point_coin(const Vector& z, std::uint64_t seed) {
  const std::string_view bytes(reinterpret_cast<const char*>(z.data()), static_cast<std::size_t>(z.size()) * sizeof(double));
  const std::uint64_t h = mix_seed(seed ^ detail::fnv1a(bytes));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

Vector apply_perturbed(const projectors::Perturbed& p, const Vector& z) {
  require_length("Perturbed projector", p.set.dimension(), static_cast<std::size_t>(z.size()));
  if (is_member(p.set, z)) return z;
  const Matrix& dirs = std::get<sets::UnionOfLines>(p.set.kind()).directions;
  Eigen::Index best = 0;
  Eigen::Index second = -1;
  double best_score = -1.0;
  double second_score = -1.0;
  for (Eigen::Index j = 0; j < dirs.cols(); ++j) {
    const double score = std::abs(dirs.col(j).dot(z));
    if (score > best_score) {
      second = best_score >= 0.0 ? best : -1;
      second_score = best_score;
      best = j;
      best_score = score;
    } else if (score > second_score) {
      second = j;
      second_score = score;
    }
  }
  Eigen::Index chosen = best;
  if (p.normal > 0.0 && second >= 0 && point_coin(z, p.seed) < p.normal) chosen = second;
  const auto x = dirs.col(chosen);
  return (1.0 + p.tangential) * x.dot(z) * x;
}

}  // namespace

Vector Projector::operator()(const Vector& z) const {
  return std::visit(overloaded{
                        [&](const projectors::ExactOrthogonal& e) { return e.set.project(z); },
                        [&](const projectors::Learned& l) { return l.net->forward(z); },
                        [&](const projectors::Perturbed& p) { return apply_perturbed(p, z); },
                        [&](const projectors::Custom& c) { return c.fn(z); },
                    },
                    kind_);
}

const ModelSet* Projector::model_set() const noexcept {
  if (const auto* e = std::get_if<projectors::ExactOrthogonal>(&kind_)) return &e->set;
  if (const auto* p = std::get_if<projectors::Perturbed>(&kind_)) return &p->set;
  return nullptr;
}

std::string Projector::describe() const {
  return std::visit(overloaded{
                        [](const projectors::ExactOrthogonal&) { return std::string("exact"); },
                        [](const projectors::Learned& l) {
                          std::string s = "learned(";
                          const auto d = l.net->dims();
                          for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "-" : "") + std::to_string(d[i]);
                          return s + ")";
                        },
                        [](const projectors::Perturbed& p) {
                          return "perturbed(t=" + format_double(p.tangential) + ",u=" + format_double(p.normal) + ")";
                        },
                        [](const projectors::Custom& c) { return c.name; },
                    },
                    kind_);
}

Projector make_exact_projector(ModelSet set) { return Projector(projectors::ExactOrthogonal{std::move(set)}); }

Projector make_learned_projector(std::shared_ptr<const DenseNet> net) {
  if (!net) throw std::invalid_argument("make_learned_projector: null network");
  return Projector(projectors::Learned{std::move(net)});
}

Projector make_learned_projector(DenseNet net) {
  return make_learned_projector(std::make_shared<const DenseNet>(std::move(net)));
}

Projector make_perturbed_projector(ModelSet set, double tangential, double normal, std::uint64_t seed) {
  if (!set.is_homogeneous_lines())
    throw std::invalid_argument("make_perturbed_projector: model set must be a union of lines");
  if (!(tangential >= 0.0) || !(normal >= 0.0) || normal > 1.0)
    throw std::invalid_argument("make_perturbed_projector: need t >= 0 and 0 <= u <= 1");
  return Projector(projectors::Perturbed{std::move(set), tangential, normal, seed});
}

Projector make_custom_projector(std::string name, std::function<Vector(const Vector&)> fn) {
  return Projector(projectors::Custom{std::move(name), std::move(fn)});
}

}  // namespace gpgd
