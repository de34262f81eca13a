#include "gpgd/model_set.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace gpgd {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate(const ModelSet::Kind& kind) {
  std::visit(overloaded{
                 [](const sets::KSparse& s) {
                   if (s.k < 1 || s.k >= s.n)
                     throw std::invalid_argument("KSparse: need 1 <= k < n, got k=" + std::to_string(s.k) +
                                                 ", n=" + std::to_string(s.n));
                 },
                 [](const sets::UnionOfSubspaces& u) {
                   if (u.bases.empty()) throw std::invalid_argument("UnionOfSubspaces: empty subspace list");
                   const auto n = u.bases.front().rows();
                   for (const auto& b : u.bases) {
                     if (b.rows() != n) throw DimensionError("UnionOfSubspaces: ambient dims differ", n, b.rows());
                     const Matrix gram = b.transpose() * b;
                     if ((gram - Matrix::Identity(b.cols(), b.cols())).cwiseAbs().maxCoeff() > 1e-10)
                       throw std::invalid_argument("UnionOfSubspaces: basis columns are not orthonormal");
                   }
                 },
                 [](const sets::UnionOfLines& l) {
                   if (l.directions.cols() == 0) throw std::invalid_argument("UnionOfLines: empty direction list");
                   for (Eigen::Index i = 0; i < l.directions.cols(); ++i)
                     if (std::abs(l.directions.col(i).norm() - 1.0) > 1e-12)
                       throw std::invalid_argument("UnionOfLines: direction " + std::to_string(i) +
                                                   " is not unit norm");
                 },
             },
             kind);
}

}  // namespace

ModelSet::ModelSet(Kind kind) : kind_(std::move(kind)) { validate(kind_); }

ModelSet ModelSet::k_sparse(std::size_t k, std::size_t n) { return ModelSet(sets::KSparse{k, n}); }

ModelSet ModelSet::union_of_subspaces(std::vector<Matrix> bases) {
  return ModelSet(sets::UnionOfSubspaces{std::move(bases)});
}

ModelSet ModelSet::union_of_lines(Matrix directions) {
  for (Eigen::Index i = 0; i < directions.cols(); ++i) {
    const double norm = directions.col(i).norm();
    if (norm == 0.0) throw std::invalid_argument("UnionOfLines: zero direction " + std::to_string(i));
    directions.col(i) /= norm;
  }
  return ModelSet(sets::UnionOfLines{std::move(directions)});
}

ModelSet ModelSet::random_lines(std::size_t count, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix d(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(count));
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    for (Eigen::Index i = 0; i < d.rows(); ++i) d(i, j) = normal(rng);
  return union_of_lines(std::move(d));
}

std::size_t ModelSet::dimension() const noexcept {
  return std::visit(overloaded{
                        [](const sets::KSparse& s) { return s.n; },
                        [](const sets::UnionOfSubspaces& u) { return static_cast<std::size_t>(u.bases[0].rows()); },
                        [](const sets::UnionOfLines& l) { return static_cast<std::size_t>(l.directions.rows()); },
                    },
                    kind_);
}

Vector ModelSet::project(const Vector& z) const {
  require_length("ModelSet::project", dimension(), static_cast<std::size_t>(z.size()));
  if (const auto* s = std::get_if<sets::KSparse>(&kind_)) return hard_threshold(z, s->k);
  return project_union(z, *this);
}

Vector ModelSet::sample(Rng& rng) const {
  std::normal_distribution<double> normal;
  return std::visit(
      overloaded{
          [&](const sets::KSparse& s) -> Vector {
            std::vector<std::size_t> idx(s.n);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            for (std::size_t i = 0; i < s.k; ++i) {
              std::uniform_int_distribution<std::size_t> pick(i, s.n - 1);
              std::swap(idx[i], idx[pick(rng)]);
            }
            Vector x = Vector::Zero(static_cast<Eigen::Index>(s.n));
            for (std::size_t i = 0; i < s.k; ++i) x[static_cast<Eigen::Index>(idx[i])] = normal(rng);
            return x;
          },
          [&](const sets::UnionOfSubspaces& u) -> Vector {
            std::uniform_int_distribution<std::size_t> pick(0, u.bases.size() - 1);
            const Matrix& b = u.bases[pick(rng)];
            Vector c(b.cols());
            for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = normal(rng);
            return b * c;
          },
          [&](const sets::UnionOfLines& l) -> Vector {
            std::uniform_int_distribution<Eigen::Index> pick(0, l.directions.cols() - 1);
            const Eigen::Index j = pick(rng);
            return normal(rng) * l.directions.col(j);
          },
      },
      kind_);
}

Vector hard_threshold(const Vector& z, std::size_t k) {
  const auto n = static_cast<std::size_t>(z.size());
  if (k < 1 || k > n)
    throw std::invalid_argument("hard_threshold: k must lie in [1, " + std::to_string(n) + "], got " +
                                std::to_string(k));
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  auto larger = [&z](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(z[a]);
    const double mb = std::abs(z[b]);
    return ma > mb || (ma == mb && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k - 1), idx.end(), larger);
  Vector out = Vector::Zero(z.size());
  for (std::size_t i = 0; i < k; ++i) out[idx[i]] = z[idx[i]];
  return out;
}

std::size_t best_component(const Vector& z, const ModelSet& set) {
  return std::visit(
      overloaded{
          [](const sets::KSparse&) -> std::size_t {
            throw std::invalid_argument("best_component: k-sparse sets have no finite component list");
          },
          [&](const sets::UnionOfSubspaces& u) -> std::size_t {
            std::size_t best = 0;
            double best_score = -1.0;
            for (std::size_t j = 0; j < u.bases.size(); ++j) {
              const double score = (u.bases[j].transpose() * z).squaredNorm();
              if (score > best_score) {
                best_score = score;
                best = j;
              }
            }
            return best;
          },
          [&](const sets::UnionOfLines& l) -> std::size_t {
            std::size_t best = 0;
            double best_score = -1.0;
            for (Eigen::Index j = 0; j < l.directions.cols(); ++j) {
              const double score = std::abs(l.directions.col(j).dot(z));
              if (score > best_score) {
                best_score = score;
                best = static_cast<std::size_t>(j);
              }
            }
            return best;
          },
      },
      set.kind());
}

Vector project_union(const Vector& z, const ModelSet& set) {
  require_length("project_union", set.dimension(), static_cast<std::size_t>(z.size()));
  const std::size_t j = best_component(z, set);
  if (const auto* u = std::get_if<sets::UnionOfSubspaces>(&set.kind())) {
    const Matrix& b = u->bases[j];
    return b * (b.transpose() * z);
  }
  const auto& l = std::get<sets::UnionOfLines>(set.kind());
  const auto x = l.directions.col(static_cast<Eigen::Index>(j));
  return x.dot(z) * x;
}

bool is_member(const ModelSet& set, const Vector& x, double tol) {
  return (x - set.project(x)).norm() <= tol * (1.0 + x.norm());
}

namespace {

nlohmann::json flat(const Matrix& m) {
  // Row-major flattening.
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

Matrix unflat(const nlohmann::json& arr, Eigen::Index rows, Eigen::Index cols, std::size_t offset = 0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = arr.at(offset + static_cast<std::size_t>(i * cols + j)).get<double>();
  return m;
}

}  // namespace

void to_json(nlohmann::json& j, const ModelSet& set) {
  std::visit(overloaded{
                 [&](const sets::KSparse& s) { j = {{"kind", "k_sparse"}, {"k", s.k}, {"n", s.n}}; },
                 [&](const sets::UnionOfSubspaces& u) {
                   nlohmann::json dims = nlohmann::json::array();
                   nlohmann::json entries = nlohmann::json::array();
                   for (const auto& b : u.bases) {
                     dims.push_back(b.cols());
                     for (auto& v : flat(b)) entries.push_back(v);
                   }
                   j = {{"kind", "union_of_subspaces"}, {"n", u.bases[0].rows()}, {"dims", dims}, {"entries", entries}};
                 },
                 [&](const sets::UnionOfLines& l) {
                   // One direction per row.
                   j = {{"kind", "union_of_lines"},
                        {"n", l.directions.rows()},
                        {"count", l.directions.cols()},
                        {"entries", flat(l.directions.transpose())}};
                 },
             },
             set.kind());
}

ModelSet model_set_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "k_sparse") return ModelSet::k_sparse(j.at("k").get<std::size_t>(), j.at("n").get<std::size_t>());
  if (kind == "union_of_subspaces") {
    const auto n = j.at("n").get<Eigen::Index>();
    std::vector<Matrix> bases;
    std::size_t offset = 0;
    for (const auto& d : j.at("dims")) {
      const auto cols = d.get<Eigen::Index>();
      bases.push_back(unflat(j.at("entries"), n, cols, offset));
      offset += static_cast<std::size_t>(n * cols);
    }
    return ModelSet::union_of_subspaces(std::move(bases));
  }
  if (kind == "union_of_lines") {
    const auto n = j.at("n").get<Eigen::Index>();
    const auto count = j.at("count").get<Eigen::Index>();
    Matrix rows = unflat(j.at("entries"), count, n);
    return ModelSet(sets::UnionOfLines{rows.transpose()});
  }
  throw std::invalid_argument("model set JSON: unknown kind '" + kind + "'");
}

}  // namespace gpgd
