#include "gpgd/solver.hpp"

#include <cmath>

#include "gpgd/io.hpp"
#include "gpgd/metrics.hpp"

namespace gpgd {

GpgdDivergence::GpgdDivergence(std::size_t iteration, double norm)
    : std::runtime_error("gpgd: non-finite iterate at iteration " + std::to_string(iteration) +
                         " (norm " + format_double(norm) + ")"),
      iteration_(iteration),
      norm_(norm) {}

namespace {

IterationRecord make_record(std::size_t iter, const Vector& x, const MeasurementOperator& a, const Vector& y,
                            const std::optional<Vector>& truth) {
  IterationRecord rec;
  rec.iter = iter;
  rec.residual = (a.apply(x) - y).norm();
  if (truth) {
    const double err = (x - *truth).norm();
    const double tn = truth->norm();
    rec.abs_err = err;
    rec.rel_err = tn > 0.0 ? err / tn : err;
    rec.psnr_db = psnr(x, *truth);
  }
  return rec;
}

}  // namespace

GpgdResult gpgd_run(const MeasurementOperator& a, const Vector& y, const Projector& p, const GpgdConfig& cfg,
                    const std::optional<Vector>& ground_truth) {
  require_length("gpgd_run: measurements", a.rows(), static_cast<std::size_t>(y.size()));
  if (!(cfg.gamma >= 0.0)) throw std::invalid_argument("gpgd_run: gamma must be >= 0");
  if (cfg.max_iters < 1) throw std::invalid_argument("gpgd_run: max_iters must be >= 1");
  if (ground_truth) require_length("gpgd_run: ground truth", a.cols(), static_cast<std::size_t>(ground_truth->size()));

  Vector x = cfg.x0 ? *cfg.x0 : a.adjoint_apply(y);
  require_length("gpgd_run: x0", a.cols(), static_cast<std::size_t>(x.size()));

  GpgdResult out;
  auto& trace = out.trace;
  trace.records.reserve(cfg.max_iters + 1);
  trace.records.push_back(make_record(0, x, a, y, ground_truth));
  if (cfg.record_full_iterates) trace.iterates.push_back(x);

  for (std::size_t k = 0; k < cfg.max_iters; ++k) {
    const Vector px = p(x);
    x = px - cfg.gamma * a.adjoint_apply(a.apply(px) - y);
    if (!x.allFinite()) throw GpgdDivergence(k + 1, x.norm());
    trace.records.push_back(make_record(k + 1, x, a, y, ground_truth));
    if (cfg.record_full_iterates) trace.iterates.push_back(x);
    if (cfg.stagnation_tol) {
      const double prev = trace.records[k].residual;
      const double cur = trace.records[k + 1].residual;
      if (std::abs(cur - prev) <= *cfg.stagnation_tol * prev) break;
    }
  }
  trace.final_iterate = x;
  if (ground_truth) {
    std::vector<double> ps;
    ps.reserve(trace.records.size());
    for (const auto& r : trace.records) ps.push_back(*r.psnr_db);
    trace.best_index = best_index(ps);
  }
  out.x = std::move(x);
  return out;
}

std::optional<std::size_t> first_below(std::span<const double> rel_errors, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("first_below: threshold must be > 0");
  for (std::size_t i = 0; i < rel_errors.size(); ++i)
    if (rel_errors[i] <= threshold) return i;
  return std::nullopt;
}

std::optional<std::size_t> convergence_iteration(const GpgdTrace& trace, const Vector& x_star, double threshold) {
  const double ns = x_star.norm();
  if (ns == 0.0) throw std::invalid_argument("convergence_iteration: reference has zero norm");
  if (trace.iterates.empty())
    throw std::invalid_argument("convergence_iteration: trace has no recorded iterates");
  std::vector<double> rel;
  rel.reserve(trace.iterates.size());
  for (const auto& x : trace.iterates) rel.push_back((x - x_star).norm() / ns);
  return first_below(rel, threshold);
}

std::size_t best_index(std::span<const double> psnr_db) {
  if (psnr_db.empty()) throw std::invalid_argument("best_iterate: empty trace");
  std::size_t best = 0;
  for (std::size_t i = 1; i < psnr_db.size(); ++i)
    if (psnr_db[i] > psnr_db[best]) best = i;
  return best;
}

BestIterate best_iterate(const GpgdTrace& trace) {
  if (trace.records.empty()) throw std::invalid_argument("best_iterate: empty trace");
  if (!trace.best_index) throw std::invalid_argument("best_iterate: trace has no ground-truth PSNR");
  if (trace.iterates.empty()) throw std::invalid_argument("best_iterate: trace has no recorded iterates");
  return BestIterate{*trace.best_index, trace.iterates[*trace.best_index]};
}

double default_step_size(const MeasurementOperator& a) {
  const double norm = spectral_norm(a, 1e-8);
  if (norm == 0.0) throw std::invalid_argument("default_step_size: zero operator");
  return 1.0 / (norm * norm);
}

std::string trace_csv(const GpgdTrace& trace) {
  std::string out = "iter,rel_err,psnr_db,residual\n";
  for (const auto& r : trace.records) {
    out += std::to_string(r.iter) + ",";
    out += (r.rel_err ? format_double(*r.rel_err) : std::string()) + ",";
    out += (r.psnr_db ? format_double(*r.psnr_db) : std::string()) + ",";
    out += format_double(r.residual) + "\n";
  }
  return out;
}

void write_trace_csv(const std::filesystem::path& path, const GpgdTrace& trace) {
  write_file_bytes(path, trace_csv(trace));
}

}  // namespace gpgd
