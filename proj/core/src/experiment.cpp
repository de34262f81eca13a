#include "gpgd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <sstream>
#include <thread>

#include "gpgd/checkpoint.hpp"
#include "gpgd/metrics.hpp"
#include "gpgd/rng.hpp"
#include "gpgd/training.hpp"

namespace gpgd {

namespace {

constexpr std::uint64_t kOperatorTag = 0x6f70;
constexpr std::uint64_t kNoiseTag = 0x6e6f;
constexpr std::uint64_t kNetTag = 0x6e6574;

std::string cell_name(double lambda, std::uint64_t seed) {
  return "lambda-" + format_double(lambda) + "_seed-" + std::to_string(seed);
}

std::string item_label(std::size_t item) {
  std::string s = std::to_string(item);
  return std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {std::nan(""), std::nan("")};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (std::isinf(mean)) return {mean, 0.0};
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

Dataset slice(const Dataset& ds, std::size_t begin, std::size_t end, const std::string& tag) {
  Dataset out;
  out.shape = ds.shape;
  out.source = ds.source + tag;
  out.items.assign(ds.items.begin() + static_cast<std::ptrdiff_t>(begin),
                   ds.items.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

}  // namespace

ExperimentData load_experiment_data(const ExperimentConfig& cfg) {
  const auto& spec = cfg.dataset;
  const std::size_t wanted = spec.count + spec.test_count;
  Dataset all;
  switch (spec.source) {
    case DatasetSource::Synthetic:
      all = synth_dataset(spec.name, spec.shape, wanted, spec.seed);
      break;
    case DatasetSource::Idx:
      all = load_idx(spec.path, wanted);
      break;
    case DatasetSource::Csv:
      all = load_dataset_csv(spec.path, spec.shape);
      break;
  }
  if (all.shape.height != spec.shape.height || all.shape.width != spec.shape.width)
    throw ExperimentError("dimension mismatch: dataset is " + std::to_string(all.shape.height) + "x" +
                          std::to_string(all.shape.width) + ", config expects " + std::to_string(spec.shape.height) +
                          "x" + std::to_string(spec.shape.width));
  if (all.size() <= spec.test_count)
    throw ExperimentError("dataset has " + std::to_string(all.size()) + " items, need more than test_count = " +
                          std::to_string(spec.test_count));
  const std::size_t n_train = std::min(spec.count, all.size() - spec.test_count);
  const std::size_t test_begin = all.size() - spec.test_count;
  return {slice(all, 0, n_train, ":train"), slice(all, test_begin, all.size(), ":test")};
}

MeasurementOperator build_operator(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t item) {
  const auto& p = cfg.problem;
  const Shape shape = cfg.dataset.shape;
  const std::uint64_t op_seed = derive_seed(derive_seed(seed, kOperatorTag), item);
  switch (p.kind) {
    case ProblemKind::Inpainting:
      return make_inpainting_operator(shape.size(), p.ratio, op_seed);
    case ProblemKind::SuperRes:
      return make_superres_operator(shape, p.factor, gaussian_blur_kernel(p.kernel_size, p.kernel_sigma));
    case ProblemKind::Deblur:
      return make_deblur_operator(shape, gaussian_blur_kernel(p.kernel_size, p.kernel_sigma));
    case ProblemKind::Sparse:
      return make_gaussian_operator(p.m, shape.size(), op_seed);
  }
  throw ExperimentError("unknown problem kind");
}

std::uint64_t noise_seed(std::uint64_t seed, std::size_t item) { return derive_seed(derive_seed(seed, kNoiseTag), item); }

std::uint64_t net_init_seed(std::uint64_t seed) { return derive_seed(seed, kNetTag); }

std::filesystem::path checkpoint_path(const ExperimentConfig& cfg, double lambda, std::uint64_t seed) {
  return cfg.out / "checkpoints" / (cell_name(lambda, seed) + ".ckpt");
}

DenseNet obtain_prior(const ExperimentConfig& cfg, const Dataset& train_set, double lambda, std::uint64_t seed) {
  const auto init = DenseNet::make(cfg.net.dims, net_init_seed(seed), cfg.net.slope);
  const auto path = checkpoint_path(cfg, lambda, seed);
  if (std::filesystem::exists(path)) return load_checkpoint(path, init);
  if (!cfg.train_inline) throw ExperimentError("missing checkpoint: " + path.string());
  if (train_set.dimension() != init.dims().front())
    throw ExperimentError("dimension mismatch: dataset items have " + std::to_string(train_set.dimension()) +
                          " entries, network expects " + std::to_string(init.dims().front()));
  auto result = train(init, train_set.items, cfg.train_config(lambda, seed));
  save_checkpoint(result.net, path);
  write_file_bytes(cfg.out / "traces" / ("train_" + cell_name(lambda, seed) + ".csv"), history_csv(result.history));
  return std::move(result.net);
}

CellRow solve_item(const MeasurementOperator& a, const Vector& truth, const Projector& p, double noise_sigma,
                   std::uint64_t seed, const GpgdSpec& spec, double threshold, GpgdTrace* trace_out) {
  if (static_cast<std::size_t>(truth.size()) != a.cols())
    throw ExperimentError("dimension mismatch: signal has " + std::to_string(truth.size()) + " entries, operator takes " +
                          std::to_string(a.cols()));
  const auto start = std::chrono::steady_clock::now();
  const Vector y = add_noise(a.apply(truth), NoiseSpec{noise_sigma, seed});
  GpgdConfig g;
  g.gamma = spec.gamma ? *spec.gamma : default_step_size(a);
  g.max_iters = spec.max_iters;
  g.stagnation_tol = spec.stagnation_tol;
  g.record_full_iterates = true;
  auto res = gpgd_run(a, y, p, g, truth);
  const auto best = best_iterate(res.trace);

  CellRow row;
  row.best_index = best.index;
  row.psnr_db = *res.trace.records[best.index].psnr_db;
  row.convergence_iter = best.x.norm() > 0.0 ? convergence_iteration(res.trace, best.x, threshold)
                                             : std::optional<std::size_t>(best.index);
  row.final_rel_err = res.trace.records.back().rel_err.value_or(std::nan(""));
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (trace_out) *trace_out = std::move(res.trace);
  return row;
}

std::vector<std::string> results_header() {
  return {"config_hash", "problem", "lambda", "seed", "item", "psnr_db", "convergence_iter", "best_index",
          "final_rel_err"};
}

std::vector<std::string> results_row(const std::string& hash, const ExperimentConfig& cfg, const CellRow& r) {
  return {hash,
          to_string(cfg.problem.kind),
          format_double(r.lambda),
          std::to_string(r.seed),
          std::to_string(r.item),
          format_double(r.psnr_db),
          r.convergence_iter ? std::to_string(*r.convergence_iter) : "never",
          std::to_string(r.best_index),
          format_double(r.final_rel_err)};
}

std::vector<LambdaAggregate> aggregate_rows(const std::vector<CellRow>& rows) {
  std::map<double, std::vector<const CellRow*>> by_lambda;
  for (const auto& r : rows) by_lambda[r.lambda].push_back(&r);
  std::vector<LambdaAggregate> out;
  for (const auto& [lambda, group] : by_lambda) {
    std::vector<double> ps, conv;
    LambdaAggregate agg;
    agg.lambda = lambda;
    agg.count = group.size();
    for (const auto* r : group) {
      ps.push_back(r->psnr_db);
      if (r->convergence_iter)
        conv.push_back(static_cast<double>(*r->convergence_iter));
      else
        ++agg.never;
    }
    const auto p = mean_std(ps);
    const auto c = mean_std(conv);
    agg.psnr_mean = p.mean;
    agg.psnr_std = p.std;
    agg.conv_mean = c.mean;
    agg.conv_std = c.std;
    out.push_back(agg);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  const auto data = load_experiment_data(cfg);
  const auto hash = config_hash(cfg);

  struct Cell {
    double lambda;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (double l : cfg.lambdas)
    for (auto s : cfg.seeds) cells.push_back({l, s});

  if (opts.write_files)
    for (const char* sub : {"checkpoints", "traces", "reports/cells"}) std::filesystem::create_directories(cfg.out / sub);

  std::vector<std::vector<CellRow>> cell_rows(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};

  const auto work = [&] {
    for (std::size_t c = next++; c < cells.size(); c = next++) {
      try {
        const auto [lambda, seed] = cells[c];
        auto net = std::make_shared<const DenseNet>(obtain_prior(cfg, data.train, lambda, seed));
        const auto projector = make_learned_projector(net);
        CsvTable table{results_header(), {}};
        for (std::size_t i = 0; i < data.test.size(); ++i) {
          GpgdTrace trace;
          auto row = solve_item(build_operator(cfg, seed, i), data.test.items[i], projector, cfg.noise_sigma,
                                noise_seed(seed, i), cfg.gpgd, cfg.threshold, &trace);
          row.lambda = lambda;
          row.seed = seed;
          row.item = i;
          if (opts.write_files) {
            write_trace_csv(cfg.out / "traces" / (cell_name(lambda, seed) + "_item-" + item_label(i) + ".csv"), trace);
            table.rows.push_back(results_row(hash, cfg, row));
          }
          cell_rows[c].push_back(row);
        }
        if (opts.write_files) write_csv(cfg.out / "reports" / "cells" / (cell_name(lambda, seed) + ".csv"), table);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };

  std::size_t threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cells.size());
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentResult result;
  result.config_hash = hash;
  for (auto& rows : cell_rows) result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const CellRow& a, const CellRow& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (a.seed != b.seed) return a.seed < b.seed;
    return a.item < b.item;
  });
  result.aggregates = aggregate_rows(result.rows);

  if (opts.write_files) {
    CsvTable all{results_header(), {}};
    for (const auto& r : result.rows) all.rows.push_back(results_row(hash, cfg, r));
    write_csv(cfg.out / "reports" / "results.csv", all);

    CsvTable agg{{"config_hash", "problem", "lambda", "count", "psnr_mean", "psnr_std", "conv_iter_mean",
                  "conv_iter_std", "never"},
                 {}};
    for (const auto& a : result.aggregates)
      agg.rows.push_back({hash, to_string(cfg.problem.kind), format_double(a.lambda), std::to_string(a.count),
                          format_double(a.psnr_mean), format_double(a.psnr_std), format_double(a.conv_mean),
                          format_double(a.conv_std), std::to_string(a.never)});
    write_csv(cfg.out / "reports" / "aggregate.csv", agg);
    write_file_bytes(cfg.out / "config.txt", print_config(cfg));

    std::ostringstream timing;
    for (const auto& r : result.rows)
      timing << "lambda=" << format_double(r.lambda) << " seed=" << r.seed << " item=" << r.item
             << " seconds=" << r.seconds << '\n';
    write_file_bytes(cfg.out / "reports" / "timing.txt", timing.str());
  }
  return result;
}

ReportSummary report(const std::filesystem::path& dir, bool write_files) {
  if (!std::filesystem::is_directory(dir)) throw ExperimentError("report: not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind("results", 0) == 0 && e.path().extension() == ".csv")
      files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ExperimentError("report: no results*.csv under " + dir.string());

  const auto expected = results_header();
  const auto join = [](const std::vector<std::string>& cols) {
    std::string s;
    for (const auto& c : cols) s += (s.empty() ? "" : ",") + c;
    return s;
  };
  std::vector<CsvTable> tables;
  for (const auto& f : files) {
    auto t = read_csv(f);
    if (t.header != expected)
      throw ExperimentError("report: schema mismatch in " + f.string() + ": columns [" + join(t.header) +
                            "], expected [" + join(expected) + "]");
    tables.push_back(std::move(t));
  }

  // (problem, lambda) -> per-run means
  struct PerRun {
    std::vector<double> psnr;
    std::vector<double> conv;
    std::size_t items = 0;
    std::size_t never = 0;
  };
  std::map<std::pair<std::string, double>, PerRun> groups;
  for (const auto& t : tables) {
    std::map<std::pair<std::string, double>, std::pair<std::vector<double>, std::vector<double>>> run;
    std::map<std::pair<std::string, double>, std::size_t> never;
    for (const auto& r : t.rows) {
      const auto key = std::make_pair(r[1], std::stod(r[2]));
      run[key].first.push_back(std::stod(r[5]));
      if (r[6] == "never")
        ++never[key];
      else
        run[key].second.push_back(std::stod(r[6]));
    }
    for (const auto& [key, v] : run) {
      auto& g = groups[key];
      g.psnr.push_back(mean_std(v.first).mean);
      if (!v.second.empty()) g.conv.push_back(mean_std(v.second).mean);
      g.items += v.first.size();
      g.never += never[key];
    }
  }

  ReportSummary out;
  out.runs = tables.size();
  out.table.header = {"method", "problem", "lambda", "runs", "items", "psnr_mean", "psnr_std", "conv_iter_mean",
                      "conv_iter_std", "never"};
  std::ostringstream text;
  text << "runs: " << tables.size() << '\n';
  text << "method              problem      PSNR (dB)          iterations\n";
  for (const auto& [key, g] : groups) {
    const auto p = mean_std(g.psnr);
    const auto c = mean_std(g.conv);
    const std::string method = "GPGD lambda=" + format_double(key.second);
    out.table.rows.push_back({method, key.first, format_double(key.second), std::to_string(g.psnr.size()),
                              std::to_string(g.items), format_double(p.mean), format_double(p.std),
                              format_double(c.mean), format_double(c.std), std::to_string(g.never)});
    char line[160];
    std::snprintf(line, sizeof line, "%-19s %-12s %7.2f +- %-7.2f %7.2f +- %-7.2f\n", method.c_str(),
                  key.first.c_str(), p.mean, p.std, c.mean, c.std);
    text << line;
  }
  out.text = text.str();
  if (write_files) {
    write_csv(dir / "reports" / "summary.csv", out.table);
    write_file_bytes(dir / "reports" / "summary.txt", out.text);
  }
  return out;
}

}  // namespace gpgd
