#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "htrpm/gibbs.hpp"
#include "htrpm/io.hpp"
#include "htrpm/metrics.hpp"
#include "htrpm/simgen.hpp"
#include "htrpm/summary.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace htrpm;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int worker_count() {
  if (const char* env = std::getenv("HTRPM_WORKERS")) {
    return std::max(1, std::atoi(env));
  }
  return 1;
}

// Runs fn(0..n_tasks-1) over a fixed-size worker pool; rethrows the first
// task failure after all workers stop.
void run_parallel(int n_tasks, const std::function<void(int)>& fn) {
  int workers = std::min(worker_count(), n_tasks);
  if (workers <= 1) {
    for (int k = 0; k < n_tasks; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        int k = next.fetch_add(1);
        if (k >= n_tasks) return;
        try {
          fn(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

struct FitResult {
  ChainArchive archive;
  long clamp_count = 0;
  double wall_seconds = 0.0;
};

// One chain end to end: fingerprint, optional checkpoint resume, sampling,
// periodic checkpoints. checkpoint_path may be empty (no checkpointing).
FitResult run_fit(const PanelDataset& data, const Hyperparameters& hyper,
                  const std::string& checkpoint_path, const std::string& resume_path) {
  hyper.validate(data.d_z(), data.d_x());
  std::string fingerprint =
      config_fingerprint(hyper, data.n_participants, data.n_periods, data.d_z(), data.d_x());

  GibbsSampler sampler(data, hyper);
  if (!resume_path.empty()) {
    json checkpoint = json::parse(read_file(resume_path));
    std::string saved = checkpoint.at("fingerprint").get<std::string>();
    if (saved != fingerprint) {
      throw std::invalid_argument("resume mismatch: checkpoint fingerprint " + saved +
                                  " differs from configured " + fingerprint);
    }
    sampler.restore(checkpoint.at("snapshot"));
  } else {
    sampler.init();
  }

  GibbsSampler::CheckpointCallback cb = nullptr;
  if (!checkpoint_path.empty() && hyper.mcmc.checkpoint_every > 0) {
    cb = [&checkpoint_path, &fingerprint](const GibbsSampler& s, int) {
      json checkpoint;
      checkpoint["fingerprint"] = fingerprint;
      checkpoint["snapshot"] = s.snapshot();
      write_file(checkpoint_path, checkpoint.dump() + "\n");
    };
  }

  auto start = std::chrono::steady_clock::now();
  FitResult out;
  out.archive = sampler.run(cb);
  out.archive.fingerprint = fingerprint;
  out.clamp_count = sampler.clamp_count();
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// Posterior mean fitted smooth at each cell's observed times.
std::vector<std::vector<double>> fitted_smooth(const ChainArchive& archive,
                                               const PanelDataset& data) {
  SplineBasis basis(archive.q);
  int cells = archive.n_participants * archive.n_periods;
  std::vector<std::vector<double>> fitted(cells);
  for (int c = 0; c < cells; ++c) {
    Eigen::MatrixXd design = basis.design_matrix(data.cells[c].times);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(design.rows());
    for (const Draw& d : archive.draws) acc += design * d.beta[d.dish[c]];
    acc /= static_cast<double>(archive.draws.size());
    fitted[c].assign(acc.data(), acc.data() + acc.size());
  }
  return fitted;
}

std::vector<int> cluster_sizes(const std::vector<int>& partition) {
  std::vector<int> sizes;
  for (int lab : partition) {
    if (lab >= static_cast<int>(sizes.size())) sizes.resize(lab + 1, 0);
    ++sizes[lab];
  }
  std::sort(sizes.begin(), sizes.end(), std::greater<int>());
  return sizes;
}

json metrics_report(const ChainArchive& archive, const ScenarioTruth& truth,
                    const PanelDataset* data, const std::vector<int>& partition) {
  int n = archive.n_participants, j_count = archive.n_periods;
  if (static_cast<int>(truth.cluster.size()) != n * j_count) {
    throw std::invalid_argument("truth shape mismatch: expected " +
                                std::to_string(n * j_count) + " cluster labels, found " +
                                std::to_string(truth.cluster.size()));
  }
  double vi = 0.0, ari = 0.0;
  for (int j = 0; j < j_count; ++j) {
    std::vector<int> est(n), tru(n);
    for (int i = 0; i < n; ++i) {
      est[i] = partition[i * j_count + j];
      tru[i] = truth.cluster[i * j_count + j];
    }
    vi += variation_of_information(est, tru);
    ari += adjusted_rand_index(est, tru);
  }
  json m;
  m["vi"] = vi / j_count;
  // Full-allocation score: truth labels identify smooth functions across
  // periods, so this also credits cross-period cluster identity.
  m["vi_global"] = variation_of_information(partition, truth.cluster);
  m["ari"] = ari / j_count;
  if (data != nullptr) {
    m["mse_smooth"] = mse_smooth(fitted_smooth(archive, *data), truth.smooth);
  }
  if (has_gamma(archive.variant) && !truth.gamma.empty()) {
    std::vector<std::vector<unsigned char>> gamma_draws;
    gamma_draws.reserve(archive.draws.size());
    for (const Draw& d : archive.draws) gamma_draws.push_back(d.gamma);
    m["gamma_accuracy"] = gamma_accuracy(gamma_draws, truth.gamma, n, j_count);
  }
  return m;
}

void write_curves_csv(const std::string& path, const std::vector<ClusterCurve>& curves,
                      const std::vector<double>& grid) {
  std::ostringstream out;
  out << "cluster,n_cells,t,mean,lower,upper\n";
  for (std::size_t rank = 0; rank < curves.size(); ++rank) {
    const ClusterCurve& c = curves[rank];
    for (std::size_t g = 0; g < grid.size(); ++g) {
      out << rank + 1 << ',' << c.cells.size() << ',' << fmt_double(grid[g]) << ','
          << fmt_double(c.mean[g]) << ',' << fmt_double(c.lower[g]) << ','
          << fmt_double(c.upper[g]) << '\n';
    }
  }
  write_file(path, out.str());
}

void write_transitions_csv(const std::string& path,
                           const std::vector<Eigen::MatrixXi>& tables) {
  std::ostringstream out;
  out << "transition,from,to,count\n";
  for (std::size_t t = 0; t < tables.size(); ++t) {
    for (int a = 0; a < tables[t].rows(); ++a) {
      for (int b = 0; b < tables[t].cols(); ++b) {
        if (tables[t](a, b) == 0) continue;
        out << t + 1 << ',' << a << ',' << b << ',' << tables[t](a, b) << '\n';
      }
    }
  }
  write_file(path, out.str());
}

struct SummaryOutputs {
  std::vector<int> partition;
  WaicResult waic_result;
};

SummaryOutputs summarize_archive(const ChainArchive& archive, int restarts,
                                 double waic_fraction, const std::string& out_dir) {
  SummaryOutputs out;
  RngStream rng(archive.seed ^ 0x5a150u);  // summary stream, decoupled from the chain
  out.partition = salso_estimate(archive, restarts, rng);
  out.waic_result = waic(archive, waic_fraction);

  if (!out_dir.empty()) {
    SplineBasis basis(archive.q);
    std::vector<double> grid(101);
    for (int g = 0; g <= 100; ++g) grid[g] = g / 100.0;
    write_curves_csv((fs::path(out_dir) / "curves.csv").string(),
                     trajectory_summary(archive, basis, grid, out.partition), grid);
    write_transitions_csv(
        (fs::path(out_dir) / "transitions.csv").string(),
        transition_tables(out.partition, archive.n_participants, archive.n_periods));
  }
  return out;
}

struct GridSpec {
  std::vector<double> alpha0;
  std::vector<double> alpha;
};

// "a0=1,0.1,0.01;a=0.1,0.01,0.001"
GridSpec parse_grid(const std::string& text) {
  GridSpec grid;
  std::stringstream parts(text);
  std::string part;
  while (std::getline(parts, part, ';')) {
    std::size_t eq = part.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad --grid segment: " + part);
    std::string key = part.substr(0, eq);
    std::vector<double>* target = nullptr;
    if (key == "a0") target = &grid.alpha0;
    else if (key == "a") target = &grid.alpha;
    else throw std::invalid_argument("bad --grid key: " + key);
    std::stringstream vals(part.substr(eq + 1));
    std::string v;
    while (std::getline(vals, v, ',')) {
      try {
        target->push_back(std::stod(v));
      } catch (const std::exception&) {
        throw std::invalid_argument("bad --grid value: " + v);
      }
    }
  }
  if (grid.alpha0.empty() || grid.alpha.empty()) {
    throw std::invalid_argument("--grid needs both a0=... and a=... lists");
  }
  return grid;
}

struct FitFlags {
  std::string data_path, config_path, resume_path, out_dir;
  std::string variant = "htrpm";
  int iters = -1, burnin = -1, thin = -1, q = -1, checkpoint_every = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double alpha = -1.0, alpha0 = -1.0;
};

Hyperparameters build_hyper(const FitFlags& f, const PanelDataset& data) {
  Hyperparameters hyper =
      default_hyperparameters(variant_from_name(f.variant), data.d_z(), data.d_x());
  if (!f.config_path.empty()) apply_config(read_config_file(f.config_path), hyper);
  hyper.variant = variant_from_name(f.variant);  // flag wins over config
  if (f.iters >= 0) hyper.mcmc.iterations = f.iters;
  if (f.burnin >= 0) hyper.mcmc.burnin = f.burnin;
  if (f.thin >= 0) hyper.mcmc.thinning = f.thin;
  if (f.seed_set) hyper.mcmc.seed = f.seed;
  if (f.checkpoint_every >= 0) hyper.mcmc.checkpoint_every = f.checkpoint_every;
  if (f.q >= 0) hyper.q = f.q;
  if (f.alpha >= 0.0) hyper.alpha = f.alpha;
  if (f.alpha0 >= 0.0) hyper.alpha0 = f.alpha0;
  return hyper;
}

int cmd_simulate(int scenario, std::uint64_t seed, double mu_eta, bool mu_eta_set,
                 const std::string& out_dir, int replicates) {
  if (scenario == 1 && mu_eta_set) {
    throw std::invalid_argument("--mu-eta only applies to scenario 2");
  }
  fs::create_directories(out_dir);
  run_parallel(replicates, [&](int r) {
    char name[16];
    std::snprintf(name, sizeof(name), "%03d", r + 1);
    fs::path dir = fs::path(out_dir) / name;
    fs::create_directories(dir);
    std::uint64_t rep_seed = seed + static_cast<std::uint64_t>(r);
    auto [data, truth] = scenario == 1 ? generate_scenario1(rep_seed)
                                       : generate_scenario2(rep_seed, mu_eta);
    write_data_csv((dir / "data.csv").string(), data);
    write_truth_json((dir / "truth.json").string(), truth);
  });
  return 0;
}

int cmd_fit(const FitFlags& flags) {
  PanelDataset data = validate_dataset(read_data_csv(flags.data_path));
  Hyperparameters hyper = build_hyper(flags, data);
  fs::create_directories(flags.out_dir);
  std::string checkpoint_path = (fs::path(flags.out_dir) / "checkpoint.json").string();
  FitResult fit = run_fit(data, hyper, checkpoint_path, flags.resume_path);
  write_archive((fs::path(flags.out_dir) / "archive.jsonl.gz").string(), fit.archive);

  json manifest;
  manifest["fingerprint"] = fit.archive.fingerprint;
  manifest["variant"] = variant_name(hyper.variant);
  manifest["seed"] = hyper.mcmc.seed;
  manifest["iterations"] = hyper.mcmc.iterations;
  manifest["burnin"] = hyper.mcmc.burnin;
  manifest["thinning"] = hyper.mcmc.thinning;
  manifest["retained_draws"] = fit.archive.draws.size();
  manifest["clamped_predictors"] = fit.clamp_count;
  manifest["wall_seconds"] = fit.wall_seconds;
  write_file((fs::path(flags.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  return 0;
}

int cmd_summarize(const std::string& chain_path, const std::string& truth_path,
                  const std::string& data_path, const std::string& out_dir,
                  int restarts, double waic_fraction) {
  ChainArchive archive = read_archive(chain_path);
  fs::create_directories(out_dir);
  SummaryOutputs s = summarize_archive(archive, restarts, waic_fraction, out_dir);

  json report;
  report["fingerprint"] = archive.fingerprint;
  report["variant"] = variant_name(archive.variant);
  report["waic"] = {{"waic", s.waic_result.waic},
                    {"lppd", s.waic_result.lppd},
                    {"p_waic", s.waic_result.p_waic}};
  std::vector<int> sizes = cluster_sizes(s.partition);
  report["n_clusters"] = sizes.size();
  report["cluster_sizes"] = sizes;
  report["partition"] = s.partition;
  if (!truth_path.empty()) {
    ScenarioTruth truth = read_truth_json(truth_path);
    PanelDataset data;
    bool have_data = !data_path.empty();
    if (have_data) data = validate_dataset(read_data_csv(data_path));
    report["metrics"] = metrics_report(archive, truth, have_data ? &data : nullptr,
                                       s.partition);
  }
  write_file((fs::path(out_dir) / "report.json").string(), report.dump(2) + "\n");
  return 0;
}

int cmd_sweep(const FitFlags& flags, const std::string& grid_text, int restarts,
              double waic_fraction) {
  GridSpec grid = parse_grid(grid_text);
  PanelDataset data = validate_dataset(read_data_csv(flags.data_path));
  fs::create_directories(flags.out_dir);

  int n_cells = static_cast<int>(grid.alpha0.size() * grid.alpha.size());
  std::vector<std::string> rows(n_cells);
  run_parallel(n_cells, [&](int k) {
    double a0 = grid.alpha0[k / grid.alpha.size()];
    double a = grid.alpha[k % grid.alpha.size()];
    Hyperparameters hyper = build_hyper(flags, data);
    hyper.alpha0 = a0;
    hyper.alpha = a;
    FitResult fit = run_fit(data, hyper, "", "");
    SummaryOutputs s = summarize_archive(fit.archive, restarts, waic_fraction, "");
    std::vector<int> sizes = cluster_sizes(s.partition);
    std::ostringstream size_text;
    for (std::size_t q = 0; q < sizes.size(); ++q) {
      if (q) size_text << ';';
      size_text << sizes[q];
    }
    std::ostringstream row;
    row << fmt_double(a0) << ',' << fmt_double(a) << ',' << sizes.size() << ','
        << size_text.str() << ',' << fmt_double(s.waic_result.waic) << '\n';
    rows[k] = row.str();
  });

  std::string csv = "alpha0,alpha,n_clusters,cluster_sizes,waic\n";
  for (const std::string& r : rows) csv += r;
  write_file((fs::path(flags.out_dir) / "sweep.csv").string(), csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal random-partition clustering of binary trajectories"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate simulation-study datasets");
  int scenario = 1, replicates = 1;
  std::uint64_t sim_seed = 1;
  double mu_eta = 0.0;
  std::string sim_out = "sim";
  sim->add_option("--scenario", scenario)->check(CLI::IsMember({1, 2}))->required();
  sim->add_option("--seed", sim_seed);
  auto* mu_opt = sim->add_option("--mu-eta", mu_eta);
  sim->add_option("--out", sim_out);
  sim->add_option("--replicates", replicates)->check(CLI::PositiveNumber);

  // fit
  auto* fit = app.add_subcommand("fit", "Run one MCMC chain");
  FitFlags ff;
  fit->add_option("--data", ff.data_path)->required();
  fit->add_option("--variant", ff.variant)->check(CLI::IsMember({"htrpm", "trpm", "hdp", "dp"}));
  fit->add_option("--iters", ff.iters);
  fit->add_option("--burnin", ff.burnin);
  fit->add_option("--thin", ff.thin);
  auto* seed_opt = fit->add_option("--seed", ff.seed);
  fit->add_option("--config", ff.config_path);
  fit->add_option("--checkpoint-every", ff.checkpoint_every);
  fit->add_option("--resume", ff.resume_path);
  fit->add_option("--alpha", ff.alpha);
  fit->add_option("--alpha0", ff.alpha0);
  fit->add_option("--q", ff.q);
  fit->add_option("--out", ff.out_dir)->required();

  // summarize
  auto* sum = app.add_subcommand("summarize", "Posterior summaries for a chain, or a grid sweep");
  std::string chain_path, truth_path, sum_data, sum_out = "summary", grid_text;
  int restarts = 16;
  double waic_fraction = 0.10;
  FitFlags sf;
  sum->add_option("--chain", chain_path);
  sum->add_option("--truth", truth_path);
  sum->add_option("--data", sf.data_path);
  sum->add_option("--out", sum_out);
  sum->add_option("--restarts", restarts)->check(CLI::PositiveNumber);
  sum->add_option("--waic-fraction", waic_fraction);
  sum->add_option("--grid", grid_text);
  sum->add_option("--variant", sf.variant)->check(CLI::IsMember({"htrpm", "trpm", "hdp", "dp"}));
  sum->add_option("--iters", sf.iters);
  sum->add_option("--burnin", sf.burnin);
  sum->add_option("--thin", sf.thin);
  auto* sum_seed_opt = sum->add_option("--seed", sf.seed);
  sum->add_option("--config", sf.config_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      return cmd_simulate(scenario, sim_seed, mu_eta, mu_opt->count() > 0, sim_out,
                          replicates);
    }
    if (fit->parsed()) {
      ff.seed_set = seed_opt->count() > 0;
      return cmd_fit(ff);
    }
    if (!grid_text.empty()) {
      if (sf.data_path.empty()) throw std::invalid_argument("--grid requires --data");
      sf.seed_set = sum_seed_opt->count() > 0;
      sf.out_dir = sum_out;
      return cmd_sweep(sf, grid_text, restarts, waic_fraction);
    }
    if (chain_path.empty()) {
      throw std::invalid_argument("summarize needs --chain (or --grid with --data)");
    }
    return cmd_summarize(chain_path, truth_path, sf.data_path, sum_out, restarts,
                         waic_fraction);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 1;
  }
}
