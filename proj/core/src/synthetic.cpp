#include "resistograph/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "resistograph/error.hpp"
#include "resistograph/nelder_mead.hpp"

namespace resistograph {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

LandscapeGrid make_synthetic_landscape(const SyntheticLandscapeOptions& options,
                                       std::mt19937_64& rng) {
  if (options.rows < 1 || options.cols < 1 || options.rows * options.cols < 2) {
    throw DataError("synthetic landscape needs at least 2 cells");
  }
  if (options.landcover_types < 0) throw DataError("landcover_types must be nonnegative");

  LandscapeGrid grid;
  grid.rows = options.rows;
  grid.cols = options.cols;
  grid.cellsize = 1.0;
  const int cells = grid.num_cells();
  grid.mask.assign(static_cast<std::size_t>(cells), 1);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double extent = std::max(options.rows, options.cols);

  struct Bump {
    double r, c, amplitude, width;
  };
  std::vector<Bump> bumps;
  for (int b = 0; b < std::max(options.elevation_bumps, 1); ++b) {
    bumps.push_back({unit(rng) * options.rows, unit(rng) * options.cols, 2.0 * unit(rng) - 1.0,
                     (0.15 + 0.25 * unit(rng)) * extent});
  }
  std::vector<double> raw(static_cast<std::size_t>(cells), 0.0);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      double z = 0.0;
      for (const Bump& b : bumps) {
        const double dr = r + 0.5 - b.r, dc = c + 0.5 - b.c;
        z += b.amplitude * std::exp(-(dr * dr + dc * dc) / (2.0 * b.width * b.width));
      }
      raw[static_cast<std::size_t>(grid.cell_index(r, c))] = z;
    }
  }
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double low = *lo, span = *hi - *lo;
  for (double& z : raw) z = span > 0.0 ? 10.0 * (z - low) / span : 0.0;
  grid.elevation = std::move(raw);

  const int q = options.landcover_types;
  grid.landcover_types = q;
  if (q > 0) {
    struct Site {
      double r, c;
      int type;
    };
    std::vector<Site> sites;
    const int per_type = std::max(options.patches_per_type, 1);
    for (int i = 0; i < q * per_type; ++i) {
      sites.push_back({unit(rng) * options.rows, unit(rng) * options.cols, i % q});
    }
    grid.presence.assign(static_cast<std::size_t>(cells) * q, 0);
    for (int r = 0; r < grid.rows; ++r) {
      for (int c = 0; c < grid.cols; ++c) {
        double best = std::numeric_limits<double>::infinity();
        int type = 0;
        for (const Site& s : sites) {
          const double dr = r + 0.5 - s.r, dc = c + 0.5 - s.c;
          const double d = dr * dr + dc * dc;
          if (d < best) {
            best = d;
            type = s.type;
          }
        }
        grid.presence[static_cast<std::size_t>(grid.cell_index(r, c)) * q + type] = 1;
      }
    }
    for (int t = 0; t < q; ++t) grid.landcover_names.push_back("lc" + std::to_string(t));
  }
  return grid;
}

SyntheticScenario make_scenario(const EdgeGraph& graph, const ModelSpec& spec,
                                Eigen::VectorXd theta_true, SampleSet samples,
                                double relative_noise, std::uint64_t seed,
                                const SolverOptions& solver) {
  if (!(relative_noise >= 0.0)) throw DataError("noise level must be nonnegative");
  SyntheticScenario sc;
  const WeightEvaluation eval = evaluate_weights(spec, graph, theta_true, false);
  sc.true_surface = resistance_surface(graph, eval.weights, samples, solver);
  sc.theta_true = std::move(theta_true);
  sc.samples = std::move(samples);
  sc.relative_noise = relative_noise;
  sc.mu = sc.true_surface.mean_off_diagonal();
  sc.noise_sigma = relative_noise * sc.mu;
  sc.seed = seed;
  return sc;
}

DissimilarityMatrix simulate_F(const ResistanceSurface& truth, double sigma,
                               std::mt19937_64& rng) {
  const Eigen::Index s = truth.size();
  DissimilarityMatrix F;
  F.values = Eigen::MatrixXd::Zero(s, s);
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
  for (Eigen::Index a = 0; a < s; ++a) {
    for (Eigen::Index b = a + 1; b < s; ++b) {
      const double z = sigma > 0.0 ? noise(rng) : 0.0;
      const double v = std::max(0.0, truth(a, b) + z);
      F.values(a, b) = v;
      F.values(b, a) = v;
    }
  }
  return F;
}

DissimilarityMatrix simulate_F(const SyntheticScenario& scenario) {
  std::mt19937_64 rng(scenario.seed);
  return simulate_F(scenario.true_surface, scenario.noise_sigma, rng);
}

SampleSet sample_nodes(const EdgeGraph& graph, int count, std::mt19937_64& rng,
                       SampleLabel label) {
  const int n = graph.num_nodes();
  if (count < 0 || count > n) {
    throw DataError("cannot sample " + std::to_string(count) + " of " + std::to_string(n) +
                    " nodes");
  }
  std::vector<std::int32_t> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  SampleSet out;
  out.label = label;
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
    out.nodes.push_back(NodeId{perm[static_cast<std::size_t>(i)]});
  }
  return out;
}

double relative_parameter_error(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_true,
                                const EdgeGraph& graph, const ModelSpec& spec,
                                double presence_threshold) {
  if (theta.size() != theta_true.size()) throw DataError("parameter vectors differ in length");
  std::vector<Eigen::Index> keep;
  const Eigen::Index alpha_at = spec.uses_elevation() ? 3 : 0;
  for (Eigen::Index h = 0; h < theta.size(); ++h) {
    if (spec.uses_landcover() && spec.kind != ModelKind::per_edge && h >= alpha_at) {
      const Eigen::Index t = h - alpha_at;
      const Eigen::VectorXd& presence = graph.landcover_presence();
      if (t < presence.size() && presence[t] < presence_threshold) continue;
    }
    keep.push_back(h);
  }
  double num = 0.0, den = 0.0;
  for (Eigen::Index h : keep) {
    num += (theta[h] - theta_true[h]) * (theta[h] - theta_true[h]);
    den += theta_true[h] * theta_true[h];
  }
  if (den == 0.0) throw DataError("true parameter vector is zero after masking");
  return std::sqrt(num / den);
}

double TrainTestReport::final_excess_over_min(bool clean) const {
  if (rows.empty()) return 0.0;
  double lowest = std::numeric_limits<double>::infinity();
  for (const TrainTestRow& r : rows) lowest = std::min(lowest, clean ? r.test_loss_clean : r.test_loss);
  const double last = clean ? rows.back().test_loss_clean : rows.back().test_loss;
  if (lowest <= 0.0) return last > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return (last - lowest) / lowest;
}

void TrainTestReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  out << "iter,train_loss,train_rel,test_loss,test_rel,test_loss_clean,test_clean_rel\n";
  for (const TrainTestRow& r : rows) {
    out << r.iter << ',' << r.train_loss << ',' << r.train_rel << ',' << r.test_loss << ','
        << r.test_rel << ',' << r.test_loss_clean << ',' << r.test_clean_rel << '\n';
  }
}

TrainTestReport train_test_experiment(const EdgeGraph& graph, const ModelSpec& spec,
                                      const TrainTestOptions& options, const OptimConfig& cfg,
                                      const ObjectiveOptions& objective_options) {
  if (options.train_size < 2 || options.test_size < 2) {
    throw DataError("train and test sets need at least 2 nodes each");
  }
  std::mt19937_64 theta_rng(derive_seed(options.seed, {1}));
  const Eigen::VectorXd theta_true = init_theta(spec, options.init, theta_rng).pack(spec);
  const Eigen::VectorXd theta0 = init_theta(spec, options.init, theta_rng).pack(spec);

  std::mt19937_64 sample_rng(derive_seed(options.seed, {2}));
  const SampleSet all = sample_nodes(graph, options.train_size + options.test_size, sample_rng);
  SampleSet train{{all.nodes.begin(), all.nodes.begin() + options.train_size}, SampleLabel::train};
  SampleSet test{{all.nodes.begin() + options.train_size, all.nodes.end()}, SampleLabel::test};
  for (NodeId v : train.nodes) {
    if (std::find(test.nodes.begin(), test.nodes.end(), v) != test.nodes.end()) {
      throw DataError("train and test sets overlap");
    }
  }

  const SyntheticScenario train_sc =
      make_scenario(graph, spec, theta_true, train, options.relative_noise,
                    derive_seed(options.seed, {3}), objective_options.solver);
  const SyntheticScenario test_sc =
      make_scenario(graph, spec, theta_true, test, options.relative_noise,
                    derive_seed(options.seed, {4}), objective_options.solver);
  DissimilarityMatrix clean;
  clean.values = test_sc.true_surface.values;

  ResistanceObjective train_obj(graph, train, simulate_F(train_sc), spec, objective_options);
  ResistanceObjective test_obj(graph, test, simulate_F(test_sc), spec, objective_options);

  TrainTestReport report;
  report.theta_true = theta_true;
  report.mu_train = train_sc.mu;
  report.mu_test = test_sc.mu;

  const int every = std::max(options.eval_every, 1);
  auto observer = [&](const FitState& state) {
    const TraceRecord& rec = state.trace.back();
    if (rec.iter % every != 0 && rec.iter != cfg.iterations) return;
    const ResistanceSurface surface = test_obj.surface(state.theta);
    TrainTestRow row;
    row.iter = rec.iter;
    row.train_loss = rec.loss;
    row.train_rel = rec.rel_loss;
    row.test_loss = frobenius_loss(surface, test_obj.target());
    row.test_loss_clean = frobenius_loss(surface, clean);
    if (!report.rows.empty()) {
      const TrainTestRow& first = report.rows.front();
      row.test_rel = first.test_loss > 0.0 ? row.test_loss / first.test_loss : 0.0;
      row.test_clean_rel = first.test_loss_clean > 0.0 ? row.test_loss_clean / first.test_loss_clean : 0.0;
    } else {
      row.test_rel = 1.0;
      row.test_clean_rel = 1.0;
    }
    report.rows.push_back(row);
  };

  const FitState state = fit(train_obj, theta0, cfg, observer);
  report.theta_final = state.theta;
  report.relative_parameter_error = relative_parameter_error(state.theta, theta_true, graph, spec);
  return report;
}

std::string_view to_string(FitMethod method) noexcept {
  switch (method) {
    case FitMethod::rmsprop:
      return "rmsprop";
    case FitMethod::nelder_mead:
      return "nelder-mead";
    case FitMethod::nelder_mead_unprojected:
      return "nelder-mead-unprojected";
  }
  return "unknown";
}

FitMethod parse_fit_method(std::string_view name) {
  if (name == "rmsprop") return FitMethod::rmsprop;
  if (name == "nelder-mead") return FitMethod::nelder_mead;
  if (name == "nelder-mead-unprojected") return FitMethod::nelder_mead_unprojected;
  throw ParseError("unknown optimizer '" + std::string(name) + "'");
}

RecoveryRun run_recovery(const EdgeGraph& graph, const ModelSpec& spec, const RecoveryJob& job,
                         const OptimConfig& cfg, const ObjectiveOptions& objective_options) {
  std::mt19937_64 theta_rng(job.theta_seed);
  Eigen::VectorXd theta_true = init_theta(spec, InitMode::synthetic, theta_rng).pack(spec);
  RecoveryRun run;
  run.theta_init = init_theta(spec, InitMode::synthetic, theta_rng).pack(spec);

  std::mt19937_64 sample_rng(job.sample_seed);
  SampleSet samples = sample_nodes(graph, job.sample_size, sample_rng);
  run.scenario = make_scenario(graph, spec, std::move(theta_true), std::move(samples),
                               job.relative_noise, job.noise_seed, objective_options.solver);

  ResistanceObjective objective(graph, run.scenario.samples, simulate_F(run.scenario), spec,
                                objective_options);
  switch (job.method) {
    case FitMethod::rmsprop:
      run.state = fit(objective, run.theta_init, cfg);
      run.initial_loss = run.state.trace.front().loss;
      break;
    case FitMethod::nelder_mead:
    case FitMethod::nelder_mead_unprojected: {
      NelderMeadOptions nm;
      nm.projected = job.method == FitMethod::nelder_mead;
      run.initial_loss = objective.loss(run.theta_init);
      run.state = nelder_mead_fit(objective, run.theta_init, cfg, nm);
      break;
    }
  }
  run.final_loss = run.state.trace.back().loss;
  run.relative_parameter_error =
      relative_parameter_error(run.state.theta, run.scenario.theta_true, graph, spec);
  return run;
}

RecoveryJob sweep_job(const SweepSpec& spec, int size_index, int noise_index, int seed_index) {
  RecoveryJob job;
  job.sample_size = spec.sample_sizes.at(static_cast<std::size_t>(size_index));
  job.relative_noise = spec.relative_noise.at(static_cast<std::size_t>(noise_index));
  const auto s = static_cast<std::uint64_t>(seed_index);
  job.theta_seed = derive_seed(spec.master_seed, {1, s});
  job.sample_seed = derive_seed(spec.master_seed, {2, s});
  job.noise_seed = derive_seed(spec.master_seed, {3, s, static_cast<std::uint64_t>(job.sample_size),
                                                  static_cast<std::uint64_t>(noise_index)});
  job.method = spec.method;
  return job;
}

std::vector<SweepCell> run_sweep(const EdgeGraph& graph, const ModelSpec& spec,
                                 const SweepSpec& sweep, const OptimConfig& cfg,
                                 const ObjectiveOptions& objective_options, Parallelism par) {
  struct Index {
    int size, noise, seed;
  };
  std::vector<Index> cells;
  for (int i = 0; i < static_cast<int>(sweep.sample_sizes.size()); ++i) {
    for (int j = 0; j < static_cast<int>(sweep.relative_noise.size()); ++j) {
      for (int s = 0; s < sweep.seeds; ++s) cells.push_back({i, j, s});
    }
  }
  std::vector<SweepCell> out(cells.size());
  ObjectiveOptions inner = objective_options;
  if (par.resolved() > 1) inner.parallelism.threads = 1;

  parallel_for(cells.size(), par, [&](std::size_t c) {
    const Index& idx = cells[c];
    const RecoveryJob job = sweep_job(sweep, idx.size, idx.noise, idx.seed);
    const auto start = std::chrono::steady_clock::now();
    RecoveryRun run = run_recovery(graph, spec, job, cfg, inner);
    SweepCell& cell = out[c];
    cell.sample_size = job.sample_size;
    cell.relative_noise = job.relative_noise;
    cell.seed_index = idx.seed;
    cell.theta_seed = job.theta_seed;
    cell.initial_loss = run.initial_loss;
    cell.final_loss = run.final_loss;
    cell.relative_parameter_error = run.relative_parameter_error;
    cell.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    cell.state = std::move(run.state);
  });
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace resistograph
