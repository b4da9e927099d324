#include "resistograph/cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "resistograph/error.hpp"
#include "resistograph/grid_graph.hpp"
#include "resistograph/ingest.hpp"
#include "resistograph/log.hpp"
#include "resistograph/metrics.hpp"
#include "resistograph/nelder_mead.hpp"
#include "resistograph/objective.hpp"
#include "resistograph/optimizer.hpp"
#include "resistograph/raster.hpp"
#include "resistograph/resistance.hpp"
#include "resistograph/synthetic.hpp"
#include "resistograph/version.hpp"
#include "resistograph/weight_model.hpp"

namespace resistograph::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------- outputs

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw DataError("cannot create output dir " + dir_.string());
  }

  fs::path path(const std::string& name) {
    files_.push_back(name);
    const fs::path p = dir_ / name;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
  }

  std::ofstream open(const std::string& name) {
    const fs::path p = path(name);
    std::ofstream out(p);
    if (!out) throw DataError("cannot write " + p.string());
    out.precision(17);
    return out;
  }

  void json_file(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }

  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

ObjectiveOptions objective_options(const RunConfig& cfg) {
  ObjectiveOptions o;
  o.solver = cfg.solver;
  o.parallelism.threads = cfg.threads;
  o.warm_start = cfg.warm_start;
  return o;
}

void write_theta_csv(std::ofstream out, const Eigen::VectorXd& theta,
                     const std::vector<std::string>& names) {
  out << "parameter,value\n";
  for (Eigen::Index h = 0; h < theta.size(); ++h) out << names[static_cast<std::size_t>(h)] << ',' << theta[h] << '\n';
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// ---------------------------------------------------------------- problems

struct Problem {
  EdgeGraph graph;
  ModelSpec spec;
  SampleSet samples;
  DissimilarityMatrix target;
  std::vector<std::string> population_ids;
  std::optional<SyntheticScenario> scenario;
  std::optional<RecoveryJob> job;
  std::optional<LandscapeGrid> grid;
};

LandscapeGrid load_landscape(const RunConfig& cfg) {
  std::optional<CodeTable> codes;
  if (!cfg.data.codes.empty()) codes = CodeTable::load(cfg.data.codes);
  std::optional<RasterLayer> elevation, landcover;
  if (!cfg.data.elevation.empty()) elevation = load_ascii_grid(cfg.data.elevation);
  if (!cfg.data.landcover.empty()) landcover = load_ascii_grid(cfg.data.landcover, &*codes);
  double cellsize = cfg.data.cellsize;
  if (cellsize == 0.0) {
    if (elevation) cellsize = std::max(cellsize, elevation->cellsize);
    if (landcover) cellsize = std::max(cellsize, landcover->cellsize);
  }
  return build_landscape(elevation ? &*elevation : nullptr, landcover ? &*landcover : nullptr,
                         cellsize, codes ? &*codes : nullptr);
}

ModelSpec model_for(const RunConfig& cfg, const EdgeGraph& graph) {
  ModelSpec spec = cfg.model;
  spec.q = graph.landcover_dim();
  spec.check_compatible(graph);
  return spec;
}

Problem real_problem(const RunConfig& cfg) {
  Problem p;
  p.grid = load_landscape(cfg);
  p.graph = build_grid_graph(*p.grid);
  p.spec = model_for(cfg, p.graph);
  const FstTable table = load_fst(cfg.data.fst, !cfg.data.unbounded_dissimilarity);
  SnappedSamples snapped = snap_populations(table, p.graph);
  p.samples = std::move(snapped.samples);
  p.target = table.F;
  for (const Population& pop : table.populations) p.population_ids.push_back(pop.id);
  log::info("graph: " + std::to_string(p.graph.num_nodes()) + " nodes, " +
            std::to_string(p.graph.num_edges()) + " edges, " + std::to_string(p.samples.size()) +
            " populations");
  return p;
}

SweepSpec single_cell(const RunConfig& cfg) {
  SweepSpec s;
  s.sample_sizes = {cfg.synthetic.sample_size};
  s.relative_noise = {cfg.synthetic.relative_noise};
  s.seeds = 1;
  s.master_seed = cfg.seed;
  s.method = cfg.optimizer;
  return s;
}

LandscapeGrid synthetic_landscape(const RunConfig& cfg) {
  std::mt19937_64 rng(derive_seed(cfg.seed, {10}));
  return make_synthetic_landscape(cfg.synthetic.landscape, rng);
}

/// The synthetic scenario a `fit` with the same config would use.
Problem synthetic_problem(const RunConfig& cfg) {
  Problem p;
  p.grid = synthetic_landscape(cfg);
  p.graph = build_grid_graph(*p.grid);
  p.spec = model_for(cfg, p.graph);
  const RecoveryJob job = sweep_job(single_cell(cfg), 0, 0, 0);
  std::mt19937_64 theta_rng(job.theta_seed);
  Eigen::VectorXd theta_true = init_theta(p.spec, InitMode::synthetic, theta_rng).pack(p.spec);
  std::mt19937_64 sample_rng(job.sample_seed);
  SampleSet samples = sample_nodes(p.graph, job.sample_size, sample_rng);
  p.scenario = make_scenario(p.graph, p.spec, std::move(theta_true), std::move(samples),
                             job.relative_noise, job.noise_seed, cfg.solver);
  p.samples = p.scenario->samples;
  p.target = simulate_F(*p.scenario);
  p.job = job;
  for (NodeId v : p.samples.nodes) p.population_ids.push_back("n" + std::to_string(v.index));
  return p;
}

Problem load_problem(const RunConfig& cfg) {
  return cfg.real_data() ? real_problem(cfg) : synthetic_problem(cfg);
}

Eigen::VectorXd load_theta(const fs::path& path, const ModelSpec& spec,
                           const std::vector<std::string>& names) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::map<std::string, double> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || lineno == 1) continue;
    std::stringstream ss(line);
    std::string name, value;
    std::getline(ss, name, ',');
    std::getline(ss, value, ',');
    try {
      std::size_t used = 0;
      values[name] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad parameter value");
    }
  }
  Eigen::VectorXd theta(static_cast<Eigen::Index>(names.size()));
  for (std::size_t h = 0; h < names.size(); ++h) {
    const auto it = values.find(names[h]);
    if (it == values.end()) throw DataError(path.string() + ": missing parameter " + names[h]);
    theta[static_cast<Eigen::Index>(h)] = it->second;
  }
  (void)spec;
  return theta;
}

// ---------------------------------------------------------------- reports

json surface_metrics(const RunConfig& cfg, const ResistanceSurface& surface,
                     const DissimilarityMatrix& target) {
  json m;
  m["loss"] = frobenius_loss(surface, target);
  try {
    m["r2"] = r_squared_linear_fit(surface, target, cfg.data.r2_transform);
  } catch (const DataError& e) {
    m["r2"] = nullptr;
    log::warn(std::string("R^2 not reported: ") + e.what());
  }
  return m;
}

void write_fit_outputs(Artifacts& art, const RunConfig& cfg, const Problem& p, const FitState& state,
                       double initial_loss, std::ostream& out) {
  const std::vector<std::string> names = parameter_names(p.spec, p.graph.landcover_names());
  const bool nm = cfg.optimizer != FitMethod::rmsprop;
  write_trace_csv(state, art.path("trace.csv"), nm);
  write_theta_csv(art.open("theta.csv"), state.theta, names);
  const auto table = parameter_table(state.theta, p.spec, p.graph.landcover_presence(),
                                     p.graph.landcover_names(), cfg.table_presence_threshold);
  write_parameter_csv(table, art.path("parameters.csv"));

  ResistanceObjective obj(p.graph, p.samples, p.target, p.spec, objective_options(cfg));
  const ResistanceSurface surface = obj.surface(state.theta);
  write_scatter_csv(surface, p.target, art.path("scatter.csv"));

  json m = surface_metrics(cfg, surface, p.target);
  m["initial_loss"] = initial_loss;
  m["final_loss"] = state.trace.back().loss;
  m["iterations"] = state.iter;
  m["evaluations"] = state.evaluations;
  m["projections"] = state.projections;
  m["optimizer"] = std::string(to_string(cfg.optimizer));
  m["nodes"] = p.graph.num_nodes();
  m["edges"] = p.graph.num_edges();
  m["theta"] = vector_json(state.theta);
  if (p.scenario) {
    write_theta_csv(art.open("theta_true.csv"), p.scenario->theta_true, names);
    m["theta_true"] = vector_json(p.scenario->theta_true);
    m["relative_parameter_error"] = relative_parameter_error(
        state.theta, p.scenario->theta_true, p.graph, p.spec, cfg.error_presence_threshold);
    m["mu"] = p.scenario->mu;
    m["noise_sigma"] = p.scenario->noise_sigma;
  }
  art.json_file("metrics.json", m);

  out << format_parameter_table(table);
  out << "final loss " << std::setprecision(6) << state.trace.back().loss << " (initial "
      << initial_loss << ")";
  if (m["r2"].is_number()) out << ", R^2 " << m["r2"].get<double>();
  if (m.contains("relative_parameter_error")) {
    out << ", relative parameter error " << m["relative_parameter_error"].get<double>();
  }
  out << '\n';
}

// ---------------------------------------------------------------- modes

void run_fit(const RunConfig& cfg, Artifacts& art, std::ostream& out) {
  Problem p = load_problem(cfg);
  FitState state;
  double initial_loss = 0.0;
  if (p.job) {
    RecoveryJob job = *p.job;
    job.method = cfg.optimizer;
    RecoveryRun r = run_recovery(p.graph, p.spec, job, cfg.optim, objective_options(cfg));
    state = std::move(r.state);
    initial_loss = r.initial_loss;
  } else {
    std::mt19937_64 rng(derive_seed(cfg.seed, {1}));
    const Eigen::VectorXd theta0 = init_theta(p.spec, cfg.init_mode(), rng).pack(p.spec);
    ResistanceObjective obj(p.graph, p.samples, p.target, p.spec, objective_options(cfg));
    if (cfg.optimizer == FitMethod::rmsprop) {
      state = fit(obj, theta0, cfg.optim);
      initial_loss = state.trace.front().loss;
    } else {
      NelderMeadOptions nm;
      nm.projected = cfg.optimizer == FitMethod::nelder_mead;
      initial_loss = obj.loss(theta0);
      state = nelder_mead_fit(obj, theta0, cfg.optim, nm);
    }
  }
  write_fit_outputs(art, cfg, p, state, initial_loss, out);
}

void run_simulate(const RunConfig& cfg, Artifacts& art, std::ostream& out) {
  const Problem p = synthetic_problem(cfg);
  const LandscapeGrid& grid = *p.grid;

  RasterLayer elev;
  elev.nrows = grid.rows;
  elev.ncols = grid.cols;
  elev.cellsize = grid.cellsize;
  elev.values = *grid.elevation;
  write_ascii_grid(elev, art.path("elevation.asc"));

  RasterLayer lc = elev;
  lc.kind = LayerKind::categorical;
  for (int cell = 0; cell < grid.num_cells(); ++cell) {
    double code = lc.nodata;
    for (int t = 0; t < grid.landcover_types; ++t) {
      if (grid.present(cell, t)) code = t + 1;
    }
    lc.values[static_cast<std::size_t>(cell)] = code;
  }
  write_ascii_grid(lc, art.path("landcover.asc"));
  {
    std::ofstream codes = art.open("codes.csv");
    codes << "code,name\n";
    for (int t = 0; t < grid.landcover_types; ++t) codes << t + 1 << ",type" << t + 1 << '\n';
  }

  FstTable table;
  table.F = p.target;
  for (std::size_t i = 0; i < p.samples.size(); ++i) {
    const int cell = p.graph.cell_of(p.samples.nodes[i]);
    table.populations.push_back({p.population_ids[i], cell / grid.cols, cell % grid.cols});
  }
  write_fst(table, art.path("dissimilarity.csv"));
  write_theta_csv(art.open("theta_true.csv"), p.scenario->theta_true,
                  parameter_names(p.spec, p.graph.landcover_names()));

  RunConfig refit = cfg;
  refit.mode = Mode::fit;
  refit.output_dir = "fit";
  refit.data.elevation = "elevation.asc";
  refit.data.landcover = "landcover.asc";
  refit.data.codes = "codes.csv";
  refit.data.fst = "dissimilarity.csv";
  refit.data.unbounded_dissimilarity = true;
  refit.data.cellsize = 0.0;
  refit.model.floor_unclassified = false;
  refit.init = "synthetic";
  std::ofstream refit_ini = art.open("fit.ini");
  write_config(refit, refit_ini);

  json m;
  m["nodes"] = p.graph.num_nodes();
  m["edges"] = p.graph.num_edges();
  m["samples"] = p.samples.size();
  m["mu"] = p.scenario->mu;
  m["noise_sigma"] = p.scenario->noise_sigma;
  m["theta_true"] = vector_json(p.scenario->theta_true);
  art.json_file("metrics.json", m);
  out << "simulated " << p.samples.size() << " samples on a " << grid.rows << "x" << grid.cols
      << " grid (mu " << p.scenario->mu << ")\n";
}

void run_sweep_mode(const RunConfig& cfg, Artifacts& art, std::ostream& out) {
  if (cfg.real_data()) throw DataError("sweep runs on synthetic landscapes only");
  const LandscapeGrid grid = synthetic_landscape(cfg);
  const EdgeGraph graph = build_grid_graph(grid);
  const ModelSpec spec = model_for(cfg, graph);
  SweepSpec sweep = cfg.sweep;
  sweep.master_seed = cfg.seed;
  sweep.method = cfg.optimizer;

  ObjectiveOptions inner = objective_options(cfg);
  inner.parallelism.threads = 1;
  const std::vector<SweepCell> cells =
      run_sweep(graph, spec, sweep, cfg.optim, inner, Parallelism{cfg.threads});

  std::ofstream summary = art.open("summary.csv");
  summary << "sample_size,relative_noise,seed_index,theta_seed,initial_loss,final_loss,rel_loss,"
             "relative_parameter_error\n";
  std::map<std::pair<int, double>, std::vector<double>> errors;
  const bool nm = cfg.optimizer != FitMethod::rmsprop;
  for (const SweepCell& c : cells) {
    summary << c.sample_size << ',' << c.relative_noise << ',' << c.seed_index << ','
            << c.theta_seed << ',' << c.initial_loss << ',' << c.final_loss << ','
            << c.final_loss / c.initial_loss << ',' << c.relative_parameter_error << '\n';
    std::ostringstream name;
    name << "cells/N" << c.sample_size << "_noise" << c.relative_noise << "_seed" << c.seed_index
         << ".csv";
    write_trace_csv(c.state, art.path(name.str()), nm);
    errors[{c.sample_size, c.relative_noise}].push_back(c.relative_parameter_error);
  }

  std::ofstream med = art.open("medians.csv");
  med << "sample_size,relative_noise,median_relative_parameter_error\n";
  json m = json::array();
  for (const auto& [key, errs] : errors) {
    const double e = median(errs);
    med << key.first << ',' << key.second << ',' << e << '\n';
    m.push_back({{"sample_size", key.first}, {"relative_noise", key.second}, {"median_error", e}});
    out << "N=" << key.first << " noise=" << key.second << "  median relative error "
        << std::setprecision(4) << e << '\n';
  }
  art.json_file("metrics.json", json{{"cells", cells.size()}, {"medians", m}});
}

void run_evaluate(const RunConfig& cfg, Artifacts& art, std::ostream& out) {
  if (!cfg.theta.empty()) {
    const Problem p = load_problem(cfg);
    const auto names = parameter_names(p.spec, p.graph.landcover_names());
    const Eigen::VectorXd theta = load_theta(cfg.theta, p.spec, names);
    ResistanceObjective obj(p.graph, p.samples, p.target, p.spec, objective_options(cfg));
    const ResistanceSurface surface = obj.surface(theta);
    write_scatter_csv(surface, p.target, art.path("scatter.csv"));
    json m = surface_metrics(cfg, surface, p.target);
    if (p.scenario) {
      m["relative_parameter_error"] = relative_parameter_error(
          theta, p.scenario->theta_true, p.graph, p.spec, cfg.error_presence_threshold);
    }
    art.json_file("metrics.json", m);
    out << "loss " << m["loss"].get<double>();
    if (m["r2"].is_number()) out << ", R^2 " << m["r2"].get<double>();
    out << '\n';
    return;
  }

  if (cfg.real_data()) throw DataError("evaluate on real data needs evaluate.theta");
  const LandscapeGrid grid = synthetic_landscape(cfg);
  const EdgeGraph graph = build_grid_graph(grid);
  const ModelSpec spec = model_for(cfg, graph);
  TrainTestOptions tt;
  tt.train_size = cfg.synthetic.sample_size;
  tt.test_size = cfg.synthetic.test_size;
  tt.relative_noise = cfg.synthetic.relative_noise;
  tt.eval_every = cfg.synthetic.eval_every;
  tt.seed = cfg.seed;
  tt.init = cfg.init_mode();
  const TrainTestReport report = train_test_experiment(graph, spec, tt, cfg.optim, objective_options(cfg));
  report.write_csv(art.path("train_test.csv"));
  json m;
  m["final_train_loss"] = report.rows.back().train_loss;
  m["final_test_loss"] = report.rows.back().test_loss;
  m["final_test_loss_clean"] = report.rows.back().test_loss_clean;
  m["test_excess_over_min"] = report.final_excess_over_min(false);
  m["test_clean_excess_over_min"] = report.final_excess_over_min(true);
  m["relative_parameter_error"] = report.relative_parameter_error;
  m["theta_true"] = vector_json(report.theta_true);
  m["theta"] = vector_json(report.theta_final);
  art.json_file("metrics.json", m);
  out << "train " << tt.train_size << " / test " << tt.test_size << ": final test loss "
      << report.rows.back().test_loss << ", " << std::setprecision(3)
      << 100.0 * report.final_excess_over_min(false) << "% above its minimum\n";
}

EdgeGraph load_edge_list(const fs::path& path, Eigen::VectorXd& weights) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Edge> edges;
  std::vector<double> w;
  int n = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (lineno == 1 && line.rfind("i,", 0) == 0) continue;
    int i = 0, j = 0;
    double weight = 0.0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(line);
    if (!(ss >> i >> c1 >> j >> c2 >> weight) || c1 != ',' || c2 != ',') {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 'i,j,weight'");
    }
    edges.push_back({NodeId{i}, NodeId{j}});
    w.push_back(weight);
    n = std::max({n, i + 1, j + 1});
  }
  EdgeGraph g = EdgeGraph::from_edges(n, std::move(edges));
  weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  return g;
}

void run_resistance(const RunConfig& cfg, Artifacts& art, std::ostream& out) {
  EdgeGraph graph;
  Eigen::VectorXd weights;
  SampleSet samples;
  std::vector<std::string> labels;
  if (!cfg.edges.empty()) {
    graph = load_edge_list(cfg.edges, weights);
    std::vector<int> nodes = cfg.nodes;
    if (nodes.empty()) {
      for (int v = 0; v < graph.num_nodes(); ++v) nodes.push_back(v);
    }
    for (int v : nodes) {
      samples.nodes.push_back(NodeId{v});
      labels.push_back(std::to_string(v));
    }
  } else {
    if (cfg.theta.empty()) throw DataError("resistance needs resistance.edges or evaluate.theta");
    Problem p = load_problem(cfg);
    const Eigen::VectorXd theta =
        load_theta(cfg.theta, p.spec, parameter_names(p.spec, p.graph.landcover_names()));
    weights = evaluate_weights(p.spec, p.graph, theta, false).weights;
    graph = std::move(p.graph);
    samples = std::move(p.samples);
    labels = std::move(p.population_ids);
  }
  samples.validate(graph.num_nodes());
  const ResistanceSurface r =
      resistance_surface(graph, weights, samples, cfg.solver, Parallelism{cfg.threads});

  std::ofstream csv = art.open("resistance.csv");
  csv << "a,b,resistance\n";
  for (Eigen::Index a = 0; a < r.size(); ++a) {
    for (Eigen::Index b = a + 1; b < r.size(); ++b) {
      csv << labels[static_cast<std::size_t>(a)] << ',' << labels[static_cast<std::size_t>(b)] << ','
          << r(a, b) << '\n';
      out << "R(" << labels[static_cast<std::size_t>(a)] << "," << labels[static_cast<std::size_t>(b)]
          << ") = " << std::setprecision(12) << r(a, b) << '\n';
    }
  }
  art.json_file("metrics.json", json{{"samples", r.size()}, {"mean_resistance", r.mean_off_diagonal()}});
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse:
      return kExitParse;
    case ErrorKind::data:
      return kExitData;
    case ErrorKind::solver:
      return kExitSolver;
    case ErrorKind::numeric:
      return kExitNumeric;
  }
  return kExitInternal;
}

}  // namespace

void run(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  Artifacts art(cfg.output_dir);
  {
    std::ofstream resolved = art.open("resolved.ini");
    write_config(cfg, resolved);
  }

  switch (cfg.mode) {
    case Mode::fit:
    case Mode::baseline:
      run_fit(cfg, art, out);
      break;
    case Mode::simulate:
      run_simulate(cfg, art, out);
      break;
    case Mode::sweep:
      run_sweep_mode(cfg, art, out);
      break;
    case Mode::evaluate:
      run_evaluate(cfg, art, out);
      break;
    case Mode::resistance:
      run_resistance(cfg, art, out);
      break;
  }

  json manifest;
  manifest["tool"] = "resistograph";
  manifest["version"] = kVersion;
  manifest["mode"] = std::string(to_string(cfg.mode));
  manifest["seed"] = cfg.seed;
  manifest["threads"] = cfg.threads;
  manifest["compiler"] = __VERSION__;
  manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION);
  manifest["started_utc"] = started;
  manifest["wall_ms"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  std::vector<std::string> files = art.files();
  manifest["outputs"] = files;
  art.json_file("manifest.json", manifest);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  log::init_from_env();
  CLI::App app{"Infer landscape edge weights from genetic dissimilarity"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out_dir;
  const std::pair<Mode, const char*> modes[] = {
      {Mode::fit, "Fit model parameters with projected RMSProp"},
      {Mode::baseline, "Fit with projected Nelder-Mead (or run.optimizer when set to a Nelder-Mead variant)"},
      {Mode::simulate, "Write a synthetic landscape and dissimilarity table"},
      {Mode::sweep, "Synthetic recovery over sample sizes, noise levels and seeds"},
      {Mode::evaluate, "Score parameters, or run a synthetic train/test split"},
      {Mode::resistance, "Print effective resistances between sampled nodes"},
  };
  for (const auto& [mode, help] : modes) {
    CLI::App* sub = app.add_subcommand(std::string(to_string(mode)), help);
    sub->add_option("--config", config_path, "INI run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Master seed (overrides run.seed)");
    sub->add_option("--threads", threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", out_dir, "Output directory (overrides run.output_dir)");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& [mode, help] : modes) {
      if (app.got_subcommand(std::string(to_string(mode)))) cfg.mode = mode;
    }
    if (cfg.mode == Mode::baseline && cfg.optimizer == FitMethod::rmsprop) {
      cfg.optimizer = FitMethod::nelder_mead;
    }
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    run(cfg, out);
    return kExitOk;
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error [internal]: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace resistograph::cli
