#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "resistograph/grid_graph.hpp"
#include "resistograph/landscape.hpp"
#include "resistograph/objective.hpp"
#include "resistograph/optimizer.hpp"
#include "resistograph/resistance.hpp"
#include "resistograph/weight_model.hpp"

namespace resistograph {

/// Deterministic sub-stream seed from a master seed and a list of tags.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags);

struct SyntheticLandscapeOptions {
  int rows = 20;
  int cols = 20;
  int landcover_types = 5;
  /// Gaussian bumps summed into the raw elevation surface.
  int elevation_bumps = 6;
  /// Voronoi seeds per landcover type.
  int patches_per_type = 3;
};

/// Smooth random elevation (scaled to [0, 10]) and a patchy categorical
/// landcover layer with exactly one type per cell.
LandscapeGrid make_synthetic_landscape(const SyntheticLandscapeOptions& options,
                                       std::mt19937_64& rng);

struct SyntheticScenario {
  Eigen::VectorXd theta_true;
  SampleSet samples;
  /// Noise standard deviation as a multiple of mu.
  double relative_noise = 0.0;
  double noise_sigma = 0.0;
  /// Mean off-diagonal entry of R_S(theta_true), before noise.
  double mu = 0.0;
  std::uint64_t seed = 0;
  ResistanceSurface true_surface;
};

/// Computes R_S(theta_true) and mu, and fixes sigma = relative_noise * mu.
SyntheticScenario make_scenario(const EdgeGraph& graph, const ModelSpec& spec,
                                Eigen::VectorXd theta_true, SampleSet samples,
                                double relative_noise, std::uint64_t seed,
                                const SolverOptions& solver = {});

/// F_lk = R_lk + z with one N(0, sigma) draw per unordered pair, mirrored,
/// clamped at zero, zero diagonal. Noise stream is seeded by scenario.seed.
DissimilarityMatrix simulate_F(const SyntheticScenario& scenario);
DissimilarityMatrix simulate_F(const ResistanceSurface& truth, double sigma, std::mt19937_64& rng);

/// N distinct nodes, uniform without replacement. The draw is a partial
/// Fisher-Yates shuffle, so for a fixed rng state smaller N gives a prefix of
/// larger N.
SampleSet sample_nodes(const EdgeGraph& graph, int count, std::mt19937_64& rng,
                       SampleLabel label = SampleLabel::all);

/// ||theta - theta_true|| / ||theta_true|| with alpha coordinates for
/// landcover types present at fewer than `presence_threshold` of nodes removed.
double relative_parameter_error(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_true,
                                const EdgeGraph& graph, const ModelSpec& spec,
                                double presence_threshold = 0.01);

struct TrainTestRow {
  int iter = 0;
  double train_loss = 0.0;
  double train_rel = 0.0;
  double test_loss = 0.0;        ///< against truth plus fresh test noise
  double test_rel = 0.0;
  double test_loss_clean = 0.0;  ///< against noiseless truth
  double test_clean_rel = 0.0;
};

struct TrainTestReport {
  std::vector<TrainTestRow> rows;
  Eigen::VectorXd theta_true;
  Eigen::VectorXd theta_final;
  double relative_parameter_error = 0.0;
  double mu_train = 0.0;
  double mu_test = 0.0;

  /// (final - running minimum) / running minimum of the selected column.
  double final_excess_over_min(bool clean) const;
  void write_csv(const std::filesystem::path& path) const;
};

struct TrainTestOptions {
  int train_size = 25;
  int test_size = 25;
  double relative_noise = 0.2;
  /// Test loss is evaluated every this many iterations (and at the end).
  int eval_every = 10;
  std::uint64_t seed = 0;
  InitMode init = InitMode::synthetic;
};

/// Fits on S_train and tracks the loss of the current iterate on a disjoint
/// S_test. theta_true and the initial theta are drawn from `options.seed`.
TrainTestReport train_test_experiment(const EdgeGraph& graph, const ModelSpec& spec,
                                      const TrainTestOptions& options, const OptimConfig& cfg,
                                      const ObjectiveOptions& objective = {});

enum class FitMethod { rmsprop, nelder_mead, nelder_mead_unprojected };
std::string_view to_string(FitMethod method) noexcept;
FitMethod parse_fit_method(std::string_view name);

struct RecoveryRun {
  FitState state;
  SyntheticScenario scenario;
  Eigen::VectorXd theta_init;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double relative_parameter_error = 0.0;
};

/// One synthetic recovery job: theta_true and theta_0 from `theta_seed`,
/// N samples from `sample_seed`, noise from `noise_seed`.
struct RecoveryJob {
  int sample_size = 50;
  double relative_noise = 0.0;
  std::uint64_t theta_seed = 0;
  std::uint64_t sample_seed = 0;
  std::uint64_t noise_seed = 0;
  FitMethod method = FitMethod::rmsprop;
};

RecoveryRun run_recovery(const EdgeGraph& graph, const ModelSpec& spec, const RecoveryJob& job,
                         const OptimConfig& cfg, const ObjectiveOptions& objective = {});

struct SweepSpec {
  std::vector<int> sample_sizes{10, 25, 50};
  std::vector<double> relative_noise{0.0, 0.05, 0.2};
  int seeds = 5;
  std::uint64_t master_seed = 0;
  FitMethod method = FitMethod::rmsprop;
};

struct SweepCell {
  int sample_size = 0;
  double relative_noise = 0.0;
  int seed_index = 0;
  std::uint64_t theta_seed = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double relative_parameter_error = 0.0;
  double wall_ms = 0.0;
  FitState state;
};

/// Seeds for cell (N, sigma, s): theta and samples from (master, s), noise
/// from (master, s, N, sigma index). Cells with the same seed index share
/// theta_true and theta_0, and their sample sets are nested in N.
RecoveryJob sweep_job(const SweepSpec& spec, int size_index, int noise_index, int seed_index);

/// Runs every (N, sigma, seed) cell; cells run in parallel, one thread each.
std::vector<SweepCell> run_sweep(const EdgeGraph& graph, const ModelSpec& spec,
                                 const SweepSpec& sweep, const OptimConfig& cfg,
                                 const ObjectiveOptions& objective = {}, Parallelism par = {});

/// Median relative parameter error per (N, sigma) over seeds.
double median(std::vector<double> values);

}  // namespace resistograph
