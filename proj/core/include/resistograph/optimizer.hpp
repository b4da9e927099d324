#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "resistograph/objective.hpp"
#include "resistograph/weight_model.hpp"

namespace resistograph {

struct OptimConfig {
  double learning_rate = 0.1;
  double gamma = 0.9;
  int iterations = 5000;
  Floors floors = Floors::synthetic();
  std::uint64_t seed = 0;
  double rmsprop_eps = 1e-8;
  /// Theta snapshots are stored every this many iterations (and at the end).
  int snapshot_every = 100;

  /// Throws DataError unless 0 < gamma < 1, learning_rate > 0, floors > 0.
  void validate() const;
};

struct TraceRecord {
  int iter = 0;
  double loss = 0.0;
  double rel_loss = 0.0;  ///< loss / loss at iteration 0
  double grad_norm = 0.0;
  double wall_ms = 0.0;
  /// Nelder-Mead only: cumulative objective evaluations.
  long evaluations = 0;
};

struct ThetaSnapshot {
  int iter = 0;
  Eigen::VectorXd theta;
};

struct FitState {
  Eigen::VectorXd theta;
  Eigen::VectorXd sq_grad_avg;
  int iter = 0;
  std::vector<TraceRecord> trace;
  std::vector<ThetaSnapshot> snapshots;
  /// Projection clamps applied so far.
  long projections = 0;
  long evaluations = 0;
  long restarts = 0;
};

/// Called after each trace record is appended.
using FitObserver = std::function<void(const FitState&)>;

/// v <- gamma v + (1 - gamma) g^2;  theta <- max(floor, theta - lr g / (sqrt(v) + eps)).
/// Throws NumericError on a non-finite gradient.
FitState rmsprop_step(FitState state, const Eigen::VectorXd& grad, const OptimConfig& cfg,
                      const Eigen::VectorXd& floors);

/// Componentwise max(floor, theta); returns the number of clamped coordinates.
int project_to_floors(Eigen::VectorXd& theta, const Eigen::VectorXd& floors);

/// Projected gradient descent with RMSProp steps. Runs exactly cfg.iterations
/// steps from theta0; the trace has one record per visited iterate,
/// including the final one.
FitState fit(ResistanceObjective& objective, const Eigen::VectorXd& theta0,
             const OptimConfig& cfg, const FitObserver& observer = {});

/// Columns: iter, loss, rel_loss, grad_norm, wall_ms (plus evaluations when
/// `with_evaluations`).
void write_trace_csv(const FitState& state, const std::filesystem::path& path,
                     bool with_evaluations = false);

enum class InitMode { synthetic, real };

/// beta = 1; beta_opt, beta_sd uniform on {1..10}; alpha uniform on {1..100}
/// (synthetic) or {1..10} (real).
ThetaVector init_theta(const ModelSpec& spec, InitMode mode, std::mt19937_64& rng);

}  // namespace resistograph
