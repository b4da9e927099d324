#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "resistograph/grid_graph.hpp"
#include "resistograph/minres.hpp"
#include "resistograph/parallel.hpp"
#include "resistograph/resistance.hpp"
#include "resistograph/weight_model.hpp"

namespace resistograph {

/// Observed pairwise dissimilarities F over a SampleSet, in sample order.
struct DissimilarityMatrix {
  Eigen::MatrixXd values;

  Eigen::Index size() const noexcept { return values.rows(); }
  /// Symmetric, zero diagonal, finite and nonnegative; entries in [0, 1]
  /// when `unit_interval`. Throws DataError.
  void validate(bool unit_interval = false, double symmetry_tol = 0.0) const;
};

struct GradientReport {
  double loss = 0.0;
  Eigen::VectorXd grad;    ///< d loss / d theta, length n_theta
  Eigen::VectorXd grad_w;  ///< d loss / d w, length m
  std::vector<double> solver_residuals;
  ResistanceSurface surface;
};

struct ObjectiveOptions {
  SolverOptions solver;
  Parallelism parallelism;
  /// Seed each solve with the potentials from the previous evaluation. Every
  /// evaluation still solves to full tolerance for the current weights.
  bool warm_start = true;
};

/// ||R_S(p_theta(E)) - F||_F^2 summed over all ordered pairs, so each
/// unordered pair counts twice.
double frobenius_loss(const ResistanceSurface& surface, const DissimilarityMatrix& target);

/// The loss and its gradient for a fixed graph, sample set, target and model.
/// Holds a reference to `graph`, which must outlive the objective.
class ResistanceObjective {
 public:
  ResistanceObjective(const EdgeGraph& graph, SampleSet samples, DissimilarityMatrix target,
                      ModelSpec spec, ObjectiveOptions options = {});

  double loss(const Eigen::VectorXd& theta);
  GradientReport gradient(const Eigen::VectorXd& theta);
  ResistanceSurface surface(const Eigen::VectorXd& theta);

  int num_params() const;
  const EdgeGraph& graph() const noexcept { return *graph_; }
  const SampleSet& samples() const noexcept { return samples_; }
  const DissimilarityMatrix& target() const noexcept { return target_; }
  const ModelSpec& spec() const noexcept { return spec_; }

  /// Linear solves performed across all evaluations.
  std::size_t solve_count() const noexcept { return solves_; }
  std::size_t evaluations() const noexcept { return evaluations_; }

 private:
  SolveCache potentials(const Eigen::VectorXd& weights);

  const EdgeGraph* graph_;
  SampleSet samples_;
  DissimilarityMatrix target_;
  ModelSpec spec_;
  ObjectiveOptions options_;
  std::optional<SolveCache> previous_;
  std::size_t solves_ = 0;
  std::size_t evaluations_ = 0;
};

/// d R_ab / d w = -(B (u_a - u_b))^{o2}, for sample positions a and b.
Eigen::VectorXd pair_resistance_gradient(const EdgeGraph& graph, const SolveCache& cache,
                                         std::size_t a, std::size_t b);

/// d loss / d w from cached potentials: sum over ordered pairs of
/// 2 (F_lk - R_lk) (B (u_l - u_k))^{o2}.
Eigen::VectorXd loss_weight_gradient(const EdgeGraph& graph, const SolveCache& cache,
                                     const ResistanceSurface& surface,
                                     const DissimilarityMatrix& target);

double loss(const Eigen::VectorXd& theta, const EdgeGraph& graph, const SampleSet& samples,
            const DissimilarityMatrix& target, const ModelSpec& spec,
            const ObjectiveOptions& options = {});
GradientReport gradient(const Eigen::VectorXd& theta, const EdgeGraph& graph,
                        const SampleSet& samples, const DissimilarityMatrix& target,
                        const ModelSpec& spec, const ObjectiveOptions& options = {});

}  // namespace resistograph
