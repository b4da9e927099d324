#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "resistograph/grid_graph.hpp"
#include "resistograph/minres.hpp"
#include "resistograph/parallel.hpp"

namespace resistograph {

enum class SampleLabel { train, test, all };

/// Ordered list of distinct sampled nodes.
struct SampleSet {
  std::vector<NodeId> nodes;
  SampleLabel label = SampleLabel::all;

  std::size_t size() const noexcept { return nodes.size(); }
  /// Throws DataError on duplicates or indices outside [0, num_nodes).
  void validate(int num_nodes) const;
};

/// Potentials u_l = L^+ e_l for every sampled node, in sample order.
/// potentials[a] solves L u = e_a - e_g for a common ground node g, so
/// u_a - u_b = L^+ (e_a - e_b) for every pair.
struct SolveCache {
  std::vector<NodeId> nodes;
  NodeId ground;
  std::vector<Eigen::VectorXd> potentials;
  std::vector<double> residual_norms;
  std::vector<int> iterations;
  std::size_t solves = 0;

  /// Position of `node` in the sample order; throws DataError if absent.
  std::size_t position(NodeId node) const;
};

struct ResistanceSurface {
  Eigen::MatrixXd values;

  Eigen::Index size() const noexcept { return values.rows(); }
  double operator()(Eigen::Index a, Eigen::Index b) const { return values(a, b); }
  /// Mean over off-diagonal entries.
  double mean_off_diagonal() const;
};

/// |S| solves, one per sampled node, grounded at the node of largest weighted
/// degree (lowest index on ties). When `warm_start` holds potentials for the
/// same sample order and ground they are used as initial guesses.
SolveCache batch_potentials(const LaplacianSolver& solver, const SampleSet& samples,
                            Parallelism par = {}, const SolveCache* warm_start = nullptr);

SolveCache batch_potentials(const EdgeGraph& graph, const Eigen::VectorXd& weights,
                            const SampleSet& samples, const SolverOptions& options = {},
                            Parallelism par = {});

/// R_lk = (u_l - u_k)_l - (u_l - u_k)_k, zero when l == k.
double effective_resistance(const SolveCache& cache, NodeId l, NodeId k);
/// Same as above, addressed by sample positions.
double pair_resistance(const SolveCache& cache, std::size_t a, std::size_t b);

ResistanceSurface resistance_surface(const SolveCache& cache);
ResistanceSurface resistance_surface(const EdgeGraph& graph, const Eigen::VectorXd& weights,
                                     const SampleSet& samples,
                                     const SolverOptions& options = {}, Parallelism par = {});

}  // namespace resistograph
