#include "resistograph/objective.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "resistograph/error.hpp"

namespace resistograph {

void DissimilarityMatrix::validate(bool unit_interval, double symmetry_tol) const {
  const Eigen::Index s = values.rows();
  if (values.cols() != s) throw DataError("dissimilarity matrix is not square");
  for (Eigen::Index a = 0; a < s; ++a) {
    if (values(a, a) != 0.0) {
      throw DataError("dissimilarity matrix has nonzero diagonal at " + std::to_string(a));
    }
    for (Eigen::Index b = 0; b < s; ++b) {
      const double v = values(a, b);
      if (!std::isfinite(v) || v < 0.0) {
        throw DataError("dissimilarity (" + std::to_string(a) + "," + std::to_string(b) +
                        ") is negative or not finite");
      }
      if (unit_interval && v > 1.0) {
        throw DataError("dissimilarity (" + std::to_string(a) + "," + std::to_string(b) +
                        ") exceeds 1");
      }
      if (std::abs(v - values(b, a)) > symmetry_tol) {
        throw DataError("dissimilarity matrix is not symmetric at (" + std::to_string(a) + "," +
                        std::to_string(b) + ")");
      }
    }
  }
}

double frobenius_loss(const ResistanceSurface& surface, const DissimilarityMatrix& target) {
  if (surface.values.rows() != target.values.rows()) {
    throw DataError("resistance surface and target have different sizes");
  }
  return (surface.values - target.values).squaredNorm();
}

ResistanceObjective::ResistanceObjective(const EdgeGraph& graph, SampleSet samples,
                                         DissimilarityMatrix target, ModelSpec spec,
                                         ObjectiveOptions options)
    : graph_(&graph),
      samples_(std::move(samples)),
      target_(std::move(target)),
      spec_(spec),
      options_(options) {
  samples_.validate(graph.num_nodes());
  if (target_.size() != static_cast<Eigen::Index>(samples_.size())) {
    throw DataError("target has " + std::to_string(target_.size()) + " rows, sample set has " +
                    std::to_string(samples_.size()) + " nodes");
  }
  target_.validate(false, 1e-9);
  if (spec_.kind != ModelKind::per_edge) spec_.check_compatible(graph);
}

int ResistanceObjective::num_params() const { return spec_.num_params(graph_->num_edges()); }

SolveCache ResistanceObjective::potentials(const Eigen::VectorXd& weights) {
  LaplacianSolver solver(assemble_laplacian(*graph_, weights), options_.solver);
  const SolveCache* warm = options_.warm_start && previous_ ? &*previous_ : nullptr;
  SolveCache cache = batch_potentials(solver, samples_, options_.parallelism, warm);
  solves_ += cache.solves;
  ++evaluations_;
  if (options_.warm_start) previous_ = cache;
  return cache;
}

double ResistanceObjective::loss(const Eigen::VectorXd& theta) {
  return frobenius_loss(surface(theta), target_);
}

ResistanceSurface ResistanceObjective::surface(const Eigen::VectorXd& theta) {
  const WeightEvaluation eval = evaluate_weights(spec_, *graph_, theta, false);
  return resistance_surface(potentials(eval.weights));
}

GradientReport ResistanceObjective::gradient(const Eigen::VectorXd& theta) {
  const WeightEvaluation eval = evaluate_weights(spec_, *graph_, theta, true);
  const SolveCache cache = potentials(eval.weights);

  GradientReport report;
  report.surface = resistance_surface(cache);
  report.loss = frobenius_loss(report.surface, target_);
  report.grad_w = loss_weight_gradient(*graph_, cache, report.surface, target_);
  report.grad = eval.jacobian.transpose() * report.grad_w;
  report.solver_residuals = cache.residual_norms;
  return report;
}

Eigen::VectorXd pair_resistance_gradient(const EdgeGraph& graph, const SolveCache& cache,
                                         std::size_t a, std::size_t b) {
  const Eigen::VectorXd diff = cache.potentials[a] - cache.potentials[b];
  const Eigen::VectorXd edge_diff = graph.incidence() * diff;
  return -edge_diff.array().square().matrix();
}

Eigen::VectorXd loss_weight_gradient(const EdgeGraph& graph, const SolveCache& cache,
                                     const ResistanceSurface& surface,
                                     const DissimilarityMatrix& target) {
  const int n = graph.num_nodes();
  const int m = graph.num_edges();
  const auto s = static_cast<Eigen::Index>(cache.potentials.size());

  Eigen::MatrixXd potentials(n, s);
  for (Eigen::Index a = 0; a < s; ++a) potentials.col(a) = cache.potentials[static_cast<std::size_t>(a)];
  // Column a holds B u_a. Each row of B has two entries, so this is O(m |S|).
  const Eigen::MatrixXd edge_potentials = graph.incidence() * potentials;

  // Unordered pairs, each counted twice to match the ordered Frobenius sum:
  // the ordered contribution 2 (F - R) (B b)^2 appears for (l, k) and (k, l).
  // Kahan-compensated per edge, fixed pair order.
  Eigen::VectorXd grad_w = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd carry = Eigen::VectorXd::Zero(m);
  double* acc = grad_w.data();
  double* comp = carry.data();
  for (Eigen::Index a = 0; a < s; ++a) {
    const double* ea = edge_potentials.col(a).data();
    for (Eigen::Index b = a + 1; b < s; ++b) {
      const double coef = 4.0 * (target.values(a, b) - surface.values(a, b));
      if (coef == 0.0) continue;
      const double* eb = edge_potentials.col(b).data();
      for (int k = 0; k < m; ++k) {
        const double t = ea[k] - eb[k];
        const double y = coef * (t * t) - comp[k];
        const double sum = acc[k] + y;
        comp[k] = (sum - acc[k]) - y;
        acc[k] = sum;
      }
    }
  }
  return grad_w;
}

double loss(const Eigen::VectorXd& theta, const EdgeGraph& graph, const SampleSet& samples,
            const DissimilarityMatrix& target, const ModelSpec& spec,
            const ObjectiveOptions& options) {
  ResistanceObjective objective(graph, samples, target, spec, options);
  return objective.loss(theta);
}

GradientReport gradient(const Eigen::VectorXd& theta, const EdgeGraph& graph,
                        const SampleSet& samples, const DissimilarityMatrix& target,
                        const ModelSpec& spec, const ObjectiveOptions& options) {
  ResistanceObjective objective(graph, samples, target, spec, options);
  return objective.gradient(theta);
}

}  // namespace resistograph
