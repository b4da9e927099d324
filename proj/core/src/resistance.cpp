#include "resistograph/resistance.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "resistograph/error.hpp"

namespace resistograph {

void SampleSet::validate(int num_nodes) const {
  std::set<std::int32_t> seen;
  for (NodeId v : nodes) {
    if (v.index < 0 || v.index >= num_nodes) {
      throw DataError("sample node " + std::to_string(v.index) + " outside graph of " +
                      std::to_string(num_nodes) + " nodes");
    }
    if (!seen.insert(v.index).second) {
      throw DataError("sample node " + std::to_string(v.index) + " listed twice");
    }
  }
}

std::size_t SolveCache::position(NodeId node) const {
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    if (nodes[a] == node) return a;
  }
  throw DataError("node " + std::to_string(node.index) + " is not in the sample set");
}

double ResistanceSurface::mean_off_diagonal() const {
  const Eigen::Index s = values.rows();
  if (s < 2) return 0.0;
  double sum = 0.0;
  for (Eigen::Index a = 0; a < s; ++a) {
    for (Eigen::Index b = a + 1; b < s; ++b) sum += values(a, b);
  }
  return sum / (0.5 * static_cast<double>(s * (s - 1)));
}

SolveCache batch_potentials(const LaplacianSolver& solver, const SampleSet& samples,
                            Parallelism par, const SolveCache* warm_start) {
  const int n = solver.size();
  samples.validate(n);
  const std::size_t count = samples.size();

  SolveCache cache;
  cache.nodes = samples.nodes;
  cache.potentials.resize(count);
  cache.residual_norms.resize(count);
  cache.iterations.resize(count);

  // A well-connected ground keeps current out of weakly attached pockets,
  // whose potentials under L^+ e_a would dwarf everything else.
  const Eigen::VectorXd degree = solver.matrix().diagonal();
  Eigen::Index g = 0;
  for (Eigen::Index v = 1; v < degree.size(); ++v) {
    if (degree[v] > degree[g]) g = v;
  }
  cache.ground = NodeId{static_cast<std::int32_t>(g)};

  const bool warm = warm_start != nullptr && warm_start->nodes == samples.nodes &&
                    warm_start->ground == cache.ground;
  // Contiguous chunks, one block solve per worker; per-column results do not
  // depend on the chunking.
  const std::size_t workers = std::max<std::size_t>(
      1, std::min<std::size_t>(count, static_cast<std::size_t>(par.resolved())));
  const std::size_t chunk = count == 0 ? 0 : (count + workers - 1) / workers;
  parallel_for(workers, par, [&](std::size_t t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) return;
    std::vector<Eigen::VectorXd> rhs;
    std::vector<const Eigen::VectorXd*> guesses;
    for (std::size_t a = lo; a < hi; ++a) {
      rhs.push_back(Eigen::VectorXd::Zero(n));
      rhs.back()[samples.nodes[a].index] += 1.0;
      rhs.back()[g] -= 1.0;
      guesses.push_back(warm ? &warm_start->potentials[a] : nullptr);
    }
    std::vector<SolveResult> results = solver.solve_block(rhs, guesses);
    for (std::size_t a = lo; a < hi; ++a) {
      SolveResult& r = results[a - lo];
      if (!r.converged) {
        throw SolverError("solve for node " + std::to_string(samples.nodes[a].index) +
                              ": MINRES did not reach relative residual " +
                              std::to_string(solver.options().tolerance) + " in " +
                              std::to_string(r.iterations) + " iterations (achieved " +
                              std::to_string(r.relative_residual) + ")",
                          r.relative_residual, r.iterations);
      }
      cache.potentials[a] = std::move(r.x);
      cache.residual_norms[a] = r.relative_residual;
      cache.iterations[a] = r.iterations;
    }
  });
  cache.solves = count;
  return cache;
}

SolveCache batch_potentials(const EdgeGraph& graph, const Eigen::VectorXd& weights,
                            const SampleSet& samples, const SolverOptions& options,
                            Parallelism par) {
  LaplacianSolver solver(assemble_laplacian(graph, weights), options);
  return batch_potentials(solver, samples, par);
}

double pair_resistance(const SolveCache& cache, std::size_t a, std::size_t b) {
  if (a == b) return 0.0;
  const Eigen::VectorXd& ua = cache.potentials[a];
  const Eigen::VectorXd& ub = cache.potentials[b];
  const auto l = cache.nodes[a].index;
  const auto k = cache.nodes[b].index;
  return (ua[l] - ub[l]) - (ua[k] - ub[k]);
}

double effective_resistance(const SolveCache& cache, NodeId l, NodeId k) {
  if (l == k) return 0.0;
  return pair_resistance(cache, cache.position(l), cache.position(k));
}

ResistanceSurface resistance_surface(const SolveCache& cache) {
  const auto s = static_cast<Eigen::Index>(cache.nodes.size());
  ResistanceSurface out;
  out.values = Eigen::MatrixXd::Zero(s, s);
  for (Eigen::Index a = 0; a < s; ++a) {
    for (Eigen::Index b = a + 1; b < s; ++b) {
      const double r = pair_resistance(cache, static_cast<std::size_t>(a), static_cast<std::size_t>(b));
      out.values(a, b) = r;
      out.values(b, a) = r;
    }
  }
  return out;
}

ResistanceSurface resistance_surface(const EdgeGraph& graph, const Eigen::VectorXd& weights,
                                     const SampleSet& samples, const SolverOptions& options,
                                     Parallelism par) {
  return resistance_surface(batch_potentials(graph, weights, samples, options, par));
}

}  // namespace resistograph
