#include "resistograph/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <string>

#include "resistograph/error.hpp"

namespace resistograph {

void OptimConfig::validate() const {
  if (!(learning_rate > 0.0)) throw DataError("learning_rate must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DataError("gamma must lie in (0, 1)");
  if (iterations < 0) throw DataError("iterations must be nonnegative");
  if (!(floors.beta > 0.0 && floors.beta_opt > 0.0 && floors.beta_sd > 0.0 && floors.alpha > 0.0)) {
    throw DataError("projection floors must be positive");
  }
  if (!(rmsprop_eps > 0.0)) throw DataError("rmsprop_eps must be positive");
}

int project_to_floors(Eigen::VectorXd& theta, const Eigen::VectorXd& floors) {
  int clamped = 0;
  for (Eigen::Index h = 0; h < theta.size(); ++h) {
    if (theta[h] < floors[h]) {
      theta[h] = floors[h];
      ++clamped;
    }
  }
  return clamped;
}

FitState rmsprop_step(FitState state, const Eigen::VectorXd& grad, const OptimConfig& cfg,
                      const Eigen::VectorXd& floors) {
  if (!grad.allFinite()) {
    throw NumericError("non-finite gradient at iteration " + std::to_string(state.iter));
  }
  if (state.sq_grad_avg.size() != grad.size()) state.sq_grad_avg = Eigen::VectorXd::Zero(grad.size());
  state.sq_grad_avg = cfg.gamma * state.sq_grad_avg + (1.0 - cfg.gamma) * grad.cwiseAbs2();
  state.theta.array() -=
      cfg.learning_rate * grad.array() / (state.sq_grad_avg.array().sqrt() + cfg.rmsprop_eps);
  state.projections += project_to_floors(state.theta, floors);
  ++state.iter;
  return state;
}

FitState fit(ResistanceObjective& objective, const Eigen::VectorXd& theta0,
             const OptimConfig& cfg, const FitObserver& observer) {
  cfg.validate();
  const Eigen::VectorXd floors =
      cfg.floors.vector(objective.spec(), objective.graph().num_edges());
  if (theta0.size() != floors.size()) throw DataError("initial theta has wrong length");

  FitState state;
  state.theta = theta0;
  state.projections += project_to_floors(state.theta, floors);
  state.sq_grad_avg = Eigen::VectorXd::Zero(theta0.size());

  const auto start = std::chrono::steady_clock::now();
  double initial_loss = 0.0;
  for (int it = 0;; ++it) {
    GradientReport report;
    try {
      report = objective.gradient(state.theta);
    } catch (const SolverError& e) {
      throw SolverError("iteration " + std::to_string(it) + ": " + e.what(),
                        e.achieved_residual(), e.iterations());
    }
    if (!std::isfinite(report.loss)) {
      throw NumericError("non-finite loss at iteration " + std::to_string(it));
    }
    if (it == 0) initial_loss = report.loss;
    ++state.evaluations;

    TraceRecord rec;
    rec.iter = it;
    rec.loss = report.loss;
    rec.rel_loss = initial_loss > 0.0 ? report.loss / initial_loss : 0.0;
    rec.grad_norm = report.grad.norm();
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    rec.evaluations = state.evaluations;
    state.trace.push_back(rec);
    const bool last = it >= cfg.iterations;
    if (last || (cfg.snapshot_every > 0 && it % cfg.snapshot_every == 0)) {
      state.snapshots.push_back({it, state.theta});
    }
    if (observer) observer(state);
    if (last) break;
    state = rmsprop_step(std::move(state), report.grad, cfg, floors);
  }
  return state;
}

void write_trace_csv(const FitState& state, const std::filesystem::path& path,
                     bool with_evaluations) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  out << "iter,loss,rel_loss,grad_norm,wall_ms";
  if (with_evaluations) out << ",evaluations";
  out << '\n';
  for (const TraceRecord& r : state.trace) {
    out << r.iter << ',' << r.loss << ',' << r.rel_loss << ',' << r.grad_norm << ',' << r.wall_ms;
    if (with_evaluations) out << ',' << r.evaluations;
    out << '\n';
  }
}

ThetaVector init_theta(const ModelSpec& spec, InitMode mode, std::mt19937_64& rng) {
  if (spec.kind == ModelKind::per_edge) throw DataError("per-edge model has no initialisation rule");
  std::uniform_int_distribution<int> spread(1, 10);
  std::uniform_int_distribution<int> alpha(1, mode == InitMode::synthetic ? 100 : 10);

  ThetaVector theta;
  theta.beta = 1.0;
  theta.beta_opt = 1.0;
  theta.beta_sd = 1.0;
  if (spec.uses_elevation()) {
    theta.beta_opt = spread(rng);
    theta.beta_sd = spread(rng);
  }
  if (spec.uses_landcover()) {
    theta.alpha.resize(spec.q);
    for (int t = 0; t < spec.q; ++t) theta.alpha[t] = alpha(rng);
  }
  return theta;
}

}  // namespace resistograph
