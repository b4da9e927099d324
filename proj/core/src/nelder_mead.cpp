#include "resistograph/nelder_mead.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "resistograph/error.hpp"
#include "resistograph/log.hpp"

namespace resistograph {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Simplex {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> f;
};

class Evaluator {
 public:
  Evaluator(const std::function<double(const Eigen::VectorXd&)>& fn,
            const std::optional<Eigen::VectorXd>& floors, bool projected, FitState& state)
      : fn_(fn), floors_(floors), projected_(projected), state_(state) {}

  // Projects (when enabled) in place, then evaluates.
  double operator()(Eigen::VectorXd& x) {
    if (projected_ && floors_) state_.projections += project_to_floors(x, *floors_);
    ++state_.evaluations;
    const double v = fn_(x);
    return std::isfinite(v) ? v : kInf;
  }

 private:
  const std::function<double(const Eigen::VectorXd&)>& fn_;
  const std::optional<Eigen::VectorXd>& floors_;
  bool projected_;
  FitState& state_;
};

void build_simplex(Simplex& s, const Eigen::VectorXd& base, const NelderMeadOptions& opt,
                   Evaluator& eval) {
  const Eigen::Index n = base.size();
  s.x.assign(static_cast<std::size_t>(n + 1), base);
  s.f.assign(static_cast<std::size_t>(n + 1), kInf);
  s.f[0] = eval(s.x[0]);
  for (Eigen::Index h = 0; h < n; ++h) {
    Eigen::VectorXd& v = s.x[static_cast<std::size_t>(h + 1)];
    v = s.x[0];
    v[h] += v[h] != 0.0 ? opt.initial_step * std::abs(v[h]) : opt.zero_step;
    s.f[static_cast<std::size_t>(h + 1)] = eval(v);
  }
}

void order(Simplex& s) {
  std::vector<std::size_t> idx(s.x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s.f[a] < s.f[b]; });
  Simplex sorted;
  sorted.x.reserve(idx.size());
  sorted.f.reserve(idx.size());
  for (std::size_t i : idx) {
    sorted.x.push_back(std::move(s.x[i]));
    sorted.f.push_back(s.f[i]);
  }
  s = std::move(sorted);
}

bool converged(const Simplex& s, const NelderMeadOptions& opt) {
  const double f0 = s.f.front();
  if (!std::isfinite(f0)) return false;
  const double scale_x = 1.0 + s.x.front().cwiseAbs().maxCoeff();
  double fspread = 0.0;
  double xspread = 0.0;
  for (std::size_t i = 1; i < s.x.size(); ++i) {
    fspread = std::max(fspread, std::abs(s.f[i] - f0));
    xspread = std::max(xspread, (s.x[i] - s.x.front()).cwiseAbs().maxCoeff());
  }
  return fspread <= opt.f_tolerance * (1.0 + std::abs(f0)) && xspread <= opt.x_tolerance * scale_x;
}

bool degenerate(const Simplex& s) {
  const Eigen::Index n = s.x.front().size();
  Eigen::MatrixXd edges(n, n);
  for (Eigen::Index h = 0; h < n; ++h) edges.col(h) = s.x[static_cast<std::size_t>(h + 1)] - s.x.front();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(edges).singularValues();
  if (sv[0] == 0.0) return true;
  return sv[n - 1] / sv[0] < 1e-12;
}

}  // namespace

FitState nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                     const Eigen::VectorXd& x0, int iterations, const NelderMeadOptions& opt,
                     const std::optional<Eigen::VectorXd>& floors, int snapshot_every,
                     const FitObserver& observer) {
  if (x0.size() == 0) throw DataError("Nelder-Mead needs at least one parameter");
  if (floors && floors->size() != x0.size()) throw DataError("floor vector has wrong length");

  FitState state;
  Evaluator eval(objective, floors, opt.projected, state);
  const auto start = std::chrono::steady_clock::now();

  Simplex s;
  build_simplex(s, x0, opt, eval);
  const double initial = s.f[0];
  order(s);

  auto record = [&](int it, bool last) {
    state.theta = s.x.front();
    state.iter = it;
    TraceRecord rec;
    rec.iter = it;
    rec.loss = s.f.front();
    rec.rel_loss = initial > 0.0 && std::isfinite(initial) ? s.f.front() / initial : 0.0;
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    rec.evaluations = state.evaluations;
    state.trace.push_back(rec);
    if (last || (snapshot_every > 0 && it % snapshot_every == 0)) {
      state.snapshots.push_back({it, state.theta});
    }
    if (observer) observer(state);
  };

  const std::size_t n = static_cast<std::size_t>(x0.size());
  for (int it = 0;; ++it) {
    const bool done = it >= iterations || converged(s, opt);
    record(it, done);
    if (done) break;

    if (degenerate(s)) {
      ++state.restarts;
      log::info("Nelder-Mead: degenerate simplex at iteration " + std::to_string(it) +
                ", restarting around best vertex");
      const Eigen::VectorXd best = s.x.front();
      build_simplex(s, best, opt, eval);
      order(s);
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(x0.size());
    for (std::size_t i = 0; i < n; ++i) centroid += s.x[i];
    centroid /= static_cast<double>(n);
    const Eigen::VectorXd& worst = s.x[n];

    Eigen::VectorXd xr = centroid + opt.reflection * (centroid - worst);
    const double fr = eval(xr);

    if (fr < s.f[0]) {
      Eigen::VectorXd xe = centroid + opt.expansion * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        s.x[n] = std::move(xe);
        s.f[n] = fe;
      } else {
        s.x[n] = std::move(xr);
        s.f[n] = fr;
      }
    } else if (fr < s.f[n - 1]) {
      s.x[n] = std::move(xr);
      s.f[n] = fr;
    } else {
      bool shrink = false;
      if (fr < s.f[n]) {
        Eigen::VectorXd xc = centroid + opt.contraction * (xr - centroid);
        const double fc = eval(xc);
        if (fc <= fr) {
          s.x[n] = std::move(xc);
          s.f[n] = fc;
        } else {
          shrink = true;
        }
      } else {
        Eigen::VectorXd xcc = centroid + opt.contraction * (worst - centroid);
        const double fcc = eval(xcc);
        if (fcc < s.f[n]) {
          s.x[n] = std::move(xcc);
          s.f[n] = fcc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (std::size_t i = 1; i <= n; ++i) {
          s.x[i] = s.x[0] + opt.shrink * (s.x[i] - s.x[0]);
          s.f[i] = eval(s.x[i]);
        }
      }
    }
    order(s);
  }
  return state;
}

FitState nelder_mead_fit(ResistanceObjective& objective, const Eigen::VectorXd& theta0,
                         const OptimConfig& cfg, const NelderMeadOptions& options,
                         const FitObserver& observer) {
  cfg.validate();
  const ModelSpec& spec = objective.spec();
  const EdgeGraph& graph = objective.graph();
  const Eigen::VectorXd floors = cfg.floors.vector(spec, graph.num_edges());

  auto fn = [&](const Eigen::VectorXd& theta) -> double {
    if (!options.projected) {
      try {
        if (evaluate_weights(spec, graph, theta, false).floored > 0) return kInf;
        return objective.loss(theta);
      } catch (const NumericError&) {
        return kInf;
      } catch (const SolverError& e) {
        log::warn(std::string("unprojected Nelder-Mead vertex rejected: ") + e.what());
        return kInf;
      }
    }
    return objective.loss(theta);
  };

  // The starting point honours the floors either way, so both variants share
  // the initialisation used by fit().
  Eigen::VectorXd start = theta0;
  project_to_floors(start, floors);
  return nelder_mead(fn, start, cfg.iterations, options, floors, cfg.snapshot_every, observer);
}

}  // namespace resistograph
