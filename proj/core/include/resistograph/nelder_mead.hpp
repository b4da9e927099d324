#pragma once

#include <functional>
#include <optional>

#include <Eigen/Core>

#include "resistograph/objective.hpp"
#include "resistograph/optimizer.hpp"

namespace resistograph {

struct NelderMeadOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  /// Relative edge length of the initial simplex (absolute when x_i == 0).
  double initial_step = 0.05;
  double zero_step = 0.00025;
  /// Stop early once both the value spread and the simplex diameter are below these.
  double f_tolerance = 1e-12;
  double x_tolerance = 1e-10;
  /// Project every candidate vertex to the floors before evaluating it.
  bool projected = true;
};

/// Nelder-Mead on an arbitrary objective. One iteration is one simplex update
/// (reflection plus whatever expansion, contraction or shrink follows);
/// evaluations are counted separately. Non-finite objective values are
/// treated as +infinity. When `floors` is set and options.projected is true,
/// vertices are clamped to it before evaluation.
FitState nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                     const Eigen::VectorXd& x0, int iterations, const NelderMeadOptions& options,
                     const std::optional<Eigen::VectorXd>& floors = std::nullopt,
                     int snapshot_every = 100, const FitObserver& observer = {});

/// Nelder-Mead baseline on the resistance loss, with the same floors and
/// iteration budget as fit(). Unprojected runs evaluate parameter vectors
/// that produce a non-positive edge resistance as +infinity.
FitState nelder_mead_fit(ResistanceObjective& objective, const Eigen::VectorXd& theta0,
                         const OptimConfig& cfg, const NelderMeadOptions& options = {},
                         const FitObserver& observer = {});

}  // namespace resistograph
