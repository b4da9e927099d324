#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "resistograph/grid_graph.hpp"

namespace resistograph {

/// Smallest edge resistance ever produced; keeps w = 1/r finite.
inline constexpr double kMinResistance = 1e-12;
/// Weight given to edges that would otherwise be switched off entirely.
inline constexpr double kWeightFloor = 1e-12;

enum class ModelKind {
  elevation,  ///< inverted-Gaussian elevation term only
  landcover,  ///< linear landcover term only
  combined,   ///< elevation term + landcover term
  per_edge,   ///< one free weight per edge, identity Jacobian (tests only)
};

std::string_view to_string(ModelKind kind) noexcept;
/// Accepts the names printed by to_string(); throws ParseError otherwise.
ModelKind parse_model_kind(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::combined;
  /// Landcover dimension; ignored for the elevation-only model.
  int q = 0;
  /// Real-data rule: an edge touching an unclassified cell gets kWeightFloor
  /// and contributes nothing to the Jacobian.
  bool floor_unclassified = false;

  bool uses_elevation() const noexcept {
    return kind == ModelKind::elevation || kind == ModelKind::combined;
  }
  bool uses_landcover() const noexcept {
    return kind == ModelKind::landcover || kind == ModelKind::combined;
  }
  /// Length of the flat parameter vector. per_edge needs the edge count.
  int num_params(int num_edges = 0) const;
  /// Throws DataError if the graph lacks a feature block the model needs.
  void check_compatible(const EdgeGraph& graph) const;
};

/// theta = {beta, beta_opt, beta_sd, alpha}.
///
/// Flat layout used by the optimizers: [beta, beta_opt, beta_sd] when the
/// model has an elevation term, followed by alpha[0..q) when it has a
/// landcover term.
struct ThetaVector {
  double beta = 0.0;
  double beta_opt = 0.0;
  double beta_sd = 1.0;
  Eigen::VectorXd alpha;

  Eigen::VectorXd pack(const ModelSpec& spec) const;
  static ThetaVector unpack(const ModelSpec& spec, const Eigen::VectorXd& flat);
};

/// Lower bounds applied by projection, grouped the way they are configured.
struct Floors {
  double beta = 1.0;
  double beta_opt = 1.0;
  double beta_sd = 1e-3;
  double alpha = 1.0;

  static Floors synthetic() { return {1.0, 1.0, 1e-3, 1.0}; }
  static Floors real_data() { return {1e-20, 1e-20, 1e-3, 1e-20}; }

  /// Per-coordinate floor vector matching ThetaVector::pack().
  Eigen::VectorXd vector(const ModelSpec& spec, int num_edges = 0) const;
};

/// Names of flat parameter coordinates ("beta", "beta_opt", ..., "alpha[3]"
/// or the landcover type name when supplied).
std::vector<std::string> parameter_names(const ModelSpec& spec,
                                         const std::vector<std::string>& landcover_names = {});

/// r = beta + 1 - beta * exp(-(C - beta_opt)^2 / (2 beta_sd^2)).
double elevation_resistance(const ThetaVector& theta, double elevation);

/// r = r_E + r_LC according to spec.kind, floored at kMinResistance.
/// Throws NumericError when beta_sd == 0 and the elevation term is used.
double edge_resistance(const ThetaVector& theta, const EdgeFeatures& features,
                       const ModelSpec& spec);
double edge_weight(const ThetaVector& theta, const EdgeFeatures& features,
                   const ModelSpec& spec);

struct WeightEvaluation {
  Eigen::VectorXd resistances;  ///< m
  Eigen::VectorXd weights;      ///< m
  Eigen::MatrixXd jacobian;     ///< m x n_theta, d w_k / d theta_h; empty if not requested
  /// Edges whose raw resistance fell below kMinResistance and was floored.
  int floored = 0;
};

/// Vectorised model evaluation on a flat parameter vector. For per_edge the
/// flat vector is the weight vector itself and the Jacobian is the identity.
WeightEvaluation evaluate_weights(const ModelSpec& spec, const EdgeGraph& graph,
                                  const Eigen::VectorXd& flat, bool with_jacobian);

/// J_{k,h} = d w_k / d theta_h = -(1 / r_k^2) d r_k / d theta_h.
Eigen::MatrixXd weight_jacobian(const ThetaVector& theta, const EdgeGraph& graph,
                                const ModelSpec& spec);

}  // namespace resistograph
