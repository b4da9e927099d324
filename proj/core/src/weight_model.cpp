#include "resistograph/weight_model.hpp"

#include <cmath>
#include <string>

#include "resistograph/error.hpp"

namespace resistograph {

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::elevation:
      return "elevation";
    case ModelKind::landcover:
      return "landcover";
    case ModelKind::combined:
      return "combined";
    case ModelKind::per_edge:
      return "per-edge";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "elevation") return ModelKind::elevation;
  if (name == "landcover") return ModelKind::landcover;
  if (name == "combined") return ModelKind::combined;
  if (name == "per-edge") return ModelKind::per_edge;
  throw ParseError("unknown model kind '" + std::string(name) + "'");
}

int ModelSpec::num_params(int num_edges) const {
  if (kind == ModelKind::per_edge) return num_edges;
  return (uses_elevation() ? 3 : 0) + (uses_landcover() ? q : 0);
}

void ModelSpec::check_compatible(const EdgeGraph& graph) const {
  if (uses_elevation() && !graph.has_elevation()) {
    throw DataError(std::string("model '") + std::string(to_string(kind)) +
                    "' needs elevation features");
  }
  if (uses_landcover()) {
    if (graph.landcover_dim() == 0) {
      throw DataError(std::string("model '") + std::string(to_string(kind)) +
                      "' needs landcover features");
    }
    if (graph.landcover_dim() != q) {
      throw DataError("model expects " + std::to_string(q) + " landcover types, graph has " +
                      std::to_string(graph.landcover_dim()));
    }
  }
}

Eigen::VectorXd ThetaVector::pack(const ModelSpec& spec) const {
  Eigen::VectorXd flat(spec.num_params());
  Eigen::Index at = 0;
  if (spec.uses_elevation()) {
    flat[at++] = beta;
    flat[at++] = beta_opt;
    flat[at++] = beta_sd;
  }
  if (spec.uses_landcover()) {
    if (alpha.size() != spec.q) throw DataError("alpha has wrong length");
    flat.segment(at, spec.q) = alpha;
  }
  return flat;
}

ThetaVector ThetaVector::unpack(const ModelSpec& spec, const Eigen::VectorXd& flat) {
  if (flat.size() != spec.num_params()) {
    throw DataError("parameter vector has length " + std::to_string(flat.size()) +
                    ", model needs " + std::to_string(spec.num_params()));
  }
  ThetaVector theta;
  Eigen::Index at = 0;
  if (spec.uses_elevation()) {
    theta.beta = flat[at++];
    theta.beta_opt = flat[at++];
    theta.beta_sd = flat[at++];
  }
  if (spec.uses_landcover()) theta.alpha = flat.segment(at, spec.q);
  return theta;
}

Eigen::VectorXd Floors::vector(const ModelSpec& spec, int num_edges) const {
  if (spec.kind == ModelKind::per_edge) return Eigen::VectorXd::Constant(num_edges, kWeightFloor);
  ThetaVector t;
  t.beta = beta;
  t.beta_opt = beta_opt;
  t.beta_sd = beta_sd;
  t.alpha = Eigen::VectorXd::Constant(spec.q, alpha);
  return t.pack(spec);
}

std::vector<std::string> parameter_names(const ModelSpec& spec,
                                         const std::vector<std::string>& landcover_names) {
  std::vector<std::string> names;
  if (spec.uses_elevation()) names = {"beta", "beta_opt", "beta_sd"};
  if (spec.uses_landcover()) {
    for (int t = 0; t < spec.q; ++t) {
      if (static_cast<std::size_t>(t) < landcover_names.size()) {
        names.push_back(landcover_names[static_cast<std::size_t>(t)]);
      } else {
        names.push_back("alpha[" + std::to_string(t) + "]");
      }
    }
  }
  return names;
}

namespace {

void check_spread(double beta_sd) {
  if (beta_sd == 0.0) throw NumericError("beta_sd is zero; the elevation term is undefined");
}

// Gaussian factor exp(-(C - beta_opt)^2 / (2 beta_sd^2)).
double gaussian(double c, double beta_opt, double beta_sd) {
  const double d = c - beta_opt;
  return std::exp(-(d * d) / (2.0 * beta_sd * beta_sd));
}

}  // namespace

double elevation_resistance(const ThetaVector& theta, double elevation) {
  check_spread(theta.beta_sd);
  return theta.beta + 1.0 - theta.beta * gaussian(elevation, theta.beta_opt, theta.beta_sd);
}

double edge_resistance(const ThetaVector& theta, const EdgeFeatures& features,
                       const ModelSpec& spec) {
  if (spec.kind == ModelKind::per_edge) throw DataError("per-edge model has no feature map");
  double r = 0.0;
  if (spec.uses_elevation()) {
    if (!features.elevation) throw DataError("edge has no elevation feature");
    r += elevation_resistance(theta, *features.elevation);
  }
  if (spec.uses_landcover()) {
    if (static_cast<int>(features.landcover.size()) != spec.q || theta.alpha.size() != spec.q) {
      throw DataError("landcover feature length does not match model");
    }
    for (int t = 0; t < spec.q; ++t) r += theta.alpha[t] * features.landcover[static_cast<std::size_t>(t)];
  }
  return std::max(r, kMinResistance);
}

double edge_weight(const ThetaVector& theta, const EdgeFeatures& features,
                   const ModelSpec& spec) {
  return 1.0 / edge_resistance(theta, features, spec);
}

WeightEvaluation evaluate_weights(const ModelSpec& spec, const EdgeGraph& graph,
                                  const Eigen::VectorXd& flat, bool with_jacobian) {
  const int m = graph.num_edges();
  WeightEvaluation out;

  if (spec.kind == ModelKind::per_edge) {
    if (flat.size() != m) throw DataError("per-edge model needs one parameter per edge");
    out.weights = flat;
    out.resistances = flat.cwiseInverse();
    if (with_jacobian) out.jacobian = Eigen::MatrixXd::Identity(m, m);
    return out;
  }

  spec.check_compatible(graph);
  const ThetaVector theta = ThetaVector::unpack(spec, flat);
  const int n_theta = spec.num_params();
  out.resistances.resize(m);
  out.weights.resize(m);
  if (with_jacobian) out.jacobian.setZero(m, n_theta);

  // d r / d theta for one edge, written straight into the Jacobian row and
  // rescaled by -1/r^2 afterwards.
  Eigen::VectorXd dr(n_theta);

  if (spec.uses_elevation()) check_spread(theta.beta_sd);
  const Eigen::Index alpha_at = spec.uses_elevation() ? 3 : 0;

  for (int k = 0; k < m; ++k) {
    double r = 0.0;
    dr.setZero();
    if (spec.uses_elevation()) {
      const double c = graph.edge_elevation(k);
      const double d = c - theta.beta_opt;
      const double sd = theta.beta_sd;
      const double g = gaussian(c, theta.beta_opt, sd);
      r += theta.beta + 1.0 - theta.beta * g;
      dr[0] = 1.0 - g;
      dr[1] = -theta.beta * g * d / (sd * sd);
      dr[2] = -theta.beta * g * d * d / (sd * sd * sd);
    }
    if (spec.uses_landcover()) {
      const auto row = graph.landcover_features().row(k);
      r += row.dot(theta.alpha);
      dr.segment(alpha_at, spec.q) = row.transpose();
    }

    if (spec.floor_unclassified && graph.touches_unclassified(k)) {
      out.weights[k] = kWeightFloor;
      out.resistances[k] = 1.0 / kWeightFloor;
      continue;
    }
    if (!std::isfinite(r)) {
      throw NumericError("edge " + std::to_string(k) + " has non-finite resistance");
    }
    if (r < kMinResistance) {
      ++out.floored;
      r = kMinResistance;
      dr.setZero();
    }
    out.resistances[k] = r;
    out.weights[k] = 1.0 / r;
    if (with_jacobian) out.jacobian.row(k) = (-1.0 / (r * r)) * dr.transpose();
  }
  return out;
}

Eigen::MatrixXd weight_jacobian(const ThetaVector& theta, const EdgeGraph& graph,
                                const ModelSpec& spec) {
  return evaluate_weights(spec, graph, theta.pack(spec), true).jacobian;
}

}  // namespace resistograph
