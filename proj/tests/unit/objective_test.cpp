#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "resistograph/error.hpp"
#include "resistograph/objective.hpp"

using namespace resistograph;

namespace {

SampleSet first_nodes(int count, int stride = 1) {
  SampleSet s;
  for (int i = 0; i < count; ++i) s.nodes.push_back(NodeId{i * stride});
  return s;
}

DissimilarityMatrix random_target(int s, std::mt19937_64& rng, double hi) {
  std::uniform_real_distribution<double> u(0.0, hi);
  DissimilarityMatrix f;
  f.values = Eigen::MatrixXd::Zero(s, s);
  for (int a = 0; a < s; ++a) {
    for (int b = a + 1; b < s; ++b) f.values(a, b) = f.values(b, a) = u(rng);
  }
  return f;
}

ObjectiveOptions tight() {
  ObjectiveOptions o;
  o.solver.tolerance = 1e-12;
  o.warm_start = false;
  return o;
}

Eigen::VectorXd central_difference(ResistanceObjective& obj, const Eigen::VectorXd& theta,
                                   double rel_step) {
  Eigen::VectorXd fd(theta.size());
  for (Eigen::Index h = 0; h < theta.size(); ++h) {
    const double step = rel_step * std::max(1.0, std::abs(theta[h]));
    Eigen::VectorXd up = theta, down = theta;
    up[h] += step;
    down[h] -= step;
    fd[h] = (obj.loss(up) - obj.loss(down)) / (2.0 * step);
  }
  return fd;
}

}  // namespace

TEST(Loss, ZeroAtExactTarget) {
  std::mt19937_64 rng(1);
  const EdgeGraph g = build_grid_graph(rg_test::random_grid(5, 5, 3, true, rng));
  ModelSpec spec{ModelKind::combined, 3};
  const Eigen::VectorXd theta = (Eigen::VectorXd(6) << 1, 4, 2, 10, 30, 50).finished();
  const SampleSet s = first_nodes(6, 4);
  ResistanceObjective probe(g, s, DissimilarityMatrix{Eigen::MatrixXd::Zero(6, 6)}, spec);
  DissimilarityMatrix f{probe.surface(theta).values};
  ResistanceObjective obj(g, s, f, spec);
  EXPECT_EQ(obj.loss(theta), 0.0);
  const GradientReport rep = obj.gradient(theta);
  EXPECT_LT(rep.grad.norm(), 1e-12);
}

TEST(Loss, TwoSamplesCountBothOrders) {
  // Series pair of unit resistors: R_12 = 3 with three edges.
  const EdgeGraph g = EdgeGraph::from_edges(
      4, {{NodeId{0}, NodeId{1}}, {NodeId{1}, NodeId{2}}, {NodeId{2}, NodeId{3}}});
  SampleSet s;
  s.nodes = {NodeId{0}, NodeId{3}};
  DissimilarityMatrix f{(Eigen::Matrix2d() << 0, 1, 1, 0).finished()};
  ResistanceObjective obj(g, s, f, ModelSpec{ModelKind::per_edge, 0});
  EXPECT_NEAR(obj.loss(Eigen::VectorXd::Ones(3)), 8.0, 1e-12);
}

TEST(Loss, FrobeniusOfSurface) {
  ResistanceSurface r{(Eigen::Matrix3d() << 0, 1, 2, 1, 0, 3, 2, 3, 0).finished()};
  DissimilarityMatrix f{(Eigen::Matrix3d() << 0, 2, 2, 2, 0, 1, 2, 1, 0).finished()};
  EXPECT_DOUBLE_EQ(frobenius_loss(r, f), 2.0 * (1.0 + 0.0 + 4.0));
  DissimilarityMatrix wrong{Eigen::MatrixXd::Zero(2, 2)};
  EXPECT_THROW(frobenius_loss(r, wrong), DataError);
}

TEST(Gradient, SingleEdgeHandComputation) {
  const EdgeGraph g = EdgeGraph::from_edges(2, {{NodeId{0}, NodeId{1}}});
  const SampleSet s = first_nodes(2);
  for (double f12 : {0.1, 0.5, 2.0}) {
    for (double w : {0.5, 1.0, 4.0}) {
      DissimilarityMatrix f{(Eigen::Matrix2d() << 0, f12, f12, 0).finished()};
      ResistanceObjective obj(g, s, f, ModelSpec{ModelKind::per_edge, 0}, tight());
      const Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, w);
      const double hand = 2.0 * (f12 - 1.0 / w) * (1.0 / (w * w)) * 2.0;
      const GradientReport rep = obj.gradient(theta);
      EXPECT_NEAR(rep.grad[0], hand, 1e-10 * std::max(1.0, std::abs(hand)));
      if (hand != 0.0) EXPECT_EQ(rep.grad[0] > 0.0, hand > 0.0);
      EXPECT_NEAR(central_difference(obj, theta, 1e-5)[0], hand, 1e-6 * std::max(1.0, std::abs(hand)));
    }
  }
}

TEST(Gradient, MatchesCentralDifferencesOnGrid) {
  std::mt19937_64 rng(2);
  for (ModelKind kind : {ModelKind::elevation, ModelKind::landcover, ModelKind::combined}) {
    const EdgeGraph g = build_grid_graph(rg_test::random_grid(5, 5, 3, true, rng));
    ModelSpec spec{kind, 3};
    Eigen::VectorXd theta(spec.num_params());
    std::uniform_real_distribution<double> shape(1.0, 10.0), cost(1.0, 100.0);
    for (Eigen::Index h = 0; h < theta.size(); ++h) {
      const bool alpha = spec.uses_landcover() && h >= (spec.uses_elevation() ? 3 : 0);
      theta[h] = alpha ? cost(rng) : shape(rng);
    }
    const SampleSet s = first_nodes(8, 3);
    ResistanceObjective obj(g, s, random_target(8, rng, 50.0), spec, tight());
    const Eigen::VectorXd grad = obj.gradient(theta).grad;
    const Eigen::VectorXd fd = central_difference(obj, theta, 1e-5);
    for (Eigen::Index h = 0; h < theta.size(); ++h) {
      if (std::abs(grad[h]) < 1e-10) continue;
      EXPECT_LE(std::abs(grad[h] - fd[h]) / std::abs(grad[h]), 1e-4)
          << to_string(kind) << " coord " << h;
    }
  }
}

TEST(Gradient, ComposesThroughJacobian) {
  std::mt19937_64 rng(3);
  const EdgeGraph g = build_grid_graph(rg_test::random_grid(4, 4, 2, true, rng));
  ModelSpec spec{ModelKind::combined, 2};
  const Eigen::VectorXd theta = (Eigen::VectorXd(5) << 2, 5, 3, 20, 60).finished();
  ResistanceObjective obj(g, first_nodes(5, 3), random_target(5, rng, 30.0), spec);
  const GradientReport rep = obj.gradient(theta);
  const Eigen::MatrixXd j = evaluate_weights(spec, g, theta, true).jacobian;
  EXPECT_LE((rep.grad - j.transpose() * rep.grad_w).cwiseAbs().maxCoeff(),
            1e-12 * rep.grad.cwiseAbs().maxCoeff());
  EXPECT_EQ(rep.grad_w.size(), g.num_edges());
  EXPECT_EQ(rep.solver_residuals.size(), 5u);
}

TEST(Gradient, PerEdgeMatchesCentralDifferences) {
  std::mt19937_64 rng(4);
  const EdgeGraph g = rg_test::random_connected_graph(9, 6, rng);
  const Eigen::VectorXd w = rg_test::random_weights(g.num_edges(), rng, 0.5, 3.0);
  ResistanceObjective obj(g, first_nodes(5), random_target(5, rng, 2.0),
                          ModelSpec{ModelKind::per_edge, 0}, tight());
  const Eigen::VectorXd grad = obj.gradient(w).grad;
  const Eigen::VectorXd fd = central_difference(obj, w, 1e-5);
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (std::abs(grad[k]) < 1e-10) continue;
    EXPECT_LE(std::abs(grad[k] - fd[k]) / std::abs(grad[k]), 1e-4) << "edge " << k;
  }
}

TEST(GradientProperty, PairResistanceDerivativeNonPositive) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const EdgeGraph g = rg_test::random_connected_graph(12, 10, rng);
    const SampleSet s = first_nodes(6, 2);
    const SolveCache cache = batch_potentials(g, rg_test::random_weights(g.num_edges(), rng), s);
    for (std::size_t a = 0; a < s.size(); ++a) {
      for (std::size_t b = a + 1; b < s.size(); ++b) {
        EXPECT_LE(pair_resistance_gradient(g, cache, a, b).maxCoeff(), 0.0);
      }
    }
  }
}

TEST(GradientProperty, ZeroTargetMakesWeightGradientNonPositive) {
  std::mt19937_64 rng(6);
  const EdgeGraph g = rg_test::random_connected_graph(15, 12, rng);
  ResistanceObjective obj(g, first_nodes(6, 2), DissimilarityMatrix{Eigen::MatrixXd::Zero(6, 6)},
                          ModelSpec{ModelKind::per_edge, 0});
  EXPECT_LE(obj.gradient(rg_test::random_weights(g.num_edges(), rng)).grad_w.maxCoeff(), 0.0);
}

TEST(LossProperty, ScaleConsistency) {
  std::mt19937_64 rng(7);
  const EdgeGraph g = rg_test::random_connected_graph(10, 8, rng);
  const Eigen::VectorXd w = rg_test::random_weights(g.num_edges(), rng);
  const SampleSet s = first_nodes(5, 2);
  const DissimilarityMatrix f = random_target(5, rng, 1.0);
  const double c = 2.0;
  ResistanceObjective base(g, s, f, ModelSpec{ModelKind::per_edge, 0}, tight());
  ResistanceObjective scaled(g, s, DissimilarityMatrix{c * f.values}, ModelSpec{ModelKind::per_edge, 0},
                             tight());
  // Dividing every weight by c multiplies every resistance by c.
  EXPECT_NEAR(scaled.loss(w / c), c * c * base.loss(w), 1e-9 * base.loss(w));
}

TEST(Objective, WarmStartAgreesWithColdStart) {
  std::mt19937_64 rng(8);
  const EdgeGraph g = build_grid_graph(rg_test::random_grid(6, 6, 2, true, rng));
  ModelSpec spec{ModelKind::combined, 2};
  const DissimilarityMatrix f = random_target(6, rng, 40.0);
  ObjectiveOptions cold;
  cold.warm_start = false;
  ResistanceObjective warm_obj(g, first_nodes(6, 5), f, spec);
  ResistanceObjective cold_obj(g, first_nodes(6, 5), f, spec, cold);
  Eigen::VectorXd theta = (Eigen::VectorXd(5) << 1, 4, 2, 30, 70).finished();
  for (int step = 0; step < 5; ++step) {
    theta[3] += 0.5;
    const double lw = warm_obj.loss(theta);
    const double lc = cold_obj.loss(theta);
    EXPECT_NEAR(lw, lc, 1e-6 * lc);
  }
  EXPECT_EQ(warm_obj.solve_count(), 30u);
  EXPECT_EQ(warm_obj.evaluations(), 5u);
}

TEST(DissimilarityMatrix, Validation) {
  DissimilarityMatrix ok{(Eigen::Matrix2d() << 0, 0.3, 0.3, 0).finished()};
  EXPECT_NO_THROW(ok.validate(true));
  DissimilarityMatrix asym{(Eigen::Matrix2d() << 0, 0.3, 0.2, 0).finished()};
  EXPECT_THROW(asym.validate(), DataError);
  DissimilarityMatrix diag{(Eigen::Matrix2d() << 0.1, 0.3, 0.3, 0).finished()};
  EXPECT_THROW(diag.validate(), DataError);
  DissimilarityMatrix big{(Eigen::Matrix2d() << 0, 3, 3, 0).finished()};
  EXPECT_NO_THROW(big.validate(false));
  EXPECT_THROW(big.validate(true), DataError);
}
