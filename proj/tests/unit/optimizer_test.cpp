#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "resistograph/error.hpp"
#include "resistograph/nelder_mead.hpp"
#include "resistograph/optimizer.hpp"
#include "resistograph/synthetic.hpp"

using namespace resistograph;

namespace {

struct SmallProblem {
  EdgeGraph graph;
  ModelSpec spec{ModelKind::combined, 3};
  SampleSet samples;
  DissimilarityMatrix target;
  Eigen::VectorXd theta0;
};

SmallProblem small_problem(std::uint64_t seed, double noise = 0.0) {
  std::mt19937_64 rng(seed);
  SmallProblem p;
  SyntheticLandscapeOptions lo;
  lo.rows = 6;
  lo.cols = 6;
  lo.landcover_types = 3;
  lo.elevation_bumps = 2;
  lo.patches_per_type = 2;
  p.graph = build_grid_graph(make_synthetic_landscape(lo, rng));
  Eigen::VectorXd truth = init_theta(p.spec, InitMode::synthetic, rng).pack(p.spec);
  p.theta0 = init_theta(p.spec, InitMode::synthetic, rng).pack(p.spec);
  p.samples = sample_nodes(p.graph, 8, rng);
  const SyntheticScenario sc = make_scenario(p.graph, p.spec, truth, p.samples, noise, seed + 1);
  p.target = simulate_F(sc);
  return p;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(RmsProp, ZeroGradientLeavesThetaUnchanged) {
  FitState s;
  s.theta = Eigen::Vector3d(2.0, 3.0, 4.0);
  const OptimConfig cfg;
  const FitState next = rmsprop_step(s, Eigen::Vector3d::Zero(), cfg, Eigen::Vector3d::Ones());
  EXPECT_EQ(next.theta, s.theta);
  EXPECT_EQ(next.iter, 1);
}

TEST(RmsProp, FirstStepMagnitude) {
  FitState s;
  s.theta = Eigen::Vector2d(50.0, 50.0);
  const OptimConfig cfg;
  for (double g : {1e-3, 1.0, 250.0}) {
    const FitState next = rmsprop_step(s, Eigen::Vector2d(g, -g), cfg, Eigen::Vector2d::Ones());
    const double expect = cfg.learning_rate * g / (std::sqrt((1.0 - cfg.gamma) * g * g) + cfg.rmsprop_eps);
    EXPECT_NEAR(50.0 - next.theta[0], expect, 1e-12);
    EXPECT_NEAR(50.0 - next.theta[0], 0.1 / std::sqrt(0.1), 1e-4);
    EXPECT_NEAR(next.theta[1] - 50.0, 0.316, 1e-3);
  }
}

TEST(RmsProp, ClampsToFloor) {
  FitState s;
  s.theta = Eigen::Vector2d(1.1, 5.0);
  const FitState next =
      rmsprop_step(s, Eigen::Vector2d(10.0, 0.0), OptimConfig{}, Eigen::Vector2d(1.0, 1e-3));
  EXPECT_EQ(next.theta[0], 1.0);
  EXPECT_EQ(next.theta[1], 5.0);
  EXPECT_EQ(next.projections, 1);
}

TEST(RmsProp, RejectsNonFiniteGradient) {
  FitState s;
  s.theta = Eigen::Vector2d(1.0, 1.0);
  EXPECT_THROW(rmsprop_step(s, Eigen::Vector2d(NAN, 0.0), OptimConfig{}, Eigen::Vector2d::Zero()),
               NumericError);
  EXPECT_THROW(rmsprop_step(s, Eigen::Vector2d(INFINITY, 0.0), OptimConfig{}, Eigen::Vector2d::Zero()),
               NumericError);
}

TEST(OptimConfig, Validation) {
  OptimConfig c;
  EXPECT_NO_THROW(c.validate());
  c.gamma = 1.0;
  EXPECT_THROW(c.validate(), DataError);
  c = OptimConfig{};
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(), DataError);
  c = OptimConfig{};
  c.floors.alpha = 0.0;
  EXPECT_THROW(c.validate(), DataError);
}

TEST(InitTheta, RangesAndDeterminism) {
  ModelSpec spec{ModelKind::combined, 17};
  std::mt19937_64 a(99), b(99);
  for (int trial = 0; trial < 50; ++trial) {
    const ThetaVector t = init_theta(spec, InitMode::synthetic, a);
    const ThetaVector u = init_theta(spec, InitMode::synthetic, b);
    EXPECT_EQ(t.pack(spec), u.pack(spec));
    EXPECT_EQ(t.beta, 1.0);
    EXPECT_GE(t.beta_opt, 1.0);
    EXPECT_LE(t.beta_opt, 10.0);
    EXPECT_GE(t.beta_sd, 1.0);
    EXPECT_LE(t.beta_sd, 10.0);
    EXPECT_GE(t.alpha.minCoeff(), 1.0);
    EXPECT_LE(t.alpha.maxCoeff(), 100.0);
    EXPECT_EQ(t.alpha, t.alpha.array().round().matrix());
    const Eigen::VectorXd floors = Floors::synthetic().vector(spec);
    EXPECT_TRUE((t.pack(spec).array() >= floors.array()).all());
  }
  std::mt19937_64 r(5);
  const ThetaVector real = init_theta(spec, InitMode::real, r);
  EXPECT_LE(real.alpha.maxCoeff(), 10.0);
}

TEST(Fit, ZeroIterationsReturnsInitialisation) {
  SmallProblem p = small_problem(1);
  ResistanceObjective obj(p.graph, p.samples, p.target, p.spec);
  OptimConfig cfg;
  cfg.iterations = 0;
  const FitState s = fit(obj, p.theta0, cfg);
  EXPECT_EQ(s.theta, p.theta0);
  ASSERT_EQ(s.trace.size(), 1u);
  EXPECT_EQ(s.trace[0].rel_loss, 1.0);
}

TEST(Fit, DecreasesLossAndRespectsFloors) {
  SmallProblem p = small_problem(2);
  ResistanceObjective obj(p.graph, p.samples, p.target, p.spec);
  OptimConfig cfg;
  cfg.iterations = 300;
  cfg.snapshot_every = 10;
  const Eigen::VectorXd floors = cfg.floors.vector(p.spec);
  const FitState s = fit(obj, p.theta0, cfg, [&](const FitState& st) {
    ASSERT_TRUE((st.theta.array() >= floors.array()).all());
  });
  ASSERT_EQ(s.trace.size(), 301u);
  for (const TraceRecord& r : s.trace) ASSERT_TRUE(std::isfinite(r.loss));
  for (const ThetaSnapshot& snap : s.snapshots) {
    EXPECT_TRUE((snap.theta.array() >= floors.array()).all());
  }
  EXPECT_EQ(s.snapshots.back().iter, 300);
  EXPECT_LT(s.trace.back().loss, 0.1 * s.trace.front().loss);
}

TEST(FitProperty, IdenticalSeedsGiveIdenticalTraces) {
  auto run = [] {
    SmallProblem p = small_problem(3, 0.2);
    ResistanceObjective obj(p.graph, p.samples, p.target, p.spec);
    OptimConfig cfg;
    cfg.iterations = 80;
    return fit(obj, p.theta0, cfg);
  };
  const FitState a = run();
  const FitState b = run();
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    ASSERT_TRUE(same_bits(a.trace[i].loss, b.trace[i].loss)) << i;
    ASSERT_TRUE(same_bits(a.trace[i].grad_norm, b.trace[i].grad_norm)) << i;
  }
  EXPECT_EQ(std::memcmp(a.theta.data(), b.theta.data(), sizeof(double) * a.theta.size()), 0);
}

TEST(Fit, TraceCsvColumns) {
  SmallProblem p = small_problem(4);
  ResistanceObjective obj(p.graph, p.samples, p.target, p.spec);
  OptimConfig cfg;
  cfg.iterations = 3;
  const FitState s = fit(obj, p.theta0, cfg);
  const auto path = std::filesystem::temp_directory_path() / "rg_trace_test.csv";
  write_trace_csv(s, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "iter,loss,rel_loss,grad_norm,wall_ms");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 4);
  std::filesystem::remove(path);
}

TEST(NelderMead, QuadraticBowl) {
  const Eigen::Vector3d centre(1.5, -2.0, 4.0);
  auto bowl = [&](const Eigen::VectorXd& x) {
    const Eigen::Vector3d d = x - centre;
    return d[0] * d[0] + 3.0 * d[1] * d[1] + 0.5 * d[2] * d[2];
  };
  NelderMeadOptions opt;
  opt.projected = false;
  const FitState s = nelder_mead(bowl, Eigen::Vector3d(0.0, 0.0, 0.0), 5000, opt);
  EXPECT_LE((s.theta - centre).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_GT(s.evaluations, static_cast<long>(s.trace.size()) - 1);
}

TEST(NelderMead, ProjectionKeepsEveryVertexAboveFloors) {
  const Eigen::Vector2d floors(1.0, 1.0);
  auto f = [&](const Eigen::VectorXd& x) {
    EXPECT_TRUE((x.array() >= floors.array()).all());
    return (x - Eigen::Vector2d(-3.0, 0.5)).squaredNorm();
  };
  const FitState s = nelder_mead(f, Eigen::Vector2d(4.0, 6.0), 400, NelderMeadOptions{},
                                 Eigen::VectorXd(floors));
  EXPECT_NEAR(s.theta[0], 1.0, 1e-6);
  EXPECT_GE(s.theta[1], 1.0);
  EXPECT_LT(s.trace.back().loss, s.trace.front().loss);
  EXPECT_GT(s.projections, 0);
}

TEST(NelderMead, NonFiniteValuesAreRejected) {
  auto f = [](const Eigen::VectorXd& x) {
    return x[0] < 0.0 ? std::nan("") : (x[0] - 0.25) * (x[0] - 0.25);
  };
  const FitState s = nelder_mead(f, Eigen::VectorXd::Constant(1, 3.0), 500,
                                 NelderMeadOptions{.projected = false});
  EXPECT_NEAR(s.theta[0], 0.25, 1e-6);
}

TEST(NelderMeadFit, SharesInitialisationAndFloors) {
  SmallProblem p = small_problem(5, 0.2);
  ResistanceObjective obj(p.graph, p.samples, p.target, p.spec);
  OptimConfig cfg;
  cfg.iterations = 150;
  const Eigen::VectorXd floors = cfg.floors.vector(p.spec);
  const FitState s = nelder_mead_fit(obj, p.theta0, cfg);
  EXPECT_LE(s.trace.front().loss, obj.loss(p.theta0));
  EXPECT_LE(s.trace.back().loss, s.trace.front().loss);
  for (std::size_t i = 1; i < s.trace.size(); ++i) {
    EXPECT_LE(s.trace[i].loss, s.trace[i - 1].loss);
    EXPECT_GE(s.trace[i].evaluations, s.trace[i - 1].evaluations);
  }
  for (const ThetaSnapshot& snap : s.snapshots) {
    EXPECT_TRUE((snap.theta.array() >= floors.array()).all());
  }
}

TEST(NelderMeadFit, UnprojectedVariantRuns) {
  SmallProblem p = small_problem(6, 0.05);
  ResistanceObjective obj(p.graph, p.samples, p.target, p.spec);
  OptimConfig cfg;
  cfg.iterations = 100;
  NelderMeadOptions opt;
  opt.projected = false;
  const FitState s = nelder_mead_fit(obj, p.theta0, cfg, opt);
  EXPECT_TRUE(std::isfinite(s.trace.back().loss));
  EXPECT_EQ(s.projections, 0);
}
