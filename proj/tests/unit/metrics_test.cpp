#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "resistograph/error.hpp"
#include "resistograph/metrics.hpp"

using namespace resistograph;

namespace {

Eigen::MatrixXd symmetric(int s, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(s, s);
  for (int a = 0; a < s; ++a) {
    for (int b = a + 1; b < s; ++b) m(a, b) = m(b, a) = u(rng);
  }
  return m;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(RSquared, AffineTargetFitsExactly) {
  std::mt19937_64 rng(3);
  ResistanceSurface r{symmetric(8, rng, 1.0, 5.0)};
  DissimilarityMatrix f{0.05 * r.values + 0.1 * (Eigen::MatrixXd::Ones(8, 8) - Eigen::MatrixXd::Identity(8, 8))};
  EXPECT_NEAR(r_squared_linear_fit(r, f), 1.0, 1e-12);
}

TEST(RSquared, HandComputed) {
  // x = 1,2,3 ; y = 1,3,2 -> slope 0.5, R^2 = 0.25
  ResistanceSurface r{Eigen::MatrixXd::Zero(3, 3)};
  DissimilarityMatrix f{Eigen::MatrixXd::Zero(3, 3)};
  const double x[3] = {1, 2, 3}, y[3] = {1, 3, 2};
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int i = 0; i < 3; ++i) {
    auto [a, b] = pairs[i];
    r.values(a, b) = r.values(b, a) = x[i];
    f.values(a, b) = f.values(b, a) = y[i] / 10.0;
  }
  EXPECT_NEAR(r_squared_linear_fit(r, f), 0.25, 1e-12);
}

TEST(RSquared, Errors) {
  std::mt19937_64 rng(4);
  ResistanceSurface r{symmetric(4, rng, 1.0, 2.0)};
  DissimilarityMatrix constant{Eigen::MatrixXd::Constant(4, 4, 0.3)};
  constant.values.diagonal().setZero();
  EXPECT_THROW(r_squared_linear_fit(r, constant), DataError);
  DissimilarityMatrix wrong{Eigen::MatrixXd::Zero(3, 3)};
  EXPECT_THROW(r_squared_linear_fit(r, wrong), DataError);
  ResistanceSurface tiny{Eigen::MatrixXd::Zero(2, 2)};
  DissimilarityMatrix tiny_f{Eigen::MatrixXd::Zero(2, 2)};
  EXPECT_THROW(r_squared_linear_fit(tiny, tiny_f), DataError);
  DissimilarityMatrix one{Eigen::MatrixXd::Ones(4, 4)};
  EXPECT_THROW(r_squared_linear_fit(r, one, FstTransform::odds), DataError);
}

TEST(RSquaredProperty, BoundedAndAffineInvariant) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const int s = 4 + trial % 9;
    ResistanceSurface r{symmetric(s, rng, 0.5, 20.0)};
    DissimilarityMatrix f{symmetric(s, rng, 0.0, 0.4)};
    const double r2 = r_squared_linear_fit(r, f);
    EXPECT_LE(r2, 1.0 + 1e-12);
    EXPECT_GE(r2, -1e-12);
    ResistanceSurface shifted{2.0 * r.values};
    shifted.values.array() += 1.0;
    shifted.values.diagonal().setZero();
    EXPECT_NEAR(r_squared_linear_fit(shifted, f), r2, 1e-10);
  }
}

TEST(RSquared, OddsTransform) {
  std::mt19937_64 rng(6);
  ResistanceSurface r{symmetric(6, rng, 1.0, 3.0)};
  DissimilarityMatrix odds_linear{Eigen::MatrixXd::Zero(6, 6)};
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      if (a == b) continue;
      const double o = 0.1 * r.values(a, b);
      odds_linear.values(a, b) = o / (1.0 + o);
    }
  }
  EXPECT_NEAR(r_squared_linear_fit(r, odds_linear, FstTransform::odds), 1.0, 1e-12);
  EXPECT_LT(r_squared_linear_fit(r, odds_linear), 1.0);
}

TEST(ParameterTable, RoundsAndSuppressesRareTypes) {
  const ModelSpec spec{ModelKind::combined, 3};
  Eigen::VectorXd theta(6);
  theta << 9.4, 5.5, 0.6, 227.0, 3.49, -2.5;
  Eigen::VectorXd presence(3);
  presence << 0.5, 0.019, 0.02;
  const auto rows = parameter_table(theta, spec, presence, {"forest", "water", "urban"});
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].name, "beta");
  EXPECT_EQ(rows[0].rounded, 9);
  EXPECT_EQ(rows[1].rounded, 6);
  EXPECT_EQ(rows[2].rounded, 1);
  EXPECT_EQ(rows[3].name, "forest");
  EXPECT_EQ(rows[3].rounded, 227);
  EXPECT_EQ(rows[4].name, "urban");
  EXPECT_EQ(rows[4].value, -2.5);

  const std::string text = format_parameter_table(rows);
  EXPECT_NE(text.find("forest"), std::string::npos);
  EXPECT_EQ(text.find("water"), std::string::npos);
}

TEST(ParameterTable, ElevationAlwaysReported) {
  const ModelSpec spec{ModelKind::elevation, 0};
  Eigen::VectorXd theta(3);
  theta << 1.0, 2.0, 3.0;
  EXPECT_EQ(parameter_table(theta, spec, Eigen::VectorXd()).size(), 3u);
  EXPECT_THROW(parameter_table(Eigen::VectorXd::Ones(4), spec, Eigen::VectorXd()), DataError);
}

TEST(MetricsOutput, CsvFiles) {
  const auto dir = std::filesystem::temp_directory_path();
  const ModelSpec spec{ModelKind::landcover, 2};
  Eigen::VectorXd theta(2);
  theta << 1.25, 7.0;
  Eigen::VectorXd presence = Eigen::VectorXd::Ones(2);
  write_parameter_csv(parameter_table(theta, spec, presence), dir / "rg_params.csv");
  const std::string params = read_file(dir / "rg_params.csv");
  EXPECT_EQ(params.substr(0, params.find('\n')), "parameter,value,rounded");
  EXPECT_NE(params.find("1.25,1"), std::string::npos);

  ResistanceSurface r{Eigen::MatrixXd::Zero(3, 3)};
  r.values << 0, 1, 2, 1, 0, 3, 2, 3, 0;
  DissimilarityMatrix f{r.values / 10.0};
  write_scatter_csv(r, f, dir / "rg_scatter.csv");
  const std::string scatter = read_file(dir / "rg_scatter.csv");
  EXPECT_EQ(std::count(scatter.begin(), scatter.end(), '\n'), 4);
  EXPECT_NE(scatter.find("\n1,2,3,0.29999"), std::string::npos);
  std::filesystem::remove(dir / "rg_params.csv");
  std::filesystem::remove(dir / "rg_scatter.csv");
}
