#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "resistograph/objective.hpp"
#include "resistograph/resistance.hpp"
#include "resistograph/weight_model.hpp"

namespace resistograph {

enum class FstTransform {
  identity,
  odds,  ///< F / (1 - F)
};

/// Coefficient of determination of the OLS line y = a + b x over unordered
/// off-diagonal pairs, x = resistance and y = transform(F).
/// Throws DataError with fewer than 2 pairs or zero variance in y.
double r_squared_linear_fit(const ResistanceSurface& resistances,
                            const DissimilarityMatrix& target,
                            FstTransform transform = FstTransform::identity);

struct ParameterRow {
  std::string name;
  double value = 0.0;
  long rounded = 0;
};

/// Rounds each parameter to the nearest integer. Landcover coordinates whose
/// type is present at fewer than `presence_threshold` of nodes are omitted.
std::vector<ParameterRow> parameter_table(const Eigen::VectorXd& theta, const ModelSpec& spec,
                                          const Eigen::VectorXd& presence,
                                          const std::vector<std::string>& landcover_names = {},
                                          double presence_threshold = 0.02);

std::string format_parameter_table(const std::vector<ParameterRow>& rows);
void write_parameter_csv(const std::vector<ParameterRow>& rows, const std::filesystem::path& path);

/// One row per unordered pair: l, k, resistance, dissimilarity.
void write_scatter_csv(const ResistanceSurface& resistances, const DissimilarityMatrix& target,
                       const std::filesystem::path& path);

}  // namespace resistograph
