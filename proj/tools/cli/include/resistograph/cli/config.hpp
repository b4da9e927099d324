#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "resistograph/minres.hpp"
#include "resistograph/metrics.hpp"
#include "resistograph/optimizer.hpp"
#include "resistograph/synthetic.hpp"
#include "resistograph/weight_model.hpp"

namespace resistograph::cli {

enum class Mode { fit, simulate, sweep, evaluate, resistance, baseline };

std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view name);

/// Where the landscape and dissimilarities come from. With no fst/dissimilarity
/// file the run builds a synthetic landscape and scenario instead.
struct DataConfig {
  std::filesystem::path elevation;
  std::filesystem::path landcover;
  std::filesystem::path codes;
  std::filesystem::path fst;
  /// Accept any nonnegative dissimilarity, as written by `simulate`.
  bool unbounded_dissimilarity = false;
  /// 0 keeps the native raster resolution.
  double cellsize = 0.0;
  FstTransform r2_transform = FstTransform::identity;

  bool has_rasters() const { return !elevation.empty() || !landcover.empty(); }
};

struct SyntheticConfig {
  SyntheticLandscapeOptions landscape;
  int sample_size = 50;
  double relative_noise = 0.0;
  int test_size = 25;
  int eval_every = 10;
};

struct RunConfig {
  Mode mode = Mode::fit;
  std::uint64_t seed = 0;
  int threads = 1;
  std::filesystem::path output_dir = "resistograph-out";
  FitMethod optimizer = FitMethod::rmsprop;

  ModelSpec model;
  OptimConfig optim;
  /// "synthetic" or "real"; empty picks by data source.
  std::string init;
  SolverOptions solver;
  bool warm_start = true;

  DataConfig data;
  SyntheticConfig synthetic;
  SweepSpec sweep;

  /// evaluate: parameters CSV (parameter,value[,rounded]); empty runs a train/test split.
  std::filesystem::path theta;
  /// resistance: CSV `i,j,weight` and the node ids to report.
  std::filesystem::path edges;
  std::vector<int> nodes;

  double error_presence_threshold = 0.01;
  double table_presence_threshold = 0.02;

  /// Resolves relative paths against `base`, checks referenced files exist
  /// and ranges are sane. Throws DataError.
  void validate() const;
  bool real_data() const { return !data.fst.empty(); }
  InitMode init_mode() const;
};

/// Flat INI: sections [run] [model] [optimizer] [solver] [data] [synthetic]
/// [sweep] [evaluate] [resistance]. Unknown keys are a ParseError. Relative
/// paths are taken relative to the config file.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::istream& in, const std::filesystem::path& base = {});
/// Every key with its effective value, reloadable by load_config().
void write_config(const RunConfig& cfg, std::ostream& out);

}  // namespace resistograph::cli
