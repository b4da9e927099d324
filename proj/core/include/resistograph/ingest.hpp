#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "resistograph/grid_graph.hpp"
#include "resistograph/landscape.hpp"
#include "resistograph/objective.hpp"
#include "resistograph/raster.hpp"
#include "resistograph/resistance.hpp"

namespace resistograph {

/// Resamples the layers to `cellsize` (bilinear for elevation, nearest for
/// landcover), min-max scales elevation over valid cells to [0, 10], and
/// derives per-cell landcover presence. A cell is valid when every supplied
/// layer has data there. At least one layer must be given.
LandscapeGrid build_landscape(const RasterLayer* elevation, const RasterLayer* landcover,
                              double cellsize, const CodeTable* codes);

struct Population {
  std::string id;
  int row = 0;
  int col = 0;
};

struct FstTable {
  std::vector<Population> populations;
  DissimilarityMatrix F;
};

/// Format:
///
///     id,row,col
///     <id>,<row>,<col>      (one line per population)
///     FST
///     <|S| comma-separated values>   (|S| lines)
///
/// Throws ParseError on layout problems; DataError on asymmetry beyond 1e-9,
/// values outside [0, 1] or a nonzero diagonal. With `unit_interval` false any
/// finite nonnegative dissimilarity is accepted (simulated resistances).
FstTable load_fst(const std::filesystem::path& path, bool unit_interval = true);
FstTable parse_fst(const std::string& text, const std::string& source = "<memory>",
                   bool unit_interval = true);
void write_fst(const FstTable& table, const std::filesystem::path& path);

struct SnappedSamples {
  SampleSet samples;
  /// Grid-cell distance each population moved to reach a valid node.
  std::vector<double> snap_distance;
};

/// Maps each population to the graph node at its cell, or to the nearest
/// cell centre that is a graph node. Throws DataError when two populations
/// snap onto the same node.
SnappedSamples snap_populations(const FstTable& table, const EdgeGraph& graph);

}  // namespace resistograph
