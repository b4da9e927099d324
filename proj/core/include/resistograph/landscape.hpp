#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace resistograph {

/// Environmental layers on an R x C cell grid, row-major with row 0 at the top.
///
/// `elevation` is already scaled to [0, 10]. `presence` holds rows*cols*q flags
/// laid out cell-major: presence[cell * q + t] is true when landcover type t
/// occurs in the cell. Cells with mask == 0 are dropped when the graph is built.
struct LandscapeGrid {
  int rows = 0;
  int cols = 0;
  double cellsize = 1.0;

  std::optional<std::vector<double>> elevation;

  int landcover_types = 0;
  std::vector<std::uint8_t> presence;
  std::vector<std::string> landcover_names;

  /// Cells whose landcover code was flagged "unclassified" in the code table.
  std::vector<std::uint8_t> unclassified;

  std::vector<std::uint8_t> mask;

  int num_cells() const noexcept { return rows * cols; }
  int cell_index(int row, int col) const noexcept { return row * cols + col; }
  bool has_elevation() const noexcept { return elevation.has_value(); }
  bool has_landcover() const noexcept { return landcover_types > 0; }
  bool valid(int cell) const { return mask[static_cast<std::size_t>(cell)] != 0; }
  bool present(int cell, int type) const {
    return presence[static_cast<std::size_t>(cell) * landcover_types + type] != 0;
  }

  /// Throws DataError when layer sizes disagree with rows*cols or no layer is set.
  void validate() const;
};

}  // namespace resistograph
