#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace resistograph {

/// Maps integer landcover codes to type names. Codes whose name is
/// "unclassified" (any case) are flagged rather than given a presence slot.
struct CodeTable {
  std::map<int, std::string> names;

  bool contains(int code) const { return names.count(code) != 0; }
  bool is_unclassified(int code) const;
  /// Classified codes in ascending order; type index t is position in this list.
  std::vector<int> type_codes() const;
  int type_index(int code) const;

  /// CSV with header `code,name`.
  static CodeTable load(const std::filesystem::path& path);
};

enum class LayerKind { continuous, categorical };

/// A single ESRI ASCII grid layer. Row 0 is the northernmost row.
struct RasterLayer {
  int nrows = 0;
  int ncols = 0;
  double xll = 0.0;
  double yll = 0.0;
  double cellsize = 1.0;
  double nodata = -9999.0;
  LayerKind kind = LayerKind::continuous;
  std::vector<double> values;

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * ncols + col]; }
  double& at(int row, int col) { return values[static_cast<std::size_t>(row) * ncols + col]; }
  bool is_nodata(double v) const { return v == nodata; }
  bool is_nodata(int row, int col) const { return is_nodata(at(row, col)); }
  double x_max() const { return xll + ncols * cellsize; }
  double y_max() const { return yll + nrows * cellsize; }
};

/// Parses the header keys ncols, nrows, xllcorner, yllcorner, cellsize,
/// NODATA_value (case-insensitive, any order, NODATA optional) followed by
/// nrows rows of ncols values. When `codes` is given the layer is treated as
/// categorical and every non-nodata value must be an integer code in it.
/// Throws ParseError (with line number) or DataError.
RasterLayer load_ascii_grid(const std::filesystem::path& path,
                            const CodeTable* codes = nullptr);
RasterLayer parse_ascii_grid(const std::string& text, const CodeTable* codes = nullptr,
                             const std::string& source = "<memory>");

/// Writes with 17 significant digits so a reload is value-identical.
void write_ascii_grid(const RasterLayer& layer, const std::filesystem::path& path);
std::string format_ascii_grid(const RasterLayer& layer);

enum class ResampleMethod { nearest, bilinear };

/// Resamples onto a grid with the same lower-left origin and cell size
/// `target_cellsize` (>= layer.cellsize), sampling at target cell centres.
/// Bilinear skips nodata neighbours and renormalises the remaining weights.
RasterLayer resample(const RasterLayer& layer, double target_cellsize, ResampleMethod method);

}  // namespace resistograph
