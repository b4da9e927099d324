#include "resistograph/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "resistograph/error.hpp"
#include "resistograph/log.hpp"

namespace resistograph {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool to_double(const std::string& s, double& v) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool to_int(const std::string& s, int& v) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

LandscapeGrid build_landscape(const RasterLayer* elevation, const RasterLayer* landcover,
                              double cellsize, const CodeTable* codes) {
  if (elevation == nullptr && landcover == nullptr) throw DataError("no raster layers supplied");
  if (landcover != nullptr && codes == nullptr) throw DataError("landcover layer needs a code table");

  std::optional<RasterLayer> elev, lc;
  if (elevation) elev = resample(*elevation, cellsize, ResampleMethod::bilinear);
  if (landcover) {
    RasterLayer categorical = *landcover;
    categorical.kind = LayerKind::categorical;
    lc = resample(categorical, cellsize, ResampleMethod::nearest);
  }

  // Both layers are anchored at their lower-left corner; rows are aligned
  // from the bottom and the common extent is kept.
  int rows = 0, cols = 0;
  if (elev && lc) {
    const double half = 0.5 * cellsize;
    if (std::abs(elev->xll - lc->xll) > half || std::abs(elev->yll - lc->yll) > half ||
        std::abs(elevation->x_max() - landcover->x_max()) > half ||
        std::abs(elevation->y_max() - landcover->y_max()) > half) {
      throw DataError("elevation and landcover extents differ by more than half a cell");
    }
    rows = std::min(elev->nrows, lc->nrows);
    cols = std::min(elev->ncols, lc->ncols);
  } else {
    const RasterLayer& only = elev ? *elev : *lc;
    rows = only.nrows;
    cols = only.ncols;
  }

  LandscapeGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  grid.cellsize = cellsize;
  const int cells = rows * cols;
  grid.mask.assign(static_cast<std::size_t>(cells), 1);

  auto value = [&](const RasterLayer& layer, int r, int c) {
    return layer.at(r + (layer.nrows - rows), c);
  };

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int cell = r * cols + c;
      bool ok = true;
      if (elev && elev->is_nodata(value(*elev, r, c))) ok = false;
      if (lc && lc->is_nodata(value(*lc, r, c))) ok = false;
      grid.mask[static_cast<std::size_t>(cell)] = ok ? 1 : 0;
    }
  }
  if (std::none_of(grid.mask.begin(), grid.mask.end(), [](std::uint8_t m) { return m != 0; })) {
    throw DataError("landscape has no cell with data in every layer (empty mask)");
  }

  if (elev) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        if (!grid.mask[static_cast<std::size_t>(r * cols + c)]) continue;
        lo = std::min(lo, value(*elev, r, c));
        hi = std::max(hi, value(*elev, r, c));
      }
    }
    std::vector<double> scaled(static_cast<std::size_t>(cells), 0.0);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const int cell = r * cols + c;
        if (!grid.mask[static_cast<std::size_t>(cell)]) continue;
        scaled[static_cast<std::size_t>(cell)] =
            hi > lo ? 10.0 * (value(*elev, r, c) - lo) / (hi - lo) : 0.0;
      }
    }
    grid.elevation = std::move(scaled);
  }

  if (lc) {
    const std::vector<int> type_codes = codes->type_codes();
    const int q = static_cast<int>(type_codes.size());
    grid.landcover_types = q;
    for (int code : type_codes) grid.landcover_names.push_back(codes->names.at(code));
    grid.presence.assign(static_cast<std::size_t>(cells) * q, 0);
    grid.unclassified.assign(static_cast<std::size_t>(cells), 0);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const int cell = r * cols + c;
        if (!grid.mask[static_cast<std::size_t>(cell)]) continue;
        const int code = static_cast<int>(value(*lc, r, c));
        if (codes->is_unclassified(code)) {
          grid.unclassified[static_cast<std::size_t>(cell)] = 1;
          continue;
        }
        const int t = codes->type_index(code);
        if (t < 0) throw DataError("landcover code " + std::to_string(code) + " not in code table");
        grid.presence[static_cast<std::size_t>(cell) * q + t] = 1;
      }
    }
  }
  grid.validate();
  return grid;
}

FstTable parse_fst(const std::string& text, const std::string& source, bool unit_interval) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    return ParseError(source + ":" + std::to_string(lineno) + ": " + msg);
  };

  enum class Section { header, populations, matrix } section = Section::header;
  FstTable table;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    switch (section) {
      case Section::header:
        if (lower(line) != "id,row,col") throw fail("expected header 'id,row,col'");
        section = Section::populations;
        break;
      case Section::populations: {
        if (lower(line) == "fst") {
          section = Section::matrix;
          break;
        }
        const auto f = split_csv(line);
        Population p;
        if (f.size() != 3 || f[0].empty() || !to_int(f[1], p.row) || !to_int(f[2], p.col)) {
          throw fail("population row must be 'id,row,col'");
        }
        p.id = f[0];
        table.populations.push_back(p);
        break;
      }
      case Section::matrix: {
        const auto f = split_csv(line);
        if (f.size() != table.populations.size()) {
          throw fail("matrix row has " + std::to_string(f.size()) + " values, expected " +
                     std::to_string(table.populations.size()));
        }
        std::vector<double> row;
        for (const auto& s : f) {
          double v = 0.0;
          if (!to_double(s, v)) throw fail("'" + s + "' is not a number");
          row.push_back(v);
        }
        rows.push_back(std::move(row));
        break;
      }
    }
  }
  if (section != Section::matrix) throw ParseError(source + ": missing FST matrix block");
  const std::size_t s = table.populations.size();
  if (s == 0) throw ParseError(source + ": no populations listed");
  if (rows.size() != s) {
    throw ParseError(source + ": FST block has " + std::to_string(rows.size()) + " rows, expected " +
                     std::to_string(s));
  }

  table.F.values.resize(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = 0; b < s; ++b) {
      const double v = rows[a][b];
      if (!(v >= 0.0 && (unit_interval ? v <= 1.0 : std::isfinite(v)))) {
        throw DataError(source + ": F_ST(" + std::to_string(a) + "," + std::to_string(b) +
                        ") = " + std::to_string(v) +
                        (unit_interval ? " outside [0, 1]" : " is negative or not finite"));
      }
      if (a == b && v != 0.0) {
        throw DataError(source + ": F_ST diagonal entry " + std::to_string(a) + " is not zero");
      }
      if (std::abs(v - rows[b][a]) > 1e-9) {
        throw DataError(source + ": F_ST matrix is not symmetric at (" + std::to_string(a) + "," +
                        std::to_string(b) + ")");
      }
      table.F.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          0.5 * (v + rows[b][a]);
    }
  }
  return table;
}

FstTable load_fst(const std::filesystem::path& path, bool unit_interval) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_fst(ss.str(), path.string(), unit_interval);
}

void write_fst(const FstTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  out << "id,row,col\n";
  for (const Population& p : table.populations) out << p.id << ',' << p.row << ',' << p.col << '\n';
  out << "FST\n";
  for (Eigen::Index a = 0; a < table.F.size(); ++a) {
    for (Eigen::Index b = 0; b < table.F.size(); ++b) {
      if (b > 0) out << ',';
      out << table.F.values(a, b);
    }
    out << '\n';
  }
}

SnappedSamples snap_populations(const FstTable& table, const EdgeGraph& graph) {
  SnappedSamples out;
  for (const Population& p : table.populations) {
    std::optional<NodeId> node = graph.node_at(p.row, p.col);
    double distance = 0.0;
    if (!node) {
      if (graph.grid_cols() == 0) throw DataError("graph carries no grid coordinates");
      double best = std::numeric_limits<double>::infinity();
      for (int v = 0; v < graph.num_nodes(); ++v) {
        const int cell = graph.cell_of(NodeId{v});
        const double dr = cell / graph.grid_cols() - p.row;
        const double dc = cell % graph.grid_cols() - p.col;
        const double d = std::hypot(dr, dc);
        if (d < best) {
          best = d;
          node = NodeId{v};
        }
      }
      distance = best;
      log::info("population " + p.id + " snapped " + std::to_string(distance) +
                " cells to node " + std::to_string(node->index));
    }
    for (NodeId existing : out.samples.nodes) {
      if (existing == *node) {
        throw DataError("population " + p.id + " snaps onto a node already used by another population");
      }
    }
    out.samples.nodes.push_back(*node);
    out.snap_distance.push_back(distance);
  }
  return out;
}

}  // namespace resistograph
