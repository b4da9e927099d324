#include "resistograph/raster.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "resistograph/error.hpp"

namespace resistograph {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

bool CodeTable::is_unclassified(int code) const {
  const auto it = names.find(code);
  return it != names.end() && lower(it->second) == "unclassified";
}

std::vector<int> CodeTable::type_codes() const {
  std::vector<int> codes;
  for (const auto& [code, name] : names) {
    if (lower(name) != "unclassified") codes.push_back(code);
  }
  return codes;
}

int CodeTable::type_index(int code) const {
  const std::vector<int> codes = type_codes();
  const auto it = std::find(codes.begin(), codes.end(), code);
  if (it == codes.end()) return -1;
  return static_cast<int>(it - codes.begin());
}

CodeTable CodeTable::load(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  int lineno = 0;
  CodeTable table;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (lower(line) != "code,name") {
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected header 'code,name'");
      }
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    double code = 0.0;
    if (comma == std::string::npos || !parse_double(trim(line.substr(0, comma)), code) ||
        code != std::floor(code)) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": malformed code row");
    }
    const int c = static_cast<int>(code);
    if (!table.names.emplace(c, trim(line.substr(comma + 1))).second) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": duplicate code " +
                       std::to_string(c));
    }
  }
  if (table.names.empty()) throw ParseError(path.string() + ": code table is empty");
  return table;
}

RasterLayer parse_ascii_grid(const std::string& text, const CodeTable* codes,
                             const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  RasterLayer layer;
  layer.kind = codes ? LayerKind::categorical : LayerKind::continuous;

  bool have_ncols = false, have_nrows = false, have_x = false, have_y = false, have_cs = false;
  bool x_center = false, y_center = false;
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError(source + ":" + std::to_string(lineno) + ": " + msg);
  };

  // Header: lines whose first token starts with a letter.
  std::streampos data_start = in.tellg();
  int data_line = 0;
  while (true) {
    data_start = in.tellg();
    data_line = lineno;
    if (!std::getline(in, line)) break;
    ++lineno;
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key)) continue;
    if (!std::isalpha(static_cast<unsigned char>(key.front()))) break;
    if (!(ls >> value)) throw fail("header key '" + key + "' has no value");
    double v = 0.0;
    if (!parse_double(value, v)) throw fail("header value '" + value + "' is not a number");
    const std::string k = lower(key);
    if (k == "ncols") {
      layer.ncols = static_cast<int>(v);
      have_ncols = v == std::floor(v);
    } else if (k == "nrows") {
      layer.nrows = static_cast<int>(v);
      have_nrows = v == std::floor(v);
    } else if (k == "xllcorner" || k == "xllcenter") {
      layer.xll = v;
      have_x = true;
      x_center = k == "xllcenter";
    } else if (k == "yllcorner" || k == "yllcenter") {
      layer.yll = v;
      have_y = true;
      y_center = k == "yllcenter";
    } else if (k == "cellsize") {
      layer.cellsize = v;
      have_cs = true;
    } else if (k == "nodata_value") {
      layer.nodata = v;
    } else {
      throw fail("unknown header key '" + key + "'");
    }
  }
  if (!have_ncols || !have_nrows || !have_x || !have_y || !have_cs) {
    throw ParseError(source + ": header must define ncols, nrows, xllcorner, yllcorner, cellsize");
  }
  if (layer.ncols <= 0 || layer.nrows <= 0) throw ParseError(source + ": dimensions must be positive");
  if (!(layer.cellsize > 0.0)) throw ParseError(source + ": cellsize must be positive");
  if (x_center) layer.xll -= 0.5 * layer.cellsize;
  if (y_center) layer.yll -= 0.5 * layer.cellsize;

  in.clear();
  in.seekg(data_start);
  lineno = data_line;
  layer.values.reserve(static_cast<std::size_t>(layer.nrows) * layer.ncols);
  int row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string token;
    int col = 0;
    bool any = false;
    while (ls >> token) {
      any = true;
      double v = 0.0;
      if (!parse_double(token, v)) throw fail("value '" + token + "' is not a number");
      if (codes && v != layer.nodata) {
        if (v != std::floor(v) || !codes->contains(static_cast<int>(v))) {
          throw DataError(source + ":" + std::to_string(lineno) + ": unknown category code " + token);
        }
      }
      layer.values.push_back(v);
      ++col;
    }
    if (!any) continue;
    if (col != layer.ncols) {
      throw fail("row has " + std::to_string(col) + " values, header says ncols " +
                 std::to_string(layer.ncols));
    }
    if (++row > layer.nrows) throw fail("more rows than nrows " + std::to_string(layer.nrows));
  }
  if (row != layer.nrows) {
    throw fail("found " + std::to_string(row) + " data rows, header says nrows " +
               std::to_string(layer.nrows));
  }
  return layer;
}

RasterLayer load_ascii_grid(const std::filesystem::path& path, const CodeTable* codes) {
  return parse_ascii_grid(read_file(path), codes, path.string());
}

std::string format_ascii_grid(const RasterLayer& layer) {
  std::string out;
  out += "ncols " + std::to_string(layer.ncols) + "\n";
  out += "nrows " + std::to_string(layer.nrows) + "\n";
  out += "xllcorner " + format_double(layer.xll) + "\n";
  out += "yllcorner " + format_double(layer.yll) + "\n";
  out += "cellsize " + format_double(layer.cellsize) + "\n";
  out += "NODATA_value " + format_double(layer.nodata) + "\n";
  for (int r = 0; r < layer.nrows; ++r) {
    for (int c = 0; c < layer.ncols; ++c) {
      if (c > 0) out += ' ';
      out += format_double(layer.at(r, c));
    }
    out += '\n';
  }
  return out;
}

void write_ascii_grid(const RasterLayer& layer, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << format_ascii_grid(layer);
}

RasterLayer resample(const RasterLayer& layer, double target_cellsize, ResampleMethod method) {
  if (method == ResampleMethod::bilinear && layer.kind == LayerKind::categorical) {
    throw DataError("bilinear resampling requested for a categorical layer");
  }
  if (!(target_cellsize >= layer.cellsize)) {
    throw DataError("target cellsize " + format_double(target_cellsize) +
                    " is finer than the source cellsize " + format_double(layer.cellsize));
  }
  const double ratio = target_cellsize / layer.cellsize;

  RasterLayer out;
  out.kind = layer.kind;
  out.xll = layer.xll;
  out.yll = layer.yll;
  out.cellsize = target_cellsize;
  out.nodata = layer.nodata;
  out.ncols = std::max(1, static_cast<int>(std::floor(layer.ncols / ratio + 1e-9)));
  out.nrows = std::max(1, static_cast<int>(std::floor(layer.nrows / ratio + 1e-9)));
  out.values.assign(static_cast<std::size_t>(out.nrows) * out.ncols, layer.nodata);

  for (int r = 0; r < out.nrows; ++r) {
    // Source coordinates of the target cell centre, in pixel-centre index
    // units measured from the top-left pixel.
    const double row_f = layer.nrows - (out.nrows - r - 0.5) * ratio - 0.5;
    for (int c = 0; c < out.ncols; ++c) {
      const double col_f = (c + 0.5) * ratio - 0.5;
      double& dst = out.at(r, c);

      if (method == ResampleMethod::nearest) {
        const int sr = std::clamp(static_cast<int>(std::floor(row_f + 0.5)), 0, layer.nrows - 1);
        const int sc = std::clamp(static_cast<int>(std::floor(col_f + 0.5)), 0, layer.ncols - 1);
        dst = layer.at(sr, sc);
        continue;
      }

      int r0 = static_cast<int>(std::floor(row_f));
      int c0 = static_cast<int>(std::floor(col_f));
      double tr = row_f - r0;
      double tc = col_f - c0;
      if (r0 < 0) { r0 = 0; tr = 0.0; }
      if (c0 < 0) { c0 = 0; tc = 0.0; }
      if (r0 >= layer.nrows - 1) { r0 = layer.nrows - 1; tr = 0.0; }
      if (c0 >= layer.ncols - 1) { c0 = layer.ncols - 1; tc = 0.0; }

      // Weighted mean of deviations from the first valid neighbour, clamped to
      // the neighbour range: constant inputs stay exact and the result never
      // leaves [min, max] of the pixels used.
      double ref = 0.0, sum = 0.0, weight = 0.0;
      double lo = 0.0, hi = 0.0;
      bool have = false;
      const int dr[4] = {0, 0, 1, 1};
      const int dc[4] = {0, 1, 0, 1};
      const double wts[4] = {(1 - tr) * (1 - tc), (1 - tr) * tc, tr * (1 - tc), tr * tc};
      for (int i = 0; i < 4; ++i) {
        if (wts[i] == 0.0) continue;
        const double v = layer.at(r0 + dr[i], c0 + dc[i]);
        if (layer.is_nodata(v)) continue;
        if (!have) {
          ref = lo = hi = v;
          have = true;
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += wts[i] * (v - ref);
        weight += wts[i];
      }
      if (have) dst = std::clamp(ref + sum / weight, lo, hi);
    }
  }
  return out;
}

}  // namespace resistograph
