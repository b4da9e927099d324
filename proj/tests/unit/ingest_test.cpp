#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "resistograph/error.hpp"
#include "resistograph/ingest.hpp"
#include "resistograph/raster.hpp"

using namespace resistograph;

namespace {

const char* kTwoByTwo =
    "ncols 2\n"
    "nrows 2\n"
    "xllcorner 0\n"
    "yllcorner 0\n"
    "cellsize 30\n"
    "NODATA_value -9999\n"
    "1 2\n"
    "3 4\n";

RasterLayer layer(int rows, int cols, double cellsize, std::vector<double> values,
                  LayerKind kind = LayerKind::continuous) {
  RasterLayer l;
  l.nrows = rows;
  l.ncols = cols;
  l.cellsize = cellsize;
  l.kind = kind;
  l.values = std::move(values);
  return l;
}

CodeTable codes() {
  CodeTable t;
  t.names = {{11, "open water"}, {41, "forest"}, {0, "Unclassified"}};
  return t;
}

}  // namespace

TEST(AsciiGrid, RowMajorTopRowFirst) {
  const RasterLayer l = parse_ascii_grid(kTwoByTwo);
  EXPECT_EQ(l.nrows, 2);
  EXPECT_EQ(l.ncols, 2);
  EXPECT_EQ(l.cellsize, 30.0);
  EXPECT_EQ(l.at(0, 0), 1.0);
  EXPECT_EQ(l.at(0, 1), 2.0);
  EXPECT_EQ(l.at(1, 0), 3.0);
}

TEST(AsciiGrid, NodataIsFlagged) {
  const RasterLayer l = parse_ascii_grid(
      "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n5 -9999\n");
  EXPECT_FALSE(l.is_nodata(0, 0));
  EXPECT_TRUE(l.is_nodata(0, 1));
}

TEST(AsciiGrid, HeaderMismatchReportsLine) {
  try {
    parse_ascii_grid(
        "ncols 3\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n1 2 3\n4 5\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":8:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_ascii_grid("ncols 2\nnrows 1\ncellsize 1\n1 2\n"), ParseError);
  EXPECT_THROW(parse_ascii_grid("ncols 1\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nx\n"),
               ParseError);
}

TEST(AsciiGrid, UnknownCategoryCode) {
  const CodeTable t = codes();
  EXPECT_NO_THROW(parse_ascii_grid(
      "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n11 41\n", &t));
  EXPECT_THROW(parse_ascii_grid("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n11 42\n", &t),
               DataError);
}

TEST(AsciiGridProperty, WriteReadRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-500.0, 3000.0);
  for (int trial = 0; trial < 10; ++trial) {
    RasterLayer l = layer(3 + trial, 4 + trial % 3, 17.5, {});
    l.xll = 1234.5678;
    l.yll = -0.1;
    l.values.resize(static_cast<std::size_t>(l.nrows * l.ncols));
    for (double& v : l.values) v = u(rng);
    l.values[1] = l.nodata;
    const auto path = std::filesystem::temp_directory_path() / "rg_round_trip.asc";
    write_ascii_grid(l, path);
    const RasterLayer back = load_ascii_grid(path);
    EXPECT_EQ(back.values, l.values);
    EXPECT_EQ(back.xll, l.xll);
    EXPECT_EQ(back.yll, l.yll);
    EXPECT_EQ(back.cellsize, l.cellsize);
    EXPECT_EQ(back.nodata, l.nodata);
    std::filesystem::remove(path);
  }
}

TEST(Resample, SameCellsizeIsIdentity) {
  const RasterLayer l = layer(2, 3, 10.0, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(resample(l, 10.0, ResampleMethod::bilinear).values, l.values);
  EXPECT_EQ(resample(l, 10.0, ResampleMethod::nearest).values, l.values);
}

TEST(Resample, ConstantLayerStaysConstant) {
  const RasterLayer l = layer(6, 9, 1.0, std::vector<double>(54, 0.7));
  for (ResampleMethod m : {ResampleMethod::nearest, ResampleMethod::bilinear}) {
    for (double cs : {1.5, 2.0, 3.0}) {
      const RasterLayer out = resample(l, cs, m);
      for (double v : out.values) EXPECT_EQ(v, 0.7);
    }
  }
}

TEST(Resample, BilinearMidpoint) {
  const RasterLayer l = layer(2, 2, 1.0, {0, 0, 10, 10});
  const RasterLayer out = resample(l, 2.0, ResampleMethod::bilinear);
  ASSERT_EQ(out.nrows, 1);
  ASSERT_EQ(out.ncols, 1);
  EXPECT_DOUBLE_EQ(out.at(0, 0), 5.0);
}

TEST(Resample, BilinearSkipsNodata) {
  const RasterLayer l = layer(2, 2, 1.0, {2, -9999, 4, 6});
  const RasterLayer out = resample(l, 2.0, ResampleMethod::bilinear);
  EXPECT_DOUBLE_EQ(out.at(0, 0), 4.0);
}

TEST(Resample, NearestTakesEnclosingPixel) {
  const RasterLayer l = layer(3, 3, 1.0, {1, 2, 3, 4, 5, 6, 7, 8, 9}, LayerKind::categorical);
  const RasterLayer out = resample(l, 3.0, ResampleMethod::nearest);
  ASSERT_EQ(out.values.size(), 1u);
  EXPECT_EQ(out.at(0, 0), 5.0);
}

TEST(Resample, Errors) {
  const RasterLayer cat = layer(2, 2, 1.0, {1, 2, 3, 4}, LayerKind::categorical);
  EXPECT_THROW(resample(cat, 2.0, ResampleMethod::bilinear), DataError);
  EXPECT_THROW(resample(cat, 0.5, ResampleMethod::nearest), DataError);
}

TEST(ResampleProperty, BilinearStaysInRange) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-50.0, 80.0);
  for (int trial = 0; trial < 20; ++trial) {
    RasterLayer l = layer(7 + trial % 5, 8 + trial % 3, 1.0, {});
    l.values.resize(static_cast<std::size_t>(l.nrows * l.ncols));
    for (double& v : l.values) v = u(rng);
    const auto [lo, hi] = std::minmax_element(l.values.begin(), l.values.end());
    for (double cs : {1.3, 2.0, 2.7}) {
      for (double v : resample(l, cs, ResampleMethod::bilinear).values) {
        EXPECT_GE(v, *lo);
        EXPECT_LE(v, *hi);
      }
    }
  }
}

TEST(BuildLandscape, ScalesElevationAndEncodesPresence) {
  const RasterLayer elev = layer(2, 2, 1.0, {100, 200, 300, 500});
  const RasterLayer lc = layer(2, 2, 1.0, {11, 41, 41, 0}, LayerKind::categorical);
  const CodeTable t = codes();
  const LandscapeGrid g = build_landscape(&elev, &lc, 1.0, &t);
  ASSERT_EQ(g.landcover_types, 2);
  EXPECT_EQ(g.landcover_names[0], "open water");
  EXPECT_EQ((*g.elevation)[0], 0.0);
  EXPECT_EQ((*g.elevation)[3], 10.0);
  EXPECT_DOUBLE_EQ((*g.elevation)[1], 2.5);
  EXPECT_TRUE(g.present(0, 0));
  EXPECT_TRUE(g.present(1, 1));
  EXPECT_FALSE(g.present(3, 0));
  EXPECT_FALSE(g.present(3, 1));
  EXPECT_EQ(g.unclassified[3], 1);
}

TEST(BuildLandscape, NodataCellsAreMasked) {
  const RasterLayer elev = layer(2, 3, 1.0, {1, 2, -9999, 4, 5, 6});
  const LandscapeGrid g = build_landscape(&elev, nullptr, 1.0, nullptr);
  EXPECT_EQ(g.mask, (std::vector<std::uint8_t>{1, 1, 0, 1, 1, 1}));
  const EdgeGraph graph = build_grid_graph(g);
  EXPECT_EQ(graph.num_nodes(), 5);
  EXPECT_EQ(graph.num_edges(), 5);
}

TEST(BuildLandscape, AllNodataIsError) {
  const RasterLayer elev = layer(2, 2, 1.0, {-9999, -9999, -9999, -9999});
  EXPECT_THROW(build_landscape(&elev, nullptr, 1.0, nullptr), DataError);
}

TEST(BuildLandscape, SingleTypeGivesConstantPresence) {
  const RasterLayer lc = layer(3, 3, 1.0, std::vector<double>(9, 41), LayerKind::categorical);
  const CodeTable t = codes();
  const EdgeGraph g = build_grid_graph(build_landscape(nullptr, &lc, 1.0, &t));
  EXPECT_EQ(g.landcover_presence()[0], 0.0);
  EXPECT_EQ(g.landcover_presence()[1], 1.0);
  for (int k = 0; k < g.num_edges(); ++k) EXPECT_EQ(g.landcover_features()(k, 1), 1.0);
}

TEST(BuildLandscape, ExtentMismatch) {
  const RasterLayer elev = layer(4, 4, 1.0, std::vector<double>(16, 1.0));
  RasterLayer lc = layer(4, 4, 1.0, std::vector<double>(16, 11), LayerKind::categorical);
  lc.xll = 3.0;
  const CodeTable t = codes();
  EXPECT_THROW(build_landscape(&elev, &lc, 1.0, &t), DataError);
  EXPECT_THROW(build_landscape(nullptr, nullptr, 1.0, nullptr), DataError);
}

TEST(Fst, AcceptsSymmetricTable) {
  const FstTable t = parse_fst(
      "id,row,col\nA,0,0\nB,1,2\nC,2,1\nFST\n0,0.1,0.2\n0.1,0,0.3\n0.2,0.3,0\n");
  ASSERT_EQ(t.populations.size(), 3u);
  EXPECT_EQ(t.populations[1].id, "B");
  EXPECT_EQ(t.populations[1].col, 2);
  EXPECT_DOUBLE_EQ(t.F.values(2, 1), 0.3);
}

TEST(Fst, RejectsBadMatrices) {
  EXPECT_THROW(parse_fst("id,row,col\nA,0,0\nB,1,1\nFST\n0,0.1\n0.2,0\n"), DataError);
  EXPECT_THROW(parse_fst("id,row,col\nA,0,0\nB,1,1\nFST\n0.1,0.1\n0.1,0\n"), DataError);
  EXPECT_THROW(parse_fst("id,row,col\nA,0,0\nB,1,1\nFST\n0,1.5\n1.5,0\n"), DataError);
  EXPECT_THROW(parse_fst("id,row,col\nA,0,0\nB,1,1\nFST\n0,0.1\n"), ParseError);
  EXPECT_THROW(parse_fst("name,x,y\nA,0,0\nFST\n0\n"), ParseError);
}

TEST(Fst, WriteLoadRoundTrip) {
  FstTable t = parse_fst("id,row,col\nA,0,0\nB,3,4\nFST\n0,0.0123456789\n0.0123456789,0\n");
  const auto path = std::filesystem::temp_directory_path() / "rg_fst_round_trip.csv";
  write_fst(t, path);
  const FstTable back = load_fst(path);
  EXPECT_EQ(back.F.values, t.F.values);
  EXPECT_EQ(back.populations[1].row, 3);
  std::filesystem::remove(path);
}

TEST(Fst, SnapsToNearestValidCell) {
  const RasterLayer elev = layer(3, 3, 1.0, {1, 2, 3, 4, -9999, 6, 7, 8, 9});
  const EdgeGraph g = build_grid_graph(build_landscape(&elev, nullptr, 1.0, nullptr));
  const FstTable t = parse_fst("id,row,col\nA,1,1\nB,0,0\nFST\n0,0.2\n0.2,0\n");
  const SnappedSamples s = snap_populations(t, g);
  EXPECT_EQ(s.snap_distance[0], 1.0);
  EXPECT_EQ(s.snap_distance[1], 0.0);
  EXPECT_EQ(s.samples.nodes[1], *g.node_at(0, 0));
  const FstTable clash = parse_fst("id,row,col\nA,1,1\nB,0,1\nFST\n0,0.2\n0.2,0\n");
  EXPECT_THROW(snap_populations(clash, g), DataError);
}

TEST(CodeTable, LoadAndClassify) {
  const auto path = std::filesystem::temp_directory_path() / "rg_codes.csv";
  {
    std::ofstream out(path);
    out << "code,name\n11,Open water\n0,unclassified\n41,Forest\n";
  }
  const CodeTable t = CodeTable::load(path);
  EXPECT_TRUE(t.is_unclassified(0));
  EXPECT_FALSE(t.is_unclassified(11));
  EXPECT_EQ(t.type_codes(), (std::vector<int>{11, 41}));
  EXPECT_EQ(t.type_index(41), 1);
  EXPECT_EQ(t.type_index(5), -1);
  std::filesystem::remove(path);
}
