#include "resistograph/grid_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "resistograph/error.hpp"

namespace resistograph {

void LandscapeGrid::validate() const {
  if (rows <= 0 || cols <= 0) throw DataError("landscape grid: empty grid");
  const auto cells = static_cast<std::size_t>(num_cells());
  if (mask.size() != cells) {
    throw DataError("landscape grid: mask has " + std::to_string(mask.size()) +
                    " cells, expected " + std::to_string(cells));
  }
  if (!has_elevation() && !has_landcover()) {
    throw DataError("landscape grid: neither elevation nor landcover layer present");
  }
  if (has_elevation() && elevation->size() != cells) {
    throw DataError("landscape grid: elevation layer dimensions do not match grid");
  }
  if (has_landcover() && presence.size() != cells * static_cast<std::size_t>(landcover_types)) {
    throw DataError("landscape grid: landcover layer dimensions do not match grid");
  }
  if (!unclassified.empty() && unclassified.size() != cells) {
    throw DataError("landscape grid: unclassified flags do not match grid");
  }
}

EdgeFeatures EdgeGraph::features(int k) const {
  EdgeFeatures f;
  if (has_elevation()) f.elevation = elevation_[k];
  f.landcover.resize(static_cast<std::size_t>(landcover_dim()));
  for (int t = 0; t < landcover_dim(); ++t) f.landcover[static_cast<std::size_t>(t)] = landcover_(k, t);
  return f;
}

int EdgeGraph::cell_of(NodeId v) const {
  if (node_cell_.empty()) return v.index;
  return node_cell_.at(static_cast<std::size_t>(v.index));
}

std::optional<NodeId> EdgeGraph::node_at_cell(int cell) const {
  if (cell_node_.empty()) {
    if (cell >= 0 && cell < num_nodes_) return NodeId{cell};
    return std::nullopt;
  }
  if (cell < 0 || cell >= static_cast<int>(cell_node_.size())) return std::nullopt;
  const int v = cell_node_[static_cast<std::size_t>(cell)];
  if (v < 0) return std::nullopt;
  return NodeId{v};
}

std::optional<NodeId> EdgeGraph::node_at(int row, int col) const {
  if (grid_rows_ == 0 || row < 0 || col < 0 || row >= grid_rows_ || col >= grid_cols_) {
    return std::nullopt;
  }
  return node_at_cell(row * grid_cols_ + col);
}

void EdgeGraph::finalize() {
  const auto m = static_cast<Eigen::Index>(edges_.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges_.size() * 2);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Edge& e = edges_[static_cast<std::size_t>(k)];
    triplets.emplace_back(k, e.i.index, 1.0);
    triplets.emplace_back(k, e.j.index, -1.0);
  }
  incidence_.resize(m, num_nodes_);
  incidence_.setFromTriplets(triplets.begin(), triplets.end());
  incidence_.makeCompressed();
}

EdgeGraph EdgeGraph::from_edges(int num_nodes, std::vector<Edge> edges) {
  if (num_nodes < 1) throw DataError("graph must have at least one node");
  std::set<std::pair<int, int>> seen;
  for (Edge& e : edges) {
    if (e.i.index < 0 || e.j.index < 0 || e.i.index >= num_nodes || e.j.index >= num_nodes) {
      throw DataError("edge endpoint out of range");
    }
    if (e.i == e.j) throw DataError("self-loop at node " + std::to_string(e.i.index));
    if (e.j < e.i) std::swap(e.i, e.j);
    if (!seen.emplace(e.i.index, e.j.index).second) {
      throw DataError("duplicate edge (" + std::to_string(e.i.index) + "," +
                      std::to_string(e.j.index) + ")");
    }
  }
  EdgeGraph g;
  g.num_nodes_ = num_nodes;
  g.edges_ = std::move(edges);
  g.finalize();
  return g;
}

namespace {

bool adjacent(const LandscapeGrid& grid, int a, int b) {
  if (a < 0 || b < 0 || a >= grid.num_cells() || b >= grid.num_cells()) return false;
  const int ra = a / grid.cols, ca = a % grid.cols;
  const int rb = b / grid.cols, cb = b % grid.cols;
  return std::abs(ra - rb) + std::abs(ca - cb) == 1;
}

// Labels each valid cell with its component id; -1 for invalid cells.
std::vector<int> label_components(const LandscapeGrid& grid, int& num_components) {
  const int cells = grid.num_cells();
  std::vector<int> label(static_cast<std::size_t>(cells), -1);
  std::vector<int> stack;
  num_components = 0;
  for (int start = 0; start < cells; ++start) {
    if (!grid.valid(start) || label[static_cast<std::size_t>(start)] >= 0) continue;
    const int id = num_components++;
    label[static_cast<std::size_t>(start)] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const int cell = stack.back();
      stack.pop_back();
      const int r = cell / grid.cols, c = cell % grid.cols;
      const int neighbours[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (const auto& nb : neighbours) {
        if (nb[0] < 0 || nb[1] < 0 || nb[0] >= grid.rows || nb[1] >= grid.cols) continue;
        const int other = grid.cell_index(nb[0], nb[1]);
        if (!grid.valid(other) || label[static_cast<std::size_t>(other)] >= 0) continue;
        label[static_cast<std::size_t>(other)] = id;
        stack.push_back(other);
      }
    }
  }
  return label;
}

}  // namespace

EdgeFeatures derive_edge_features(const LandscapeGrid& grid, int cell_a, int cell_b) {
  if (!adjacent(grid, cell_a, cell_b)) {
    throw DataError("cells " + std::to_string(cell_a) + " and " + std::to_string(cell_b) +
                    " are not adjacent");
  }
  EdgeFeatures f;
  if (grid.has_elevation()) {
    const auto& elev = *grid.elevation;
    f.elevation = 0.5 * (elev[static_cast<std::size_t>(cell_a)] + elev[static_cast<std::size_t>(cell_b)]);
  }
  f.landcover.resize(static_cast<std::size_t>(grid.landcover_types));
  for (int t = 0; t < grid.landcover_types; ++t) {
    const int count = (grid.present(cell_a, t) ? 1 : 0) + (grid.present(cell_b, t) ? 1 : 0);
    f.landcover[static_cast<std::size_t>(t)] = 0.5 * count;
  }
  return f;
}

EdgeGraph build_grid_graph(const LandscapeGrid& grid) {
  grid.validate();
  if (grid.num_cells() < 2) throw DataError("landscape grid needs at least 2 cells");

  int num_components = 0;
  const std::vector<int> label = label_components(grid, num_components);
  if (num_components == 0) throw DataError("landscape grid has no valid cells");

  std::vector<int> sizes(static_cast<std::size_t>(num_components), 0);
  for (int l : label) {
    if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
  }
  // Components are numbered in order of their first cell, so the lowest id
  // wins ties.
  const int keep = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

  EdgeGraph g;
  g.grid_rows_ = grid.rows;
  g.grid_cols_ = grid.cols;
  g.cell_node_.assign(static_cast<std::size_t>(grid.num_cells()), -1);
  for (int cell = 0; cell < grid.num_cells(); ++cell) {
    if (label[static_cast<std::size_t>(cell)] != keep) continue;
    g.cell_node_[static_cast<std::size_t>(cell)] = static_cast<int>(g.node_cell_.size());
    g.node_cell_.push_back(cell);
  }
  g.num_nodes_ = static_cast<int>(g.node_cell_.size());
  if (g.num_nodes_ < 2) throw DataError("largest connected component has fewer than 2 cells");

  std::vector<std::pair<int, int>> cell_pairs;
  for (int cell : g.node_cell_) {
    const int r = cell / grid.cols, c = cell % grid.cols;
    if (c + 1 < grid.cols && g.cell_node_[static_cast<std::size_t>(cell + 1)] >= 0) {
      cell_pairs.emplace_back(cell, cell + 1);
    }
    if (r + 1 < grid.rows && g.cell_node_[static_cast<std::size_t>(cell + grid.cols)] >= 0) {
      cell_pairs.emplace_back(cell, cell + grid.cols);
    }
  }

  const auto m = static_cast<Eigen::Index>(cell_pairs.size());
  const int q = grid.landcover_types;
  if (grid.has_elevation()) g.elevation_.resize(m);
  g.landcover_.resize(m, q);
  if (!grid.unclassified.empty()) g.unclassified_.assign(static_cast<std::size_t>(m), 0);
  g.edges_.reserve(cell_pairs.size());

  for (Eigen::Index k = 0; k < m; ++k) {
    const auto [a, b] = cell_pairs[static_cast<std::size_t>(k)];
    g.edges_.push_back({NodeId{g.cell_node_[static_cast<std::size_t>(a)]},
                        NodeId{g.cell_node_[static_cast<std::size_t>(b)]}});
    const EdgeFeatures f = derive_edge_features(grid, a, b);
    if (f.elevation) g.elevation_[k] = *f.elevation;
    for (int t = 0; t < q; ++t) g.landcover_(k, t) = f.landcover[static_cast<std::size_t>(t)];
    if (!grid.unclassified.empty()) {
      g.unclassified_[static_cast<std::size_t>(k)] =
          (grid.unclassified[static_cast<std::size_t>(a)] || grid.unclassified[static_cast<std::size_t>(b)]) ? 1 : 0;
    }
  }

  g.presence_fraction_ = Eigen::VectorXd::Zero(q);
  for (int cell : g.node_cell_) {
    for (int t = 0; t < q; ++t) {
      if (grid.present(cell, t)) g.presence_fraction_[t] += 1.0;
    }
  }
  if (q > 0) g.presence_fraction_ /= static_cast<double>(g.num_nodes_);
  g.landcover_names_ = grid.landcover_names;

  g.finalize();
  return g;
}

SparseMatrix assemble_laplacian(const EdgeGraph& graph, const Eigen::VectorXd& weights) {
  if (weights.size() != graph.num_edges()) {
    throw DataError("weight vector has length " + std::to_string(weights.size()) +
                    ", graph has " + std::to_string(graph.num_edges()) + " edges");
  }
  const int n = graph.num_nodes();
  Eigen::VectorXd degree = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(2 * graph.num_edges() + n));
  for (int k = 0; k < graph.num_edges(); ++k) {
    const double w = weights[k];
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DataError("edge " + std::to_string(k) + " has invalid weight " + std::to_string(w));
    }
    const Edge& e = graph.edge(k);
    triplets.emplace_back(e.i.index, e.j.index, -w);
    triplets.emplace_back(e.j.index, e.i.index, -w);
    degree[e.i.index] += w;
    degree[e.j.index] += w;
  }
  for (int v = 0; v < n; ++v) triplets.emplace_back(v, v, degree[v]);
  SparseMatrix L(n, n);
  L.setFromTriplets(triplets.begin(), triplets.end());
  L.makeCompressed();
  return L;
}

}  // namespace resistograph
