#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "resistograph/landscape.hpp"

namespace resistograph {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct NodeId {
  std::int32_t index = 0;

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

struct EdgeFeatures {
  std::optional<double> elevation;
  std::vector<double> landcover;
};

/// Canonical orientation i < j.
struct Edge {
  NodeId i;
  NodeId j;
};

/// Node set, undirected edge list and per-edge features of a landscape graph.
/// Weights are not part of the graph: they are a function of the model
/// parameters and are passed to assemble_laplacian() each time they change.
class EdgeGraph {
 public:
  EdgeGraph() = default;

  /// Bare topology, for tests and hand-built circuits. Rejects self-loops,
  /// duplicates and out-of-range endpoints; edges are re-oriented to i < j.
  static EdgeGraph from_edges(int num_nodes, std::vector<Edge> edges);

  int num_nodes() const noexcept { return num_nodes_; }
  int num_edges() const noexcept { return static_cast<int>(edges_.size()); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(int k) const { return edges_[static_cast<std::size_t>(k)]; }

  bool has_elevation() const noexcept { return elevation_.size() > 0; }
  int landcover_dim() const noexcept { return static_cast<int>(landcover_.cols()); }

  double edge_elevation(int k) const { return elevation_[k]; }
  const Eigen::VectorXd& elevation_features() const noexcept { return elevation_; }
  /// m x q, row k holds the landcover encoding of edge k.
  const Eigen::MatrixXd& landcover_features() const noexcept { return landcover_; }
  EdgeFeatures features(int k) const;

  bool touches_unclassified(int k) const {
    return !unclassified_.empty() && unclassified_[static_cast<std::size_t>(k)] != 0;
  }

  /// m x n, row k = e_i - e_j.
  const SparseMatrix& incidence() const noexcept { return incidence_; }

  /// Grid bookkeeping. For graphs not built from a grid, rows()==0 and
  /// cell_of() is the identity.
  int grid_rows() const noexcept { return grid_rows_; }
  int grid_cols() const noexcept { return grid_cols_; }
  int cell_of(NodeId v) const;
  std::optional<NodeId> node_at_cell(int cell) const;
  std::optional<NodeId> node_at(int row, int col) const;

  /// Fraction of graph nodes at which each landcover type is present.
  const Eigen::VectorXd& landcover_presence() const noexcept { return presence_fraction_; }
  const std::vector<std::string>& landcover_names() const noexcept { return landcover_names_; }

 private:
  friend EdgeGraph build_grid_graph(const LandscapeGrid& grid);

  void finalize();

  int num_nodes_ = 0;
  std::vector<Edge> edges_;
  Eigen::VectorXd elevation_;
  Eigen::MatrixXd landcover_;
  std::vector<std::uint8_t> unclassified_;
  SparseMatrix incidence_;

  int grid_rows_ = 0;
  int grid_cols_ = 0;
  std::vector<int> node_cell_;
  std::vector<int> cell_node_;
  Eigen::VectorXd presence_fraction_;
  std::vector<std::string> landcover_names_;
};

/// One node per valid cell, one edge per rook-adjacent pair of valid cells.
/// Only the largest connected component is kept. On a fully valid grid node
/// (r, c) has index r*C + c.
EdgeGraph build_grid_graph(const LandscapeGrid& grid);

/// Features of the edge between two rook-adjacent cells: mean scaled
/// elevation, and per landcover type 0 / 0.5 / 1 for presence at neither,
/// one, or both cells.
EdgeFeatures derive_edge_features(const LandscapeGrid& grid, int cell_a, int cell_b);

/// L = D - A with L_ii = sum of incident weights and L_ij = -w_ij.
SparseMatrix assemble_laplacian(const EdgeGraph& graph, const Eigen::VectorXd& weights);

/// Closed-form edge count of a fully valid R x C rook grid.
constexpr long grid_edge_count(long rows, long cols) {
  return rows * (cols - 1) + cols * (rows - 1);
}

}  // namespace resistograph
