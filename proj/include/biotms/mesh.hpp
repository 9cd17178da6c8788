#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace biotms {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Boundary side flags. Corner nodes carry two flags.
enum BoundarySide : std::uint8_t {
  kInterior = 0,
  kLeft = 1,
  kRight = 2,
  kBottom = 4,
  kTop = 8,
};

using Triangle = std::array<int, 3>;

/// Structured triangulation of the unit square with n intervals per side.
/// Every square is split along its lower-left to upper-right diagonal.
///
/// Node (i, j) has index j*(n+1) + i and sits at (i/n, j/n). Square (i, j)
/// holds cells 2*(j*n+i) (below the diagonal) and 2*(j*n+i)+1 (above).
struct FineMesh {
  int n = 0;
  std::vector<Point> nodes;
  std::vector<Triangle> cells;
  std::vector<std::uint8_t> boundary;  // BoundarySide bitmask per node

  // node -> incident cells, CSR layout
  std::vector<int> node_cell_offsets;
  std::vector<int> node_cell_list;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_cells() const { return static_cast<int>(cells.size()); }
  std::span<const int> cells_of_node(int node) const;
  double signed_area(int cell) const;
  Point centroid(int cell) const;
};

FineMesh build_fine_mesh(int n);

/// Coarse triangulation nested in a FineMesh. Coarse node (I, J) coincides
/// with fine node (I*r, J*r), r = fine n / coarse n.
struct CoarseGrid {
  int n = 0;
  int ratio = 0;
  std::vector<int> coarse_nodes;  // coarse node -> coincident fine node
  std::vector<Point> coords;
  std::vector<Triangle> coarse_cells;
  std::vector<std::vector<int>> cell_to_fine;  // sorted fine cell ids
  std::vector<int> fine_to_coarse_cell;
  std::vector<std::vector<int>> node_to_cells;  // coarse node -> coarse cells

  int num_nodes() const { return static_cast<int>(coarse_nodes.size()); }
  int num_cells() const { return static_cast<int>(coarse_cells.size()); }

  /// Value of the coarse P1 hat of `vertex` (0..2, local to `cell`) at p.
  double hat(int cell, int vertex, Point p) const;
};

CoarseGrid build_coarse_grid(const FineMesh& fine, int n_coarse);

/// A set of fine cells with the derived node sets. Used for coarse
/// neighborhoods, their oversampled versions, and single coarse cells.
struct Neighborhood {
  int center = -1;                 // coarse node, -1 when not node-centred
  std::vector<int> coarse_cells;   // coarse cells whose closure holds center
  std::vector<int> fine_cells;     // sorted
  std::vector<int> fine_nodes;     // sorted, interior U boundary
  std::vector<int> interior_nodes; // sorted
  std::vector<int> boundary_nodes; // sorted, nodes on the outline of the cell union
  int layers = 0;

  /// Local index of a global fine node, or -1.
  int local_index(int fine_node) const;
  bool contains_node(int fine_node) const { return local_index(fine_node) >= 0; }
};

/// Builds the node sets for an arbitrary set of fine cells.
Neighborhood make_cell_region(const FineMesh& fine, std::vector<int> cells);

Neighborhood neighborhood(const FineMesh& fine, const CoarseGrid& cg, int coarse_node);

/// Single coarse cell as a region (for partition-of-unity solves).
Neighborhood coarse_cell_region(const FineMesh& fine, const CoarseGrid& cg, int coarse_cell);

/// Grows `nb` by `layers` rings of fine cells sharing a node with the
/// current node set. Growth stops silently at the domain boundary.
Neighborhood oversample(const FineMesh& fine, const Neighborhood& nb, int layers);

}  // namespace biotms
