#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "biotms/errors.hpp"
#include "biotms/mesh.hpp"

using namespace biotms;

namespace {

std::map<std::pair<int, int>, int> edge_counts(const FineMesh& m) {
  std::map<std::pair<int, int>, int> edges;
  for (const auto& t : m.cells)
    for (int e = 0; e < 3; ++e) {
      int a = t[e], b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edges[{a, b}];
    }
  return edges;
}

}  // namespace

TEST(FineMesh, Counts) {
  const auto m60 = build_fine_mesh(60);
  EXPECT_EQ(m60.num_nodes(), 3721);
  EXPECT_EQ(m60.num_cells(), 7200);
  EXPECT_EQ(3 * m60.num_nodes(), 11163);
  const auto m1 = build_fine_mesh(1);
  EXPECT_EQ(m1.num_nodes(), 4);
  EXPECT_EQ(m1.num_cells(), 2);
  const auto m5 = build_fine_mesh(5);
  EXPECT_EQ(m5.num_nodes(), 36);
  EXPECT_EQ(m5.num_cells(), 50);
}

TEST(FineMesh, RejectsZeroResolution) {
  EXPECT_THROW(build_fine_mesh(0), InvalidInput);
}

TEST(FineMesh, PositiveAreasAndEdgeSharing) {
  const auto m = build_fine_mesh(7);
  double total = 0.0;
  for (int c = 0; c < m.num_cells(); ++c) {
    EXPECT_GT(m.signed_area(c), 0.0);
    total += m.signed_area(c);
  }
  EXPECT_NEAR(total, 1.0, 1e-14);
  for (const auto& [e, count] : edge_counts(m)) {
    const bool on_boundary = (m.boundary[e.first] & m.boundary[e.second]) != 0;
    EXPECT_EQ(count, on_boundary ? 1 : 2);
  }
}

TEST(FineMesh, NodeNumbering) {
  const auto m = build_fine_mesh(4);
  EXPECT_DOUBLE_EQ(m.nodes[2 * 5 + 3].x, 0.75);
  EXPECT_DOUBLE_EQ(m.nodes[2 * 5 + 3].y, 0.5);
  EXPECT_EQ(m.boundary[0], kLeft | kBottom);
  EXPECT_EQ(m.boundary[24], kRight | kTop);
  EXPECT_EQ(m.boundary[6], kInterior);
  // lower triangle of square (1, 2) lies below the diagonal
  const Point c = m.centroid(2 * (2 * 4 + 1));
  EXPECT_LT(c.y - 0.5, c.x - 0.25);
}

TEST(CoarseGrid, NestedCounts) {
  const auto m = build_fine_mesh(60);
  const auto cg = build_coarse_grid(m, 5);
  EXPECT_EQ(cg.num_nodes(), 36);
  EXPECT_EQ(cg.num_cells(), 50);
  EXPECT_EQ(cg.ratio, 12);
  std::vector<int> seen(m.num_cells(), 0);
  for (const auto& cells : cg.cell_to_fine) {
    // 12x12 fine squares split in half by the coarse diagonal: 144 triangles
    EXPECT_EQ(cells.size(), 144u);
    for (int c : cells) ++seen[c];
  }
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
  for (int i = 0; i < cg.num_nodes(); ++i) {
    EXPECT_DOUBLE_EQ(m.nodes[cg.coarse_nodes[i]].x, cg.coords[i].x);
    EXPECT_DOUBLE_EQ(m.nodes[cg.coarse_nodes[i]].y, cg.coords[i].y);
  }
}

TEST(CoarseGrid, NonDivisibleIsNestingError) {
  const auto m = build_fine_mesh(60);
  EXPECT_THROW(build_coarse_grid(m, 7), InvalidInput);
}

TEST(CoarseGrid, DegenerateNestingIsOneToOne) {
  const auto m = build_fine_mesh(4);
  const auto cg = build_coarse_grid(m, 4);
  for (int k = 0; k < cg.num_cells(); ++k) {
    ASSERT_EQ(cg.cell_to_fine[k].size(), 1u);
    EXPECT_EQ(cg.cell_to_fine[k][0], k);
  }
}

TEST(CoarseGrid, CoarseEdgesAreUnionsOfFineEdges) {
  const auto m = build_fine_mesh(12);
  const auto cg = build_coarse_grid(m, 3);
  const auto edges = edge_counts(m);
  for (const auto& t : cg.coarse_cells)
    for (int e = 0; e < 3; ++e) {
      const Point a = cg.coords[t[e]], b = cg.coords[t[(e + 1) % 3]];
      // walk the fine nodes along the segment
      const int steps = cg.ratio;
      for (int s = 0; s < steps; ++s) {
        auto node_at = [&](int k) {
          const double x = a.x + (b.x - a.x) * k / steps, y = a.y + (b.y - a.y) * k / steps;
          return static_cast<int>(std::lround(y * m.n)) * (m.n + 1) + static_cast<int>(std::lround(x * m.n));
        };
        int p = node_at(s), q = node_at(s + 1);
        if (p > q) std::swap(p, q);
        EXPECT_TRUE(edges.count({p, q})) << "coarse edge not resolved by fine edges";
      }
    }
}

TEST(CoarseGrid, HatIsBarycentric) {
  const auto m = build_fine_mesh(6);
  const auto cg = build_coarse_grid(m, 3);
  for (int k = 0; k < cg.num_cells(); ++k)
    for (int fc : cg.cell_to_fine[k]) {
      const Point c = m.centroid(fc);
      double sum = 0.0;
      for (int v = 0; v < 3; ++v) {
        const double h = cg.hat(k, v, c);
        EXPECT_GE(h, -1e-14);
        sum += h;
      }
      EXPECT_NEAR(sum, 1.0, 1e-14);
    }
}

TEST(Neighborhood, CoarseCellCounts) {
  const auto m = build_fine_mesh(6);
  const auto cg = build_coarse_grid(m, 3);
  // independent enumeration over coarse triangles
  for (int i = 0; i < cg.num_nodes(); ++i) {
    int expected = 0;
    for (const auto& t : cg.coarse_cells) expected += std::count(t.begin(), t.end(), i);
    EXPECT_EQ(static_cast<int>(neighborhood(m, cg, i).coarse_cells.size()), expected);
  }
  EXPECT_EQ(neighborhood(m, cg, 1 * 4 + 1).coarse_cells.size(), 6u);  // interior
  EXPECT_EQ(neighborhood(m, cg, 0).coarse_cells.size(), 2u);          // diagonal corner
  EXPECT_EQ(neighborhood(m, cg, 3).coarse_cells.size(), 1u);          // off-diagonal corner
  EXPECT_EQ(neighborhood(m, cg, 15).coarse_cells.size(), 2u);
  EXPECT_EQ(neighborhood(m, cg, 12).coarse_cells.size(), 1u);
}

TEST(Neighborhood, NodeSetsAndCoverage) {
  const auto m = build_fine_mesh(12);
  const auto cg = build_coarse_grid(m, 3);
  std::vector<int> covered(m.num_cells(), 0);
  std::vector<char> node_covered(m.num_nodes(), 0);
  for (int i = 0; i < cg.num_nodes(); ++i) {
    const auto nb = neighborhood(m, cg, i);
    for (int c : nb.fine_cells) ++covered[c];
    for (int v : nb.fine_nodes) node_covered[v] = 1;
    std::vector<int> merged;
    std::set_union(nb.interior_nodes.begin(), nb.interior_nodes.end(), nb.boundary_nodes.begin(),
                   nb.boundary_nodes.end(), std::back_inserter(merged));
    EXPECT_EQ(merged, nb.fine_nodes);
    std::vector<int> common;
    std::set_intersection(nb.interior_nodes.begin(), nb.interior_nodes.end(),
                          nb.boundary_nodes.begin(), nb.boundary_nodes.end(),
                          std::back_inserter(common));
    EXPECT_TRUE(common.empty());
    for (std::size_t a = 0; a < nb.fine_nodes.size(); ++a)
      EXPECT_EQ(nb.local_index(nb.fine_nodes[a]), static_cast<int>(a));
    EXPECT_TRUE(nb.contains_node(cg.coarse_nodes[i]));
  }
  for (int c : covered) {
    EXPECT_GE(c, 1);
    EXPECT_LE(c, 3);
  }
  EXPECT_TRUE(std::all_of(node_covered.begin(), node_covered.end(), [](char c) { return c; }));
}

TEST(Neighborhood, InteriorOutline) {
  const auto m = build_fine_mesh(12);
  const auto cg = build_coarse_grid(m, 3);
  const auto nb = neighborhood(m, cg, 5);  // interior coarse node (1, 1)
  // hexagonal patch: 6 coarse triangles of 4x4 fine squares halves = 6 * 16 cells
  EXPECT_EQ(nb.fine_cells.size(), 96u);
  // outline: 6 coarse edges of 4 fine edges each
  EXPECT_EQ(nb.boundary_nodes.size(), 24u);
}

TEST(Oversample, MonotoneAndSaturating) {
  const auto m = build_fine_mesh(12);
  const auto cg = build_coarse_grid(m, 3);
  for (int i : {0, 5, 15}) {
    const auto nb = neighborhood(m, cg, i);
    EXPECT_EQ(oversample(m, nb, 0).fine_nodes, nb.fine_nodes);
    auto prev = nb;
    for (int t = 1; t <= 30; ++t) {
      const auto cur = oversample(m, nb, t);
      EXPECT_TRUE(std::includes(cur.fine_nodes.begin(), cur.fine_nodes.end(), prev.fine_nodes.begin(),
                                prev.fine_nodes.end()));
      EXPECT_TRUE(std::includes(cur.fine_cells.begin(), cur.fine_cells.end(), nb.fine_cells.begin(),
                                nb.fine_cells.end()));
      prev = cur;
    }
    EXPECT_EQ(prev.fine_cells.size(), static_cast<std::size_t>(m.num_cells()));
    EXPECT_TRUE(prev.boundary_nodes.size() == static_cast<std::size_t>(4 * m.n));
  }
  const auto nb = neighborhood(m, cg, 5);
  EXPECT_GT(oversample(m, nb, 4).fine_nodes.size(), nb.fine_nodes.size());
  EXPECT_EQ(oversample(m, nb, 4).layers, 4);
}
