#include "biotms/mesh.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "biotms/errors.hpp"

namespace biotms {

std::span<const int> FineMesh::cells_of_node(int node) const {
  const auto begin = node_cell_offsets[node];
  const auto end = node_cell_offsets[node + 1];
  return {node_cell_list.data() + begin, static_cast<std::size_t>(end - begin)};
}

double FineMesh::signed_area(int cell) const {
  const auto& t = cells[cell];
  const Point a = nodes[t[0]], b = nodes[t[1]], c = nodes[t[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Point FineMesh::centroid(int cell) const {
  const auto& t = cells[cell];
  return {(nodes[t[0]].x + nodes[t[1]].x + nodes[t[2]].x) / 3.0,
          (nodes[t[0]].y + nodes[t[1]].y + nodes[t[2]].y) / 3.0};
}

FineMesh build_fine_mesh(int n) {
  if (n < 1) {
    throw InvalidInput("invalid resolution: fine mesh needs n >= 1, got " + std::to_string(n));
  }
  FineMesh mesh;
  mesh.n = n;
  const int side = n + 1;
  mesh.nodes.reserve(static_cast<std::size_t>(side) * side);
  mesh.boundary.reserve(mesh.nodes.capacity());
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      mesh.nodes.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
      std::uint8_t tag = kInterior;
      if (i == 0) tag |= kLeft;
      if (i == n) tag |= kRight;
      if (j == 0) tag |= kBottom;
      if (j == n) tag |= kTop;
      mesh.boundary.push_back(tag);
    }
  }

  auto id = [side](int i, int j) { return j * side + i; };
  mesh.cells.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      mesh.cells.push_back({v00, v10, v11});
      mesh.cells.push_back({v00, v11, v01});
    }
  }

  std::vector<int> counts(mesh.nodes.size() + 1, 0);
  for (const auto& t : mesh.cells)
    for (int v : t) ++counts[v + 1];
  for (std::size_t k = 1; k < counts.size(); ++k) counts[k] += counts[k - 1];
  mesh.node_cell_offsets = counts;
  mesh.node_cell_list.resize(mesh.cells.size() * 3);
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (int v : mesh.cells[c]) mesh.node_cell_list[counts[v]++] = c;
  return mesh;
}

double CoarseGrid::hat(int cell, int vertex, Point p) const {
  const auto& t = coarse_cells[cell];
  const Point a = coords[t[vertex]];
  const Point b = coords[t[(vertex + 1) % 3]];
  const Point c = coords[t[(vertex + 2) % 3]];
  const double area2 = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
  const double sub2 = (c.x - b.x) * (p.y - b.y) - (p.x - b.x) * (c.y - b.y);
  return sub2 / area2;
}

CoarseGrid build_coarse_grid(const FineMesh& fine, int n_coarse) {
  if (n_coarse < 1 || fine.n % n_coarse != 0) {
    throw InvalidInput("nesting error: fine resolution " + std::to_string(fine.n) +
                       " is not divisible by coarse resolution " + std::to_string(n_coarse));
  }
  CoarseGrid cg;
  cg.n = n_coarse;
  cg.ratio = fine.n / n_coarse;
  const int side = n_coarse + 1;
  for (int J = 0; J < side; ++J) {
    for (int I = 0; I < side; ++I) {
      const int f = J * cg.ratio * (fine.n + 1) + I * cg.ratio;
      cg.coarse_nodes.push_back(f);
      cg.coords.push_back(fine.nodes[f]);
    }
  }
  auto id = [side](int i, int j) { return j * side + i; };
  for (int J = 0; J < n_coarse; ++J) {
    for (int I = 0; I < n_coarse; ++I) {
      const int v00 = id(I, J), v10 = id(I + 1, J), v01 = id(I, J + 1), v11 = id(I + 1, J + 1);
      cg.coarse_cells.push_back({v00, v10, v11});
      cg.coarse_cells.push_back({v00, v11, v01});
    }
  }

  // Fine square (i, j) sits in coarse square (i/r, j/r) at local offset (a, b).
  // a > b lies below the coarse diagonal, a < b above; on the diagonal the
  // fine lower/upper cells follow the coarse ones.
  cg.cell_to_fine.assign(cg.coarse_cells.size(), {});
  cg.fine_to_coarse_cell.assign(fine.cells.size(), -1);
  for (int j = 0; j < fine.n; ++j) {
    for (int i = 0; i < fine.n; ++i) {
      const int I = i / cg.ratio, J = j / cg.ratio;
      const int a = i - I * cg.ratio, b = j - J * cg.ratio;
      const int square = 2 * (J * n_coarse + I);
      for (int half = 0; half < 2; ++half) {
        const int fc = 2 * (j * fine.n + i) + half;
        int cc;
        if (a > b) cc = square;
        else if (a < b) cc = square + 1;
        else cc = square + half;
        cg.fine_to_coarse_cell[fc] = cc;
        cg.cell_to_fine[cc].push_back(fc);
      }
    }
  }
  for (auto& v : cg.cell_to_fine) std::sort(v.begin(), v.end());

  cg.node_to_cells.assign(cg.coarse_nodes.size(), {});
  for (int c = 0; c < cg.num_cells(); ++c)
    for (int v : cg.coarse_cells[c]) cg.node_to_cells[v].push_back(c);
  return cg;
}

int Neighborhood::local_index(int fine_node) const {
  auto it = std::lower_bound(fine_nodes.begin(), fine_nodes.end(), fine_node);
  if (it == fine_nodes.end() || *it != fine_node) return -1;
  return static_cast<int>(it - fine_nodes.begin());
}

Neighborhood make_cell_region(const FineMesh& fine, std::vector<int> cells) {
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());

  Neighborhood nb;
  std::vector<std::pair<int, int>> edges;
  edges.reserve(cells.size() * 3);
  for (int c : cells) {
    const auto& t = fine.cells[c];
    for (int k = 0; k < 3; ++k) {
      nb.fine_nodes.push_back(t[k]);
      const int a = t[k], b = t[(k + 1) % 3];
      edges.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  std::sort(nb.fine_nodes.begin(), nb.fine_nodes.end());
  nb.fine_nodes.erase(std::unique(nb.fine_nodes.begin(), nb.fine_nodes.end()), nb.fine_nodes.end());

  // Edges used by exactly one cell of the region form its outline.
  std::sort(edges.begin(), edges.end());
  std::vector<int> outline;
  for (std::size_t k = 0; k < edges.size();) {
    std::size_t m = k;
    while (m < edges.size() && edges[m] == edges[k]) ++m;
    if (m - k == 1) {
      outline.push_back(edges[k].first);
      outline.push_back(edges[k].second);
    }
    k = m;
  }
  std::sort(outline.begin(), outline.end());
  outline.erase(std::unique(outline.begin(), outline.end()), outline.end());
  nb.boundary_nodes = std::move(outline);
  std::set_difference(nb.fine_nodes.begin(), nb.fine_nodes.end(), nb.boundary_nodes.begin(),
                      nb.boundary_nodes.end(), std::back_inserter(nb.interior_nodes));
  nb.fine_cells = std::move(cells);
  return nb;
}

Neighborhood neighborhood(const FineMesh& fine, const CoarseGrid& cg, int coarse_node) {
  if (coarse_node < 0 || coarse_node >= cg.num_nodes()) {
    throw InvalidInput("coarse node index out of range: " + std::to_string(coarse_node));
  }
  std::vector<int> cells;
  for (int cc : cg.node_to_cells[coarse_node])
    cells.insert(cells.end(), cg.cell_to_fine[cc].begin(), cg.cell_to_fine[cc].end());
  Neighborhood nb = make_cell_region(fine, std::move(cells));
  nb.center = coarse_node;
  nb.coarse_cells = cg.node_to_cells[coarse_node];
  return nb;
}

Neighborhood coarse_cell_region(const FineMesh& fine, const CoarseGrid& cg, int coarse_cell) {
  Neighborhood nb = make_cell_region(fine, cg.cell_to_fine.at(coarse_cell));
  nb.coarse_cells = {coarse_cell};
  return nb;
}

Neighborhood oversample(const FineMesh& fine, const Neighborhood& nb, int layers) {
  if (layers < 0) throw InvalidInput("oversampling layer count must be >= 0");
  if (layers == 0) return nb;
  std::vector<char> in_cells(fine.cells.size(), 0);
  for (int c : nb.fine_cells) in_cells[c] = 1;
  std::vector<int> nodes = nb.fine_nodes;
  std::vector<int> cells = nb.fine_cells;
  for (int layer = 0; layer < layers; ++layer) {
    std::vector<int> added;
    for (int v : nodes)
      for (int c : fine.cells_of_node(v))
        if (!in_cells[c]) {
          in_cells[c] = 1;
          added.push_back(c);
        }
    if (added.empty()) break;
    cells.insert(cells.end(), added.begin(), added.end());
    for (int c : added)
      for (int v : fine.cells[c]) nodes.push_back(v);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  }
  Neighborhood grown = make_cell_region(fine, std::move(cells));
  grown.center = nb.center;
  grown.coarse_cells = nb.coarse_cells;
  grown.layers = nb.layers + layers;
  return grown;
}

}  // namespace biotms
