#pragma once

#include <string>
#include <utility>
#include <vector>

#include "biotms/assembly.hpp"
#include "biotms/mesh.hpp"

namespace biotms {

/// Fields attached to a legacy-VTK dump. Vector fields hold 2 values per
/// entity (x, y interleaved).
struct VtkFields {
  std::vector<std::pair<std::string, Vector>> point_scalars;
  std::vector<std::pair<std::string, Vector>> point_vectors;
  std::vector<std::pair<std::string, Vector>> cell_scalars;
};

/// ASCII legacy-VTK unstructured grid of triangles.
void write_vtk(const std::string& path, const std::vector<Point>& nodes,
               const std::vector<Triangle>& cells, const VtkFields& fields = {});

inline void write_vtk(const std::string& path, const FineMesh& mesh, const VtkFields& fields = {}) {
  write_vtk(path, mesh.nodes, mesh.cells, fields);
}

}  // namespace biotms
