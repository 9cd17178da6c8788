#include "biotms/vtk.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include "biotms/errors.hpp"

namespace biotms {

void write_vtk(const std::string& path, const std::vector<Point>& nodes,
               const std::vector<Triangle>& cells, const VtkFields& fields) {
  const auto np = static_cast<Eigen::Index>(nodes.size());
  const auto nc = static_cast<Eigen::Index>(cells.size());
  for (const auto& [name, v] : fields.point_scalars)
    if (v.size() != np) throw DimensionMismatch("vtk point field '" + name + "' has wrong length");
  for (const auto& [name, v] : fields.point_vectors)
    if (v.size() != 2 * np) throw DimensionMismatch("vtk vector field '" + name + "' has wrong length");
  for (const auto& [name, v] : fields.cell_scalars)
    if (v.size() != nc) throw DimensionMismatch("vtk cell field '" + name + "' has wrong length");

  auto out = fmt::output_file(path);
  out.print("# vtk DataFile Version 3.0\nbiotms\nASCII\nDATASET UNSTRUCTURED_GRID\n");
  out.print("POINTS {} double\n", np);
  for (const auto& p : nodes) out.print("{:.12g} {:.12g} 0\n", p.x, p.y);
  out.print("CELLS {} {}\n", nc, 4 * nc);
  for (const auto& t : cells) out.print("3 {} {} {}\n", t[0], t[1], t[2]);
  out.print("CELL_TYPES {}\n", nc);
  for (Eigen::Index c = 0; c < nc; ++c) out.print("5\n");

  if (!fields.point_scalars.empty() || !fields.point_vectors.empty()) {
    out.print("POINT_DATA {}\n", np);
    for (const auto& [name, v] : fields.point_scalars) {
      out.print("SCALARS {} double 1\nLOOKUP_TABLE default\n", name);
      for (Eigen::Index i = 0; i < np; ++i) out.print("{:.12g}\n", v[i]);
    }
    for (const auto& [name, v] : fields.point_vectors) {
      out.print("VECTORS {} double\n", name);
      for (Eigen::Index i = 0; i < np; ++i) out.print("{:.12g} {:.12g} 0\n", v[2 * i], v[2 * i + 1]);
    }
  }
  if (!fields.cell_scalars.empty()) {
    out.print("CELL_DATA {}\n", nc);
    for (const auto& [name, v] : fields.cell_scalars) {
      out.print("SCALARS {} double 1\nLOOKUP_TABLE default\n", name);
      for (Eigen::Index c = 0; c < nc; ++c) out.print("{:.12g}\n", v[c]);
    }
  }
}

}  // namespace biotms
