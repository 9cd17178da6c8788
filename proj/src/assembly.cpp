#include "biotms/assembly.hpp"

#include <array>
#include <fstream>
#include <span>

#include "biotms/errors.hpp"

namespace biotms {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

struct ElementGeometry {
  double area;
  std::array<double, 3> dx;  // d(phi_a)/dx
  std::array<double, 3> dy;
};

ElementGeometry element_geometry(const FineMesh& mesh, int cell) {
  const auto& t = mesh.cells[cell];
  const Point p[3] = {mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]};
  ElementGeometry g{};
  g.area = mesh.signed_area(cell);
  const double inv = 1.0 / (2.0 * g.area);
  for (int a = 0; a < 3; ++a) {
    const Point& b = p[(a + 1) % 3];
    const Point& c = p[(a + 2) % 3];
    g.dx[a] = (b.y - c.y) * inv;
    g.dy[a] = (c.x - b.x) * inv;
  }
  return g;
}

// Adds the element contributions of `form` on `cell`. `dof_of` maps a global
// node to its row/column base index (node number, or -1 to skip).
template <class NodeMap>
void element_triplets(Form form, const FineMesh& mesh, const MaterialField& mat, int cell,
                      const NodeMap& node_of, Triplets& out) {
  const ElementGeometry g = element_geometry(mesh, cell);
  const auto& t = mesh.cells[cell];
  int local[3];
  for (int a = 0; a < 3; ++a) local[a] = node_of(t[a]);

  auto scalar_mass = [&](double w) {
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        out.emplace_back(local[a], local[b], w * g.area / 12.0 * (a == b ? 2.0 : 1.0));
  };

  switch (form) {
    case Form::DarcyStiffness: {
      const double w = mat.mobility(cell) * g.area;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          out.emplace_back(local[a], local[b], w * (g.dx[a] * g.dx[b] + g.dy[a] * g.dy[b]));
      break;
    }
    case Form::PressureMass: scalar_mass(mat.mobility(cell)); break;
    case Form::Storage: scalar_mass(mat.storage(cell)); break;
    case Form::FixedStressStorage: scalar_mass(mat.storage(cell) + mat.stabilization(cell)); break;
    case Form::Stabilization: scalar_mass(mat.stabilization(cell)); break;
    case Form::Elasticity: {
      const double mu = mat.mu[cell], lam = mat.lambda[cell];
      // sigma(phi_b e_d) : eps(phi_a e_c), engineering-shear form.
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const double xx = (lam + 2 * mu) * g.dx[a] * g.dx[b] + mu * g.dy[a] * g.dy[b];
          const double yy = (lam + 2 * mu) * g.dy[a] * g.dy[b] + mu * g.dx[a] * g.dx[b];
          const double xy = lam * g.dx[a] * g.dy[b] + mu * g.dy[a] * g.dx[b];
          const double yx = lam * g.dy[a] * g.dx[b] + mu * g.dx[a] * g.dy[b];
          out.emplace_back(2 * local[a], 2 * local[b], g.area * xx);
          out.emplace_back(2 * local[a] + 1, 2 * local[b] + 1, g.area * yy);
          out.emplace_back(2 * local[a], 2 * local[b] + 1, g.area * xy);
          out.emplace_back(2 * local[a] + 1, 2 * local[b], g.area * yx);
        }
      }
      break;
    }
    case Form::VectorMass: {
      const double w = mat.p_modulus(cell) * g.area / 12.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const double v = w * (a == b ? 2.0 : 1.0);
          out.emplace_back(2 * local[a], 2 * local[b], v);
          out.emplace_back(2 * local[a] + 1, 2 * local[b] + 1, v);
        }
      break;
    }
    case Form::GradCoupling: {
      // int alpha d_c(phi_b) phi_a = alpha |T|/3 d_c(phi_b)
      const double w = mat.alpha * g.area / 3.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          out.emplace_back(2 * local[a], local[b], w * g.dx[b]);
          out.emplace_back(2 * local[a] + 1, local[b], w * g.dy[b]);
        }
      break;
    }
    case Form::DivCoupling: {
      const double w = mat.alpha * g.area / 3.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          out.emplace_back(local[a], 2 * local[b], w * g.dx[b]);
          out.emplace_back(local[a], 2 * local[b] + 1, w * g.dy[b]);
        }
      break;
    }
  }
}

template <class NodeMap>
SparseMatrix assemble_cells(Form form, const FineMesh& mesh, const MaterialField& mat,
                            std::span<const int> cells, int num_nodes, const NodeMap& node_of) {
  if (mat.num_cells() != mesh.num_cells()) {
    throw DimensionMismatch("material has " + std::to_string(mat.num_cells()) +
                            " cells, mesh has " + std::to_string(mesh.num_cells()));
  }
  Triplets triplets;
  triplets.reserve(cells.size() * 36);
  for (int c : cells) element_triplets(form, mesh, mat, c, node_of, triplets);
  const int rows = num_nodes * dofs_per_node(row_field(form));
  const int cols = num_nodes * dofs_per_node(col_field(form));
  SparseMatrix op(rows, cols);
  op.setFromTriplets(triplets.begin(), triplets.end());
  op.makeCompressed();
  return op;
}

}  // namespace

int dofs_per_node(FieldKind kind) { return kind == FieldKind::Pressure ? 1 : 2; }

FieldKind row_field(Form form) {
  switch (form) {
    case Form::Elasticity:
    case Form::VectorMass:
    case Form::GradCoupling: return FieldKind::Displacement;
    default: return FieldKind::Pressure;
  }
}

FieldKind col_field(Form form) {
  switch (form) {
    case Form::Elasticity:
    case Form::VectorMass:
    case Form::DivCoupling: return FieldKind::Displacement;
    default: return FieldKind::Pressure;
  }
}

bool is_symmetric(Form form) { return form != Form::GradCoupling && form != Form::DivCoupling; }

SparseMatrix assemble(Form form, const FineMesh& mesh, const MaterialField& material) {
  std::vector<int> all(mesh.cells.size());
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = static_cast<int>(c);
  return assemble_cells(form, mesh, material, all, mesh.num_nodes(), [](int v) { return v; });
}

SparseMatrix restrict_local(Form form, const FineMesh& mesh, const MaterialField& material,
                            const Neighborhood& region) {
  if (region.fine_cells.empty()) throw InvalidInput("restrict_local: empty neighborhood");
  return assemble_cells(form, mesh, material, region.fine_cells,
                        static_cast<int>(region.fine_nodes.size()),
                        [&region](int v) { return region.local_index(v); });
}

SparseMatrix submatrix(const SparseMatrix& op, const std::vector<int>& row_dofs,
                       const std::vector<int>& col_dofs) {
  std::vector<int> row_pos(op.rows(), -1), col_pos(op.cols(), -1);
  for (std::size_t k = 0; k < row_dofs.size(); ++k) row_pos.at(row_dofs[k]) = static_cast<int>(k);
  for (std::size_t k = 0; k < col_dofs.size(); ++k) col_pos.at(col_dofs[k]) = static_cast<int>(k);
  Triplets triplets;
  for (int j = 0; j < op.outerSize(); ++j) {
    if (col_pos[j] < 0) continue;
    for (SparseMatrix::InnerIterator it(op, j); it; ++it)
      if (row_pos[it.row()] >= 0) triplets.emplace_back(row_pos[it.row()], col_pos[j], it.value());
  }
  SparseMatrix sub(static_cast<Eigen::Index>(row_dofs.size()),
                   static_cast<Eigen::Index>(col_dofs.size()));
  sub.setFromTriplets(triplets.begin(), triplets.end());
  return sub;
}

Vector DirichletData::lift(Eigen::Index size) const {
  Vector x = Vector::Zero(size);
  for (std::size_t k = 0; k < dofs.size(); ++k) x[dofs[k]] = values[k];
  return x;
}

std::vector<char> DirichletData::mask(Eigen::Index size) const {
  std::vector<char> m(static_cast<std::size_t>(size), 0);
  for (int d : dofs) m.at(d) = 1;
  return m;
}

SparseMatrix eliminate_matrix(const SparseMatrix& op, const DirichletData& constraints) {
  if (op.rows() != op.cols()) throw DimensionMismatch("eliminate_dirichlet needs a square operator");
  const auto fixed = constraints.mask(op.rows());
  Triplets triplets;
  triplets.reserve(op.nonZeros());
  for (int j = 0; j < op.outerSize(); ++j) {
    if (fixed[j]) continue;
    for (SparseMatrix::InnerIterator it(op, j); it; ++it)
      if (!fixed[it.row()]) triplets.emplace_back(it.row(), j, it.value());
  }
  for (int d : constraints.dofs) triplets.emplace_back(d, d, 1.0);
  SparseMatrix out(op.rows(), op.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

Vector eliminated_rhs(const SparseMatrix& op, const Vector& rhs, const DirichletData& constraints) {
  if (rhs.size() != op.rows()) throw DimensionMismatch("rhs length does not match operator");
  Vector out = rhs - op * constraints.lift(op.cols());
  for (std::size_t k = 0; k < constraints.dofs.size(); ++k)
    out[constraints.dofs[k]] = constraints.values[k];
  return out;
}

std::pair<SparseMatrix, Vector> eliminate_dirichlet(const SparseMatrix& op, const Vector& rhs,
                                                    const DirichletData& constraints) {
  return {eliminate_matrix(op, constraints), eliminated_rhs(op, rhs, constraints)};
}

void write_coordinate(const SparseMatrix& op, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write matrix file: " + path);
  out.precision(17);
  for (int j = 0; j < op.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(op, j); it; ++it)
      out << it.row() << ' ' << j << ' ' << it.value() << '\n';
}

FineOperators assemble_operators(const FineMesh& mesh, const MaterialField& material) {
  FineOperators ops;
  ops.darcy = assemble(Form::DarcyStiffness, mesh, material);
  ops.pressure_mass = assemble(Form::PressureMass, mesh, material);
  ops.storage = assemble(Form::Storage, mesh, material);
  ops.fs_storage = assemble(Form::FixedStressStorage, mesh, material);
  ops.stabilization = assemble(Form::Stabilization, mesh, material);
  ops.elasticity = assemble(Form::Elasticity, mesh, material);
  ops.vector_mass = assemble(Form::VectorMass, mesh, material);
  ops.grad = assemble(Form::GradCoupling, mesh, material);
  ops.div = assemble(Form::DivCoupling, mesh, material);
  return ops;
}

}  // namespace biotms
