#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <utility>
#include <vector>

#include "biotms/material.hpp"
#include "biotms/mesh.hpp"

namespace biotms {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Which bilinear form to assemble. Pressure forms act on one DOF per node,
/// displacement forms on two (ux, uy interleaved: DOF 2*node + component).
enum class Form {
  DarcyStiffness,      // B:  (k/nu) grad p . grad q
  PressureMass,        // M:  (k/nu) p q
  Storage,             // S:  (1/M) p q
  FixedStressStorage,  // s:  (1/M + alpha^2/K_dr) p q
  Stabilization,       //     (alpha^2/K_dr) p q, the lag weight of the fixed-stress load
  Elasticity,          // A:  2 mu eps(u):eps(v) + lambda div u div v
  VectorMass,          // N:  (lambda + 2 mu) u . v
  GradCoupling,        // G:  alpha grad p . v     (rows: displacement, cols: pressure)
  DivCoupling,         // D:  alpha div u q        (rows: pressure, cols: displacement)
};

enum class FieldKind { Pressure, Displacement };

int dofs_per_node(FieldKind kind);
/// Field of the rows of `form` (row space) and columns (column space).
FieldKind row_field(Form form);
FieldKind col_field(Form form);
bool is_symmetric(Form form);

/// Global assembly over the whole mesh with exact P1 integration.
SparseMatrix assemble(Form form, const FineMesh& mesh, const MaterialField& material);

/// Assembly over the cells of `region` only, numbered by region.fine_nodes.
SparseMatrix restrict_local(Form form, const FineMesh& mesh, const MaterialField& material,
                            const Neighborhood& region);

/// Rows/cols `dofs` of `op`, in the given order.
SparseMatrix submatrix(const SparseMatrix& op, const std::vector<int>& row_dofs,
                       const std::vector<int>& col_dofs);

/// Constrained DOFs with prescribed values.
struct DirichletData {
  std::vector<int> dofs;
  std::vector<double> values;

  /// Vector of `size` entries: values at the constrained DOFs, zero elsewhere.
  Vector lift(Eigen::Index size) const;
  std::vector<char> mask(Eigen::Index size) const;
};

/// Symmetric elimination: rhs -= op * lift, constrained rows and columns
/// zeroed, unit diagonal, rhs set to the prescribed value.
std::pair<SparseMatrix, Vector> eliminate_dirichlet(const SparseMatrix& op, const Vector& rhs,
                                                    const DirichletData& constraints);

/// Elimination of the matrix alone (rhs handled per solve by `eliminated_rhs`).
SparseMatrix eliminate_matrix(const SparseMatrix& op, const DirichletData& constraints);
Vector eliminated_rhs(const SparseMatrix& op, const Vector& rhs, const DirichletData& constraints);

/// "row col value" lines, zero-based.
void write_coordinate(const SparseMatrix& op, const std::string& path);

/// All fine-scale operators of the Biot system.
struct FineOperators {
  SparseMatrix darcy;          // B
  SparseMatrix pressure_mass;  // M, (k/nu)-weighted
  SparseMatrix storage;        // S
  SparseMatrix fs_storage;     // s-form
  SparseMatrix stabilization;  // alpha^2/K_dr mass
  SparseMatrix elasticity;     // A
  SparseMatrix vector_mass;    // N
  SparseMatrix grad;           // G
  SparseMatrix div;            // D

  int num_nodes() const { return static_cast<int>(darcy.rows()); }
};

FineOperators assemble_operators(const FineMesh& mesh, const MaterialField& material);

}  // namespace biotms
