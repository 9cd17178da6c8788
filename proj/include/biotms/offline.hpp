#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "biotms/assembly.hpp"

namespace biotms {

enum class SnapshotMode { HarmonicDelta, Randomized };
enum class PouMode { Multiscale, Linear };

std::string to_string(SnapshotMode mode);
SnapshotMode parse_snapshot_mode(const std::string& name);
std::string to_string(PouMode mode);
PouMode parse_pou_mode(const std::string& name);

/// Local harmonic extension on a region: the interior DOFs satisfy the
/// stiffness equations (b- or a-form) of the region's cells, the boundary
/// DOFs take prescribed values. The interior block is factored once.
class HarmonicExtension {
 public:
  HarmonicExtension(const FineMesh& mesh, const MaterialField& material, const Neighborhood& region,
                    FieldKind kind);
  ~HarmonicExtension();
  HarmonicExtension(HarmonicExtension&&) noexcept;

  FieldKind kind() const { return kind_; }
  int num_dofs() const { return num_dofs_; }
  /// Local DOF ids (region numbering) on the region outline.
  const std::vector<int>& boundary_dofs() const { return boundary_; }
  const SparseMatrix& stiffness() const { return stiffness_; }

  /// One column per boundary data set (rows follow boundary_dofs()).
  /// Returns the extended fields over all local DOFs.
  Matrix extend(const Matrix& boundary_values) const;

 private:
  struct Impl;
  FieldKind kind_;
  int num_dofs_ = 0;
  std::vector<int> boundary_;
  std::vector<int> interior_;
  SparseMatrix stiffness_;
  SparseMatrix coupling_;  // interior x boundary block
  std::unique_ptr<Impl> impl_;
};

/// Local snapshot vectors, expressed on the DOFs of the target neighborhood.
struct SnapshotSpace {
  FieldKind kind = FieldKind::Pressure;
  SnapshotMode mode = SnapshotMode::HarmonicDelta;
  std::uint64_t seed = 0;
  int layers = 0;
  Matrix vectors;  // local DOFs x count

  int count() const { return static_cast<int>(vectors.cols()); }
};

/// One snapshot per boundary DOF of `nb` (delta boundary data).
SnapshotSpace harmonic_snapshots(const FineMesh& mesh, const MaterialField& material,
                                 const Neighborhood& nb, FieldKind kind);

/// `count` extensions of i.i.d. standard Gaussian boundary data on the
/// outline of `nb_plus`, restricted to the nodes of `nb` (nb must lie inside nb_plus).
SnapshotSpace randomized_snapshots(const FineMesh& mesh, const MaterialField& material,
                                   const Neighborhood& nb, const Neighborhood& nb_plus,
                                   FieldKind kind, int count, std::uint64_t seed);

/// Randomized snapshot count: ceil(ratio * boundary DOFs of nb), raised to
/// n_off + buffer and capped at the boundary DOFs of nb_plus.
int randomized_snapshot_count(int boundary_dofs, int oversampled_boundary_dofs, double ratio,
                              int n_off, int buffer = 4);

/// Reduced offline space from the smallest eigenpairs of the projected pencil.
struct ReducedBasis {
  Vector eigenvalues;   // ascending, kept pairs only
  Matrix coefficients;  // snapshot coordinates, count x kept (mass-orthonormal)
  Matrix offline;       // local DOFs x kept
  bool regularized = false;
  double ridge = 0.0;
};

ReducedBasis spectral_reduce(const SnapshotSpace& snapshots, const SparseMatrix& stiffness,
                             const SparseMatrix& mass, int n_off);

/// Partition of unity per coarse node over its neighborhood nodes. Pressure:
/// one value per node; displacement: (x, y) per node.
struct PartitionOfUnity {
  FieldKind kind = FieldKind::Pressure;
  PouMode mode = PouMode::Multiscale;
  std::vector<Vector> values;  // indexed by coarse node, over neighborhoods[i].fine_nodes
};

PartitionOfUnity partition_of_unity(const FineMesh& mesh, const MaterialField& material,
                                    const CoarseGrid& cg,
                                    const std::vector<Neighborhood>& neighborhoods, FieldKind kind,
                                    PouMode mode = PouMode::Multiscale);

/// Multiplies each offline vector by the partition of unity nodewise
/// (componentwise for displacement).
Matrix build_offline_basis(const Matrix& offline, const Vector& pou);

struct BasisLabel {
  int node = 0;
  int mode = 0;
};

/// Rows of fine nodal values of the multiscale basis functions.
struct RestrictionOperator {
  FieldKind kind = FieldKind::Pressure;
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  std::vector<BasisLabel> labels;

  int rows() const { return static_cast<int>(matrix.rows()); }
};

/// Per-node basis in local numbering, as produced by build_offline_basis.
struct LocalBasis {
  std::vector<int> fine_nodes;
  Matrix columns;  // local DOFs x basis count (ascending eigenvalue)
};

/// Stacks the first n_off modes (2 * n_off for displacement) of every node, node-major. DOFs in `zero_dofs`
/// are cleared so each row lies in the homogeneous test space.
RestrictionOperator assemble_restriction(const std::vector<LocalBasis>& bases, FieldKind kind,
                                         int n_off, int fine_dofs,
                                         const std::vector<int>& zero_dofs = {});

/// Identity on the DOFs not listed in `zero_dofs`.
RestrictionOperator identity_restriction(FieldKind kind, int fine_dofs,
                                         const std::vector<int>& zero_dofs = {});

struct RankReport {
  bool full_rank = true;
  double ratio = 1.0;  // smallest / largest singular value of the row-normalized matrix
  std::vector<BasisLabel> suspects;
};

/// Rank check through the Gram matrix of the row-normalized restriction.
RankReport check_rank(const RestrictionOperator& r, double tolerance = 1e-7);

struct OfflineSettings {
  int n_off_p = 8;
  int n_off_u = 8;
  SnapshotMode snapshots = SnapshotMode::HarmonicDelta;
  double snapshot_ratio = 0.36;
  int snapshot_buffer = 4;
  int oversample = 0;
  std::uint64_t seed = 1;
  PouMode pou = PouMode::Multiscale;
  int workers = 1;

  void validate() const;
};

struct NodeBasis {
  std::vector<int> fine_nodes;
  Vector eigenvalues_p;
  Vector eigenvalues_u;
  Vector pou_p;
  Vector pou_u;
  Matrix basis_p;  // local nodes x n_off_p
  Matrix basis_u;  // 2 * local nodes x 2 * n_off_u
  int snapshots_p = 0;
  int snapshots_u = 0;
  bool regularized = false;
};

/// Complete offline result for every coarse node.
struct OfflineBasis {
  OfflineSettings settings;
  int fine_n = 0;
  int coarse_n = 0;
  std::vector<NodeBasis> nodes;

  int max_n_off(FieldKind kind) const {
    return kind == FieldKind::Pressure ? settings.n_off_p : settings.n_off_u;
  }
  std::vector<LocalBasis> local_bases(FieldKind kind) const;
};

OfflineBasis build_offline(const FineMesh& mesh, const CoarseGrid& cg,
                           const MaterialField& material, const OfflineSettings& settings);

/// Restriction with the first n_off modes per node and the constrained DOFs cleared.
RestrictionOperator restriction(const OfflineBasis& basis, FieldKind kind, int n_off,
                                const DirichletData& constraints);

/// Dirichlet lift built from the partition of unity of the coarse nodes that
/// carry constrained DOFs, with exact values written on the constrained DOFs.
Vector dirichlet_lift(const OfflineBasis& basis, const CoarseGrid& cg, FieldKind kind,
                      const DirichletData& constraints, int fine_nodes);

/// Binary archive (header JSON + raw little-endian doubles).
void save_offline(const OfflineBasis& basis, const std::string& path);
OfflineBasis load_offline(const std::string& path);

}  // namespace biotms
