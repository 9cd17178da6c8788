#include "biotms/offline.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "biotms/errors.hpp"
#include "biotms/parallel.hpp"
#include "json.hpp"

namespace biotms {

std::string to_string(SnapshotMode mode) {
  return mode == SnapshotMode::HarmonicDelta ? "delta" : "random";
}

SnapshotMode parse_snapshot_mode(const std::string& name) {
  if (name == "delta" || name == "harmonic") return SnapshotMode::HarmonicDelta;
  if (name == "random" || name == "randomized") return SnapshotMode::Randomized;
  throw InvalidInput("unknown snapshot mode '" + name + "' (expected delta or random)");
}

std::string to_string(PouMode mode) { return mode == PouMode::Multiscale ? "multiscale" : "linear"; }

PouMode parse_pou_mode(const std::string& name) {
  if (name == "multiscale" || name == "harmonic") return PouMode::Multiscale;
  if (name == "linear") return PouMode::Linear;
  throw InvalidInput("unknown partition-of-unity mode '" + name + "'");
}

// ---------------------------------------------------------------------------
// Harmonic extension

struct HarmonicExtension::Impl {
  Eigen::SimplicialLDLT<SparseMatrix> solver;
};

HarmonicExtension::HarmonicExtension(const FineMesh& mesh, const MaterialField& material,
                                     const Neighborhood& region, FieldKind kind)
    : kind_(kind), impl_(std::make_unique<Impl>()) {
  const int dpn = dofs_per_node(kind);
  stiffness_ = restrict_local(kind == FieldKind::Pressure ? Form::DarcyStiffness : Form::Elasticity,
                              mesh, material, region);
  num_dofs_ = static_cast<int>(stiffness_.rows());
  std::vector<char> on_boundary(region.fine_nodes.size(), 0);
  for (int v : region.boundary_nodes) on_boundary[region.local_index(v)] = 1;
  for (int a = 0; a < static_cast<int>(region.fine_nodes.size()); ++a)
    for (int d = 0; d < dpn; ++d) (on_boundary[a] ? boundary_ : interior_).push_back(dpn * a + d);

  if (!interior_.empty()) {
    const SparseMatrix kii = submatrix(stiffness_, interior_, interior_);
    coupling_ = submatrix(stiffness_, interior_, boundary_);
    impl_->solver.compute(kii);
    if (impl_->solver.info() != Eigen::Success) {
      throw SolverError("singular local system in harmonic extension (degenerate neighborhood)");
    }
  }
}

HarmonicExtension::~HarmonicExtension() = default;
HarmonicExtension::HarmonicExtension(HarmonicExtension&&) noexcept = default;

Matrix HarmonicExtension::extend(const Matrix& boundary_values) const {
  if (boundary_values.rows() != static_cast<Eigen::Index>(boundary_.size())) {
    throw DimensionMismatch("boundary data rows do not match the region outline DOFs");
  }
  Matrix out = Matrix::Zero(num_dofs_, boundary_values.cols());
  for (std::size_t k = 0; k < boundary_.size(); ++k) out.row(boundary_[k]) = boundary_values.row(k);
  if (!interior_.empty()) {
    const Matrix rhs = -(coupling_ * boundary_values);
    const Matrix inner = impl_->solver.solve(rhs);
    for (std::size_t k = 0; k < interior_.size(); ++k) out.row(interior_[k]) = inner.row(k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Snapshots

namespace {

// Restricts fields on `from`'s DOFs to the nodes of `to` (to must lie inside from).
Matrix restrict_rows(const Matrix& fields, const Neighborhood& from, const Neighborhood& to,
                     int dpn) {
  Matrix out(static_cast<Eigen::Index>(to.fine_nodes.size()) * dpn, fields.cols());
  for (std::size_t a = 0; a < to.fine_nodes.size(); ++a) {
    const int src = from.local_index(to.fine_nodes[a]);
    if (src < 0) throw InvalidInput("target neighborhood is not contained in the snapshot region");
    for (int d = 0; d < dpn; ++d) out.row(dpn * a + d) = fields.row(dpn * src + d);
  }
  return out;
}

std::mt19937_64 neighborhood_stream(std::uint64_t seed, int node, FieldKind kind) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(node),
                    static_cast<std::uint32_t>(kind == FieldKind::Pressure ? 0 : 1)};
  return std::mt19937_64(seq);
}

}  // namespace

SnapshotSpace harmonic_snapshots(const FineMesh& mesh, const MaterialField& material,
                                 const Neighborhood& nb, FieldKind kind) {
  HarmonicExtension ext(mesh, material, nb, kind);
  const auto count = static_cast<Eigen::Index>(ext.boundary_dofs().size());
  SnapshotSpace snap;
  snap.kind = kind;
  snap.mode = SnapshotMode::HarmonicDelta;
  snap.layers = nb.layers;
  snap.vectors = ext.extend(Matrix::Identity(count, count));
  return snap;
}

SnapshotSpace randomized_snapshots(const FineMesh& mesh, const MaterialField& material,
                                   const Neighborhood& nb, const Neighborhood& nb_plus,
                                   FieldKind kind, int count, std::uint64_t seed) {
  HarmonicExtension ext(mesh, material, nb_plus, kind);
  const auto boundary = static_cast<int>(ext.boundary_dofs().size());
  if (count < 1 || count > boundary) {
    throw InvalidInput("randomized snapshot count " + std::to_string(count) +
                       " must lie in [1, " + std::to_string(boundary) + "] boundary DOFs");
  }
  auto rng = neighborhood_stream(seed, nb.center, kind);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix data(boundary, count);
  for (Eigen::Index j = 0; j < data.cols(); ++j)
    for (Eigen::Index i = 0; i < data.rows(); ++i) data(i, j) = gauss(rng);

  SnapshotSpace snap;
  snap.kind = kind;
  snap.mode = SnapshotMode::Randomized;
  snap.seed = seed;
  snap.layers = nb_plus.layers - nb.layers;
  snap.vectors = restrict_rows(ext.extend(data), nb_plus, nb, dofs_per_node(kind));
  return snap;
}

int randomized_snapshot_count(int boundary_dofs, int oversampled_boundary_dofs, double ratio,
                              int n_off, int buffer) {
  int count = static_cast<int>(std::ceil(ratio * boundary_dofs - 1e-9));
  count = std::max(count, n_off + buffer);
  return std::min(count, oversampled_boundary_dofs);
}

// ---------------------------------------------------------------------------
// Spectral reduction

ReducedBasis spectral_reduce(const SnapshotSpace& snapshots, const SparseMatrix& stiffness,
                             const SparseMatrix& mass, int n_off) {
  const Matrix& snap = snapshots.vectors;
  if (n_off < 1 || n_off > snapshots.count()) {
    throw InvalidInput("requested " + std::to_string(n_off) + " offline modes from " +
                       std::to_string(snapshots.count()) + " snapshots");
  }
  if (stiffness.rows() != snap.rows() || mass.rows() != snap.rows()) {
    throw DimensionMismatch("local operators do not match the snapshot DOFs");
  }
  Matrix b_off = snap.transpose() * (stiffness * snap);
  Matrix m_off = snap.transpose() * (mass * snap);
  b_off = 0.5 * (b_off + b_off.transpose()).eval();
  m_off = 0.5 * (m_off + m_off.transpose()).eval();

  ReducedBasis out;
  const double trace = m_off.trace();
  Eigen::SelfAdjointEigenSolver<Matrix> mass_spectrum(m_off, Eigen::EigenvaluesOnly);
  if (mass_spectrum.eigenvalues().minCoeff() < 1e-12 * trace) {
    out.regularized = true;
    out.ridge = 1e-12 * trace;
    m_off.diagonal().array() += out.ridge;
  }
  Eigen::LLT<Matrix> llt(m_off);
  if (llt.info() != Eigen::Success) throw SolverError("snapshot mass matrix is not positive definite");

  // L^{-1} B L^{-T}
  Matrix reduced = llt.matrixL().solve(b_off);
  reduced = llt.matrixL().solve(reduced.transpose()).transpose().eval();
  reduced = 0.5 * (reduced + reduced.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(reduced);
  if (es.info() != Eigen::Success) throw SolverError("offline eigensolve did not converge");

  out.eigenvalues = es.eigenvalues().head(n_off);
  out.coefficients = llt.matrixU().solve(es.eigenvectors().leftCols(n_off));
  out.offline = snap * out.coefficients;
  for (int k = 0; k < n_off; ++k) {
    Eigen::Index imax = 0;
    out.offline.col(k).cwiseAbs().maxCoeff(&imax);
    if (out.offline(imax, k) < 0.0) {
      out.offline.col(k) *= -1.0;
      out.coefficients.col(k) *= -1.0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Partition of unity and basis products

PartitionOfUnity partition_of_unity(const FineMesh& mesh, const MaterialField& material,
                                    const CoarseGrid& cg,
                                    const std::vector<Neighborhood>& neighborhoods, FieldKind kind,
                                    PouMode mode) {
  if (static_cast<int>(neighborhoods.size()) != cg.num_nodes()) {
    throw DimensionMismatch("need one neighborhood per coarse node");
  }
  const int dpn = dofs_per_node(kind);
  PartitionOfUnity pou;
  pou.kind = kind;
  pou.mode = mode;
  pou.values.resize(neighborhoods.size());
  for (std::size_t i = 0; i < neighborhoods.size(); ++i)
    pou.values[i] = Vector::Zero(static_cast<Eigen::Index>(neighborhoods[i].fine_nodes.size()) * dpn);

  // barycentric round-off would leave ~1e-16 on the opposite edge
  auto hat = [&](int c, int v, int fine_node) {
    const double h = cg.hat(c, v, mesh.nodes[fine_node]);
    return std::abs(h) < 1e-12 ? 0.0 : h;
  };
  for (int c = 0; c < cg.num_cells(); ++c) {
    const Neighborhood region = coarse_cell_region(mesh, cg, c);
    const auto local_nodes = static_cast<Eigen::Index>(region.fine_nodes.size());
    Matrix fields(local_nodes * dpn, 3);
    if (mode == PouMode::Linear) {
      for (Eigen::Index a = 0; a < local_nodes; ++a)
        for (int v = 0; v < 3; ++v)
          for (int d = 0; d < dpn; ++d)
            fields(dpn * a + d, v) = hat(c, v, region.fine_nodes[a]);
    } else {
      HarmonicExtension ext(mesh, material, region, kind);
      const auto& bd = ext.boundary_dofs();
      Matrix data(static_cast<Eigen::Index>(bd.size()), 3);
      for (std::size_t k = 0; k < bd.size(); ++k)
        for (int v = 0; v < 3; ++v)
          data(k, v) = hat(c, v, region.fine_nodes[bd[k] / dpn]);
      fields = ext.extend(data);
    }
    for (int v = 0; v < 3; ++v) {
      const int node = cg.coarse_cells[c][v];
      const Neighborhood& nb = neighborhoods[node];
      for (Eigen::Index a = 0; a < local_nodes; ++a) {
        const int li = nb.local_index(region.fine_nodes[a]);
        for (int d = 0; d < dpn; ++d) pou.values[node][dpn * li + d] = fields(dpn * a + d, v);
      }
    }
  }
  return pou;
}

Matrix build_offline_basis(const Matrix& offline, const Vector& pou) {
  if (offline.rows() != pou.size()) throw DimensionMismatch("offline vectors and partition of unity differ in size");
  return pou.asDiagonal() * offline;
}

// ---------------------------------------------------------------------------
// Restriction operators

RestrictionOperator assemble_restriction(const std::vector<LocalBasis>& bases, FieldKind kind,
                                         int n_off, int fine_dofs,
                                         const std::vector<int>& zero_dofs) {
  const int dpn = dofs_per_node(kind);
  const int per_mode = dpn;  // displacement keeps 2 * n_off vector modes per node
  std::vector<char> cleared(static_cast<std::size_t>(fine_dofs), 0);
  for (int d : zero_dofs) cleared.at(d) = 1;

  RestrictionOperator r;
  r.kind = kind;
  std::vector<Eigen::Triplet<double>> triplets;
  int row = 0;
  for (std::size_t i = 0; i < bases.size(); ++i) {
    const auto& b = bases[i];
    if (b.columns.cols() < static_cast<Eigen::Index>(n_off) * per_mode) {
      throw InvalidInput("node " + std::to_string(i) + " has fewer than " + std::to_string(n_off) +
                         " offline modes");
    }
    for (int k = 0; k < n_off; ++k) {
      for (int comp = 0; comp < per_mode; ++comp) {
        const Eigen::Index col = static_cast<Eigen::Index>(k) * per_mode + comp;
        for (std::size_t a = 0; a < b.fine_nodes.size(); ++a) {
          for (int d = 0; d < dpn; ++d) {
            const int dof = dpn * b.fine_nodes[a] + d;
            const double v = b.columns(dpn * a + d, col);
            if (v != 0.0 && !cleared[dof]) triplets.emplace_back(row, dof, v);
          }
        }
        r.labels.push_back({static_cast<int>(i), static_cast<int>(col)});
        ++row;
      }
    }
  }
  r.matrix.resize(row, fine_dofs);
  r.matrix.setFromTriplets(triplets.begin(), triplets.end());
  r.matrix.makeCompressed();
  return r;
}

RestrictionOperator identity_restriction(FieldKind kind, int fine_dofs,
                                         const std::vector<int>& zero_dofs) {
  std::vector<char> cleared(static_cast<std::size_t>(fine_dofs), 0);
  for (int d : zero_dofs) cleared.at(d) = 1;
  RestrictionOperator r;
  r.kind = kind;
  std::vector<Eigen::Triplet<double>> triplets;
  int row = 0;
  for (int dof = 0; dof < fine_dofs; ++dof) {
    if (cleared[dof]) continue;
    triplets.emplace_back(row++, dof, 1.0);
    const int dpn = dofs_per_node(kind);
    r.labels.push_back({dof / dpn, dof % dpn});
  }
  r.matrix.resize(row, fine_dofs);
  r.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return r;
}

RankReport check_rank(const RestrictionOperator& r, double tolerance) {
  Eigen::SparseMatrix<double, Eigen::RowMajor> normalized = r.matrix;
  std::vector<int> empty_rows;
  for (int i = 0; i < normalized.outerSize(); ++i) {
    double norm2 = 0.0;
    for (decltype(normalized)::InnerIterator it(normalized, i); it; ++it) norm2 += it.value() * it.value();
    if (norm2 == 0.0) {
      empty_rows.push_back(i);
      continue;
    }
    const double s = 1.0 / std::sqrt(norm2);
    for (decltype(normalized)::InnerIterator it(normalized, i); it; ++it) it.valueRef() *= s;
  }
  RankReport report;
  if (!empty_rows.empty()) {
    report.full_rank = false;
    report.ratio = 0.0;
    for (int i : empty_rows) report.suspects.push_back(r.labels[i]);
    return report;
  }
  const Matrix gram = Matrix(normalized * Eigen::SparseMatrix<double, Eigen::RowMajor>(normalized.transpose()));
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const Vector& ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  report.ratio = std::sqrt(std::max(ev.minCoeff(), 0.0) / top);
  if (report.ratio >= tolerance) return report;

  report.full_rank = false;
  std::vector<char> flagged(r.labels.size(), 0);
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (std::sqrt(std::max(ev[k], 0.0) / top) >= tolerance) break;
    // The rows with the largest weight in a near-null combination.
    const Vector w = es.eigenvectors().col(k).cwiseAbs();
    const double cut = 0.5 * w.maxCoeff();
    for (Eigen::Index i = 0; i < w.size(); ++i)
      if (w[i] >= cut && !flagged[i]) {
        flagged[i] = 1;
        report.suspects.push_back(r.labels[i]);
      }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Offline driver

void OfflineSettings::validate() const {
  if (n_off_p < 1) throw InvalidInput("noff-p must be >= 1");
  if (n_off_u < 1) throw InvalidInput("noff-u must be >= 1");
  if (!(snapshot_ratio > 0.0 && snapshot_ratio <= 1.0)) {
    throw InvalidInput("snapshot-ratio must lie in (0, 1]");
  }
  if (oversample < 0) throw InvalidInput("oversample-t must be >= 0");
  if (snapshot_buffer < 0) throw InvalidInput("snapshot buffer must be >= 0");
}

std::vector<LocalBasis> OfflineBasis::local_bases(FieldKind kind) const {
  std::vector<LocalBasis> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes)
    out.push_back({n.fine_nodes, kind == FieldKind::Pressure ? n.basis_p : n.basis_u});
  return out;
}

namespace {

SnapshotSpace node_snapshots(const FineMesh& mesh, const MaterialField& material,
                             const Neighborhood& nb, const Neighborhood& nb_plus, FieldKind kind,
                             int n_off, const OfflineSettings& s) {
  const int dpn = dofs_per_node(kind);
  if (s.snapshots == SnapshotMode::HarmonicDelta) {
    if (nb_plus.layers == nb.layers) return harmonic_snapshots(mesh, material, nb, kind);
    // Oversampled deltas: one extension per outline DOF of the larger region.
    HarmonicExtension ext(mesh, material, nb_plus, kind);
    const auto count = static_cast<Eigen::Index>(ext.boundary_dofs().size());
    SnapshotSpace snap;
    snap.kind = kind;
    snap.layers = nb_plus.layers - nb.layers;
    snap.vectors = restrict_rows(ext.extend(Matrix::Identity(count, count)), nb_plus, nb, dpn);
    return snap;
  }
  const int count = randomized_snapshot_count(
      static_cast<int>(nb.boundary_nodes.size()) * dpn,
      static_cast<int>(nb_plus.boundary_nodes.size()) * dpn, s.snapshot_ratio, n_off,
      s.snapshot_buffer);
  return randomized_snapshots(mesh, material, nb, nb_plus, kind, count, s.seed);
}

}  // namespace

OfflineBasis build_offline(const FineMesh& mesh, const CoarseGrid& cg,
                           const MaterialField& material, const OfflineSettings& settings) {
  settings.validate();
  OfflineBasis basis;
  basis.settings = settings;
  basis.fine_n = mesh.n;
  basis.coarse_n = cg.n;

  const int nodes = cg.num_nodes();
  std::vector<Neighborhood> hoods(nodes);
  for (int i = 0; i < nodes; ++i) hoods[i] = neighborhood(mesh, cg, i);
  const PartitionOfUnity chi = partition_of_unity(mesh, material, cg, hoods, FieldKind::Pressure, settings.pou);
  const PartitionOfUnity xi = partition_of_unity(mesh, material, cg, hoods, FieldKind::Displacement, settings.pou);

  basis.nodes.resize(nodes);
  parallel_for(nodes, settings.workers, [&](int i) {
    const Neighborhood& nb = hoods[i];
    const Neighborhood nb_plus = oversample(mesh, nb, settings.oversample);
    NodeBasis& out = basis.nodes[i];
    out.fine_nodes = nb.fine_nodes;
    out.pou_p = chi.values[i];
    out.pou_u = xi.values[i];

    const SnapshotSpace sp =
        node_snapshots(mesh, material, nb, nb_plus, FieldKind::Pressure, settings.n_off_p, settings);
    const ReducedBasis rp = spectral_reduce(
        sp, restrict_local(Form::DarcyStiffness, mesh, material, nb),
        restrict_local(Form::PressureMass, mesh, material, nb), settings.n_off_p);
    out.snapshots_p = sp.count();
    out.eigenvalues_p = rp.eigenvalues;
    out.basis_p = build_offline_basis(rp.offline, out.pou_p);

    // N_off^u counts modes per displacement component.
    const int keep_u = 2 * settings.n_off_u;
    const SnapshotSpace su = node_snapshots(mesh, material, nb, nb_plus, FieldKind::Displacement,
                                            keep_u, settings);
    const ReducedBasis ru = spectral_reduce(
        su, restrict_local(Form::Elasticity, mesh, material, nb),
        restrict_local(Form::VectorMass, mesh, material, nb), keep_u);
    out.snapshots_u = su.count();
    out.eigenvalues_u = ru.eigenvalues;
    out.basis_u = build_offline_basis(ru.offline, out.pou_u);
    out.regularized = rp.regularized || ru.regularized;
  });
  return basis;
}

RestrictionOperator restriction(const OfflineBasis& basis, FieldKind kind, int n_off,
                                const DirichletData& constraints) {
  if (n_off < 1 || n_off > basis.max_n_off(kind)) {
    throw InvalidInput("offline basis holds " + std::to_string(basis.max_n_off(kind)) +
                       " modes per node, " + std::to_string(n_off) + " requested");
  }
  const int nodes = (basis.fine_n + 1) * (basis.fine_n + 1);
  return assemble_restriction(basis.local_bases(kind), kind, n_off, nodes * dofs_per_node(kind),
                              constraints.dofs);
}

Vector dirichlet_lift(const OfflineBasis& basis, const CoarseGrid& cg, FieldKind kind,
                      const DirichletData& constraints, int fine_nodes) {
  const int dpn = dofs_per_node(kind);
  Vector lift = Vector::Zero(static_cast<Eigen::Index>(fine_nodes) * dpn);
  std::vector<double> value(lift.size(), 0.0);
  std::vector<char> fixed(lift.size(), 0);
  for (std::size_t k = 0; k < constraints.dofs.size(); ++k) {
    value[constraints.dofs[k]] = constraints.values[k];
    fixed[constraints.dofs[k]] = 1;
  }
  for (int i = 0; i < cg.num_nodes(); ++i) {
    const auto& nb = basis.nodes[i];
    const Vector& pou = kind == FieldKind::Pressure ? nb.pou_p : nb.pou_u;
    for (int d = 0; d < dpn; ++d) {
      const int dof = dpn * cg.coarse_nodes[i] + d;
      if (!fixed[dof] || value[dof] == 0.0) continue;
      for (std::size_t a = 0; a < nb.fine_nodes.size(); ++a)
        lift[dpn * nb.fine_nodes[a] + d] += value[dof] * pou[dpn * a + d];
    }
  }
  for (std::size_t k = 0; k < constraints.dofs.size(); ++k) lift[constraints.dofs[k]] = constraints.values[k];
  return lift;
}

// ---------------------------------------------------------------------------
// Archive

namespace {

constexpr char kMagic[8] = {'B', 'I', 'O', 'T', 'M', 'S', 'O', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_matrix(std::ostream& out, const Matrix& m) {
  const std::int64_t dims[2] = {m.rows(), m.cols()};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Matrix get_matrix(std::istream& in) {
  std::int64_t dims[2];
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  if (!in || dims[0] < 0 || dims[1] < 0) throw InvalidInput("corrupt offline archive");
  Matrix m(dims[0], dims[1]);
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in) throw InvalidInput("truncated offline archive");
  return m;
}

}  // namespace

void save_offline(const OfflineBasis& basis, const std::string& path) {
  const auto& s = basis.settings;
  nlohmann::json header = {
      {"fine_n", basis.fine_n},
      {"coarse_n", basis.coarse_n},
      {"noff_p", s.n_off_p},
      {"noff_u", s.n_off_u},
      {"snapshots", to_string(s.snapshots)},
      {"snapshot_ratio", s.snapshot_ratio},
      {"snapshot_buffer", s.snapshot_buffer},
      {"oversample_t", s.oversample},
      {"seed", s.seed},
      {"pou", to_string(s.pou)},
      {"nodes", nlohmann::json::array()},
  };
  for (const auto& n : basis.nodes) {
    header["nodes"].push_back({{"snapshots_p", n.snapshots_p},
                               {"snapshots_u", n.snapshots_u},
                               {"regularized", n.regularized},
                               {"fine_nodes", n.fine_nodes}});
  }
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write offline archive: " + path);
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(len));
  for (const auto& n : basis.nodes) {
    put_matrix(out, n.eigenvalues_p);
    put_matrix(out, n.eigenvalues_u);
    put_matrix(out, n.pou_p);
    put_matrix(out, n.pou_u);
    put_matrix(out, n.basis_p);
    put_matrix(out, n.basis_u);
  }
  if (!out) throw InvalidInput("failed writing offline archive: " + path);
}

OfflineBasis load_offline(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open offline archive: " + path);
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || !std::equal(magic, magic + 8, kMagic) || version != kVersion) {
    throw InvalidInput("not an offline archive (or unsupported version): " + path);
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  const auto header = nlohmann::json::parse(text);

  OfflineBasis basis;
  basis.fine_n = header.at("fine_n");
  basis.coarse_n = header.at("coarse_n");
  auto& s = basis.settings;
  s.n_off_p = header.at("noff_p");
  s.n_off_u = header.at("noff_u");
  s.snapshots = parse_snapshot_mode(header.at("snapshots"));
  s.snapshot_ratio = header.at("snapshot_ratio");
  s.snapshot_buffer = header.at("snapshot_buffer");
  s.oversample = header.at("oversample_t");
  s.seed = header.at("seed");
  s.pou = parse_pou_mode(header.at("pou"));
  for (const auto& h : header.at("nodes")) {
    NodeBasis n;
    n.snapshots_p = h.at("snapshots_p");
    n.snapshots_u = h.at("snapshots_u");
    n.regularized = h.at("regularized");
    n.fine_nodes = h.at("fine_nodes").get<std::vector<int>>();
    n.eigenvalues_p = get_matrix(in);
    n.eigenvalues_u = get_matrix(in);
    n.pou_p = get_matrix(in);
    n.pou_u = get_matrix(in);
    n.basis_p = get_matrix(in);
    n.basis_u = get_matrix(in);
    basis.nodes.push_back(std::move(n));
  }
  return basis;
}

}  // namespace biotms
