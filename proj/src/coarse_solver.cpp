#include "biotms/coarse_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <fmt/format.h>

#include "biotms/errors.hpp"

namespace biotms {

namespace {

using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

Matrix galerkin(const RowSparse& left, const SparseMatrix& op, const RowSparse& right) {
  const SparseMatrix left_op = SparseMatrix(left * op);
  const SparseMatrix right_t = SparseMatrix(right.transpose());
  return Matrix(SparseMatrix(left_op * right_t));
}

Matrix symmetrized(Matrix m) { return 0.5 * (m + m.transpose()).eval(); }

}  // namespace

CoarseSystem project(const FineOperators& ops, RestrictionOperator rp, RestrictionOperator ru,
                     Vector p_lift, Vector u_lift, BoundaryConditions bc,
                     const SchemeConfig& config, const Vector& load) {
  config.validate();
  const int n = ops.num_nodes();
  if (rp.matrix.cols() != n || ru.matrix.cols() != 2 * n || p_lift.size() != n ||
      u_lift.size() != 2 * n) {
    throw DimensionMismatch("restriction operators or lifts do not match the fine DOF counts");
  }
  Vector f = load.size() ? load : Vector::Zero(n);
  if (f.size() != n) throw DimensionMismatch("source vector length does not match mesh");

  CoarseSystem sys;
  sys.config = config;
  sys.darcy = symmetrized(galerkin(rp.matrix, ops.darcy, rp.matrix));
  sys.storage = symmetrized(galerkin(rp.matrix, ops.storage, rp.matrix));
  if (config.scheme == Scheme::FixedStress) {
    sys.fs_storage = symmetrized(galerkin(rp.matrix, ops.fs_storage, rp.matrix));
    sys.stabilization = symmetrized(galerkin(rp.matrix, ops.stabilization, rp.matrix));
  }
  sys.elasticity = symmetrized(galerkin(ru.matrix, ops.elasticity, ru.matrix));
  sys.grad = galerkin(ru.matrix, ops.grad, rp.matrix);
  sys.div = galerkin(rp.matrix, ops.div, ru.matrix);
  sys.storage_projector = SparseMatrix(rp.matrix * ops.storage);
  sys.load_p = rp.matrix * Vector(f - ops.darcy * p_lift);
  sys.load_u = ru.matrix * Vector(-(ops.grad * p_lift) - ops.elasticity * u_lift);
  sys.rp = std::move(rp);
  sys.ru = std::move(ru);
  sys.p_lift = std::move(p_lift);
  sys.u_lift = std::move(u_lift);
  sys.bc = std::move(bc);
  return sys;
}

struct CoarseSolver::Factorizations {
  Eigen::LDLT<Matrix> elasticity;
  Eigen::LDLT<Matrix> storage;
  Eigen::PartialPivLU<Matrix> coupled;
  Eigen::LDLT<Matrix> pressure;
};

namespace {

// On failure the restriction is rank-checked so the message names the
// (node, mode) rows involved in the near-null combinations.
void require_definite(const Eigen::LDLT<Matrix>& f, const char* what, const RestrictionOperator& r) {
  const Vector d = f.vectorD().cwiseAbs();
  const bool indefinite = f.info() != Eigen::Success || !f.isPositive();
  if (!indefinite && !(d.size() && d.minCoeff() <= 1e-14 * d.maxCoeff())) return;
  std::string msg = std::string("coarse ") + what + " matrix is " +
                    (indefinite ? "not positive definite" : "singular");
  const RankReport rank = check_rank(r);
  if (!rank.full_rank) {
    msg += fmt::format("; basis rank-deficient (sigma ratio {:.2e}), suspect (node, mode):", rank.ratio);
    for (std::size_t k = 0; k < rank.suspects.size() && k < 8; ++k)
      msg += fmt::format(" ({}, {})", rank.suspects[k].node, rank.suspects[k].mode);
    if (rank.suspects.size() > 8) msg += fmt::format(" ... {} total", rank.suspects.size());
  }
  throw SolverError(msg);
}

}  // namespace

CoarseSolver::CoarseSolver(CoarseSystem system)
    : system_(std::move(system)), fact_(std::make_unique<Factorizations>()) {
  auto& f = *fact_;
  const auto& s = system_;
  f.elasticity.compute(s.elasticity);
  require_definite(f.elasticity, "elasticity", s.ru);
  f.storage.compute(s.storage);
  require_definite(f.storage, "storage", s.rp);
  const double inv_tau = 1.0 / s.config.tau;
  if (s.config.scheme == Scheme::Coupled) {
    const int np = s.dim_p(), nu = s.dim_u();
    Matrix k(np + nu, np + nu);
    k.topLeftCorner(np, np) = inv_tau * s.storage + s.darcy;
    k.topRightCorner(np, nu) = inv_tau * s.div;
    k.bottomLeftCorner(nu, np) = s.grad;
    k.bottomRightCorner(nu, nu) = s.elasticity;
    f.coupled.compute(k);
  } else {
    f.pressure.compute(inv_tau * s.fs_storage + s.darcy);
    require_definite(f.pressure, "fixed-stress pressure", s.rp);
  }
}

CoarseSolver::~CoarseSolver() = default;
CoarseSolver::CoarseSolver(CoarseSolver&&) noexcept = default;

Vector CoarseSolver::displacement_for(const Vector& cp) const {
  return fact_->elasticity.solve(system_.load_u - system_.grad * cp);
}

CoarseState CoarseSolver::initialize(const Vector& p0_fine) const {
  const auto& s = system_;
  if (p0_fine.size() != s.p_lift.size()) throw DimensionMismatch("initial pressure length mismatch");
  Vector p0 = p0_fine;
  for (std::size_t k = 0; k < s.bc.pressure.dofs.size(); ++k)
    p0[s.bc.pressure.dofs[k]] = s.bc.pressure.values[k];
  CoarseState c;
  c.p = fact_->storage.solve(s.storage_projector * Vector(p0 - s.p_lift));
  c.u = displacement_for(c.p);
  return c;
}

CoarseState CoarseSolver::step_coupled(const CoarseState& current) const {
  const auto& s = system_;
  if (s.config.scheme != Scheme::Coupled) throw InvalidInput("coarse system built for fixed stress");
  const double inv_tau = 1.0 / s.config.tau;
  Vector rhs(s.dimension());
  rhs << inv_tau * (s.storage * current.p + s.div * current.u) + s.load_p, s.load_u;
  const Vector x = fact_->coupled.solve(rhs);
  return {current.time + s.config.tau, x.head(s.dim_p()), x.tail(s.dim_u())};
}

CoarseState CoarseSolver::step_fixed_stress(const CoarseState& current,
                                            const CoarseState& previous) const {
  const auto& s = system_;
  if (s.config.scheme != Scheme::FixedStress) throw InvalidInput("coarse system built for coupled");
  const double inv_tau = 1.0 / s.config.tau;
  CoarseState next;
  next.time = current.time + s.config.tau;
  Vector rhs = inv_tau * (s.fs_storage * current.p + s.stabilization * (current.p - previous.p) -
                          s.div * (current.u - previous.u)) +
               s.load_p;
  next.p = fact_->pressure.solve(rhs);
  next.u = displacement_for(next.p);
  for (int it = 0; it < s.config.fixed_stress_iterations; ++it) {
    rhs = inv_tau * (s.storage * current.p + s.stabilization * next.p - s.div * (next.u - current.u)) +
          s.load_p;
    next.p = fact_->pressure.solve(rhs);
    next.u = displacement_for(next.p);
  }
  return next;
}

CoarseState CoarseSolver::step(const CoarseState& current, const CoarseState& previous) const {
  return system_.config.scheme == Scheme::Coupled ? step_coupled(current)
                                                  : step_fixed_stress(current, previous);
}

State CoarseSolver::prolong(const CoarseState& coarse) const {
  const auto& s = system_;
  return {coarse.time, s.p_lift + s.rp.matrix.transpose() * coarse.p,
          s.u_lift + s.ru.matrix.transpose() * coarse.u};
}

Trajectory CoarseSolver::run(const Vector& p0_fine) const {
  Trajectory traj;
  traj.scheme = system_.config.scheme;
  traj.tau = system_.config.tau;
  CoarseState previous = initialize(p0_fine);
  CoarseState current = previous;
  traj.states.push_back(prolong(current));
  for (int n = 0; n < system_.config.steps; ++n) {
    CoarseState next = step(current, previous);
    previous = std::move(current);
    current = std::move(next);
    traj.states.push_back(prolong(current));
  }
  return traj;
}

}  // namespace biotms
