#include "biotms/fine_solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

#include "biotms/errors.hpp"

namespace biotms {

std::string to_string(Scheme scheme) {
  return scheme == Scheme::Coupled ? "coupled" : "fixed_stress";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "coupled") return Scheme::Coupled;
  if (name == "fixed_stress" || name == "fixed-stress") return Scheme::FixedStress;
  throw InvalidInput("unknown scheme '" + name + "' (expected coupled or fixed_stress)");
}

void SchemeConfig::validate() const {
  if (!(tau > 0.0)) throw InvalidInput("time step tau must be positive");
  if (steps < 1) throw InvalidInput("step count must be >= 1");
  if (fixed_stress_iterations < 0) throw InvalidInput("fixed-stress iteration count must be >= 0");
}

BoundaryConditions layered_boundary_conditions(const FineMesh& mesh, double p_bottom, double p_top) {
  BoundaryConditions bc;
  for (int v = 0; v < mesh.num_nodes(); ++v) {
    const auto tag = mesh.boundary[v];
    // Top/bottom pressure wins at the corners over the side no-flux condition.
    if (tag & kTop) {
      bc.pressure.dofs.push_back(v);
      bc.pressure.values.push_back(p_top);
    } else if (tag & kBottom) {
      bc.pressure.dofs.push_back(v);
      bc.pressure.values.push_back(p_bottom);
    }
    if (tag & kLeft) {
      bc.displacement.dofs.push_back(2 * v);
      bc.displacement.values.push_back(0.0);
    }
    if (tag & kBottom) {
      bc.displacement.dofs.push_back(2 * v + 1);
      bc.displacement.values.push_back(0.0);
    }
  }
  return bc;
}

BoundaryConditions homogeneous_boundary_conditions(const FineMesh& mesh) {
  return layered_boundary_conditions(mesh, 0.0, 0.0);
}

Vector stack(const Vector& p, const Vector& u) {
  Vector x(p.size() + u.size());
  x << p, u;
  return x;
}

SparseMatrix block_matrix(const SparseMatrix& top_left, const SparseMatrix& top_right,
                          const SparseMatrix& bottom_left, const SparseMatrix& bottom_right) {
  if (top_left.rows() != top_right.rows() || bottom_left.rows() != bottom_right.rows() ||
      top_left.cols() != bottom_left.cols() || top_right.cols() != bottom_right.cols()) {
    throw DimensionMismatch("block_matrix: inconsistent block sizes");
  }
  const auto r0 = top_left.rows(), c0 = top_left.cols();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(top_left.nonZeros() + top_right.nonZeros() + bottom_left.nonZeros() +
            bottom_right.nonZeros());
  auto add = [&t](const SparseMatrix& m, Eigen::Index ro, Eigen::Index co) {
    for (int j = 0; j < m.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(m, j); it; ++it)
        t.emplace_back(static_cast<int>(it.row() + ro), static_cast<int>(j + co), it.value());
  };
  add(top_left, 0, 0);
  add(top_right, 0, c0);
  add(bottom_left, r0, 0);
  add(bottom_right, r0, c0);
  SparseMatrix out(r0 + bottom_left.rows(), c0 + top_right.cols());
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

namespace {

using Cholesky = Eigen::SimplicialLDLT<SparseMatrix>;
using LU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

void factor_symmetric(Cholesky& solver, const SparseMatrix& m, const char* what) {
  solver.compute(m);
  if (solver.info() != Eigen::Success) {
    throw SolverError(std::string("factorization of the ") + what + " system failed");
  }
  const Vector d = solver.vectorD().cwiseAbs();
  if (d.minCoeff() <= 1e-14 * d.maxCoeff()) {
    std::ostringstream msg;
    msg << "singular " << what << " system (pivot ratio " << d.minCoeff() / d.maxCoeff()
        << "); check the Dirichlet constraints";
    throw SolverError(msg.str());
  }
}

void factor_general(LU& solver, const SparseMatrix& m, const char* what) {
  solver.analyzePattern(m);
  solver.factorize(m);
  if (solver.info() != Eigen::Success) {
    throw SolverError(std::string("factorization of the ") + what +
                      " system failed: " + solver.lastErrorMessage());
  }
}

template <class Solver>
Vector checked_solve(const Solver& solver, const SparseMatrix& m, const Vector& rhs,
                     const char* what) {
  Vector x = solver.solve(rhs);
  const double residual = (m * x - rhs).norm();
  const double scale = rhs.norm();
  if (!std::isfinite(residual) || residual > 1e-8 * std::max(scale, 1e-300)) {
    if (scale == 0.0 && residual == 0.0) return x;
    std::ostringstream msg;
    msg << "linear solve of the " << what << " system broke down: residual " << residual
        << " for rhs norm " << scale;
    throw SolverError(msg.str());
  }
  return x;
}

DirichletData coupled_constraints(const BoundaryConditions& bc, int num_nodes) {
  DirichletData all = bc.pressure;
  for (std::size_t k = 0; k < bc.displacement.dofs.size(); ++k) {
    all.dofs.push_back(num_nodes + bc.displacement.dofs[k]);
    all.values.push_back(bc.displacement.values[k]);
  }
  return all;
}

}  // namespace

struct FineSolver::Factorizations {
  SparseMatrix elasticity_raw, elasticity;
  Cholesky elasticity_solver;

  SparseMatrix coupled_raw, coupled;
  DirichletData coupled_bc;
  LU coupled_solver;
  bool has_coupled = false;

  SparseMatrix pressure_raw, pressure;
  Cholesky pressure_solver;
  bool has_pressure = false;
};

FineSolver::FineSolver(const FineOperators& ops, BoundaryConditions bc, SchemeConfig config,
                       Vector load)
    : ops_(&ops), bc_(std::move(bc)), config_(config), load_(std::move(load)),
      fact_(std::make_unique<Factorizations>()) {
  config_.validate();
  const int n = ops.num_nodes();
  if (load_.size() == 0) load_ = Vector::Zero(n);
  if (load_.size() != n) throw DimensionMismatch("source vector length does not match mesh");

  auto& f = *fact_;
  f.elasticity_raw = ops.elasticity;
  f.elasticity = eliminate_matrix(ops.elasticity, bc_.displacement);
  factor_symmetric(f.elasticity_solver, f.elasticity, "elasticity");

  const double inv_tau = 1.0 / config_.tau;
  if (config_.scheme == Scheme::Coupled) {
    SparseMatrix pp = inv_tau * ops.storage + ops.darcy;
    SparseMatrix pu = inv_tau * ops.div;
    f.coupled_raw = block_matrix(pp, pu, ops.grad, ops.elasticity);
    f.coupled_bc = coupled_constraints(bc_, n);
    f.coupled = eliminate_matrix(f.coupled_raw, f.coupled_bc);
    factor_general(f.coupled_solver, f.coupled, "coupled");
    f.has_coupled = true;
  } else {
    f.pressure_raw = inv_tau * ops.fs_storage + ops.darcy;
    f.pressure = eliminate_matrix(f.pressure_raw, bc_.pressure);
    factor_symmetric(f.pressure_solver, f.pressure, "fixed-stress pressure");
    f.has_pressure = true;
  }
}

FineSolver::~FineSolver() = default;
FineSolver::FineSolver(FineSolver&&) noexcept = default;
FineSolver& FineSolver::operator=(FineSolver&&) noexcept = default;

Vector FineSolver::displacement_for(const Vector& p) const {
  const auto& f = *fact_;
  const Vector rhs = eliminated_rhs(f.elasticity_raw, -(ops_->grad * p), bc_.displacement);
  return checked_solve(f.elasticity_solver, f.elasticity, rhs, "elasticity");
}

State FineSolver::initialize(const Vector& p0) const {
  if (p0.size() != ops_->num_nodes()) throw DimensionMismatch("initial pressure length mismatch");
  State s;
  s.time = 0.0;
  s.p = p0;
  for (std::size_t k = 0; k < bc_.pressure.dofs.size(); ++k)
    s.p[bc_.pressure.dofs[k]] = bc_.pressure.values[k];
  s.u = displacement_for(s.p);
  return s;
}

State FineSolver::step_coupled(const State& current) const {
  const auto& f = *fact_;
  if (!f.has_coupled) throw InvalidInput("solver was configured for the fixed-stress scheme");
  const double inv_tau = 1.0 / config_.tau;
  const Vector top = inv_tau * (ops_->storage * current.p + ops_->div * current.u) + load_;
  const Vector rhs = eliminated_rhs(f.coupled_raw, stack(top, Vector::Zero(current.u.size())),
                                    f.coupled_bc);
  const Vector x = checked_solve(f.coupled_solver, f.coupled, rhs, "coupled");
  const auto n = current.p.size();
  return {current.time + config_.tau, x.head(n), x.tail(x.size() - n)};
}

State FineSolver::step_fixed_stress(const State& current, const State& previous) const {
  const auto& f = *fact_;
  if (!f.has_pressure) throw InvalidInput("solver was configured for the coupled scheme");
  const double inv_tau = 1.0 / config_.tau;
  Vector rhs = inv_tau * (ops_->fs_storage * current.p +
                          ops_->stabilization * (current.p - previous.p) -
                          ops_->div * (current.u - previous.u)) +
               load_;
  State next;
  next.time = current.time + config_.tau;
  next.p = checked_solve(f.pressure_solver, f.pressure,
                         eliminated_rhs(f.pressure_raw, rhs, bc_.pressure), "pressure");
  next.u = displacement_for(next.p);

  // Optional iterated split; converges to the coupled step.
  for (int it = 0; it < config_.fixed_stress_iterations; ++it) {
    rhs = inv_tau * (ops_->storage * current.p + ops_->stabilization * next.p -
                     ops_->div * (next.u - current.u)) +
          load_;
    next.p = checked_solve(f.pressure_solver, f.pressure,
                           eliminated_rhs(f.pressure_raw, rhs, bc_.pressure), "pressure");
    next.u = displacement_for(next.p);
  }
  return next;
}

Trajectory FineSolver::run(const Vector& p0) const {
  Trajectory traj;
  traj.scheme = config_.scheme;
  traj.tau = config_.tau;
  traj.states.reserve(config_.steps + 1);
  traj.states.push_back(initialize(p0));
  for (int n = 0; n < config_.steps; ++n) {
    const State& cur = traj.states.back();
    if (config_.scheme == Scheme::Coupled) {
      traj.states.push_back(step_coupled(cur));
    } else {
      // u^{-1} := u^0, p^{-1} := p^0 on the first step.
      const State& prev = traj.states.size() >= 2 ? traj.states[traj.states.size() - 2] : cur;
      traj.states.push_back(step_fixed_stress(cur, prev));
    }
  }
  return traj;
}

State FineSolver::solve_stationary() const {
  const int n = ops_->num_nodes();
  SparseMatrix zero(ops_->div.rows(), ops_->div.cols());
  const SparseMatrix raw = block_matrix(ops_->darcy, zero, ops_->grad, ops_->elasticity);
  const DirichletData bc = coupled_constraints(bc_, n);
  const SparseMatrix m = eliminate_matrix(raw, bc);
  LU solver;
  factor_general(solver, m, "stationary");
  const Vector rhs = eliminated_rhs(raw, stack(load_, Vector::Zero(2 * n)), bc);
  const Vector x = checked_solve(solver, m, rhs, "stationary");
  return {0.0, x.head(n), x.tail(2 * n)};
}

}  // namespace biotms
