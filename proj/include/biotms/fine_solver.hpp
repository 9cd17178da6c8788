#pragma once

#include <memory>
#include <string>
#include <vector>

#include "biotms/assembly.hpp"

namespace biotms {

enum class Scheme { Coupled, FixedStress };

std::string to_string(Scheme scheme);
Scheme parse_scheme(const std::string& name);

struct SchemeConfig {
  Scheme scheme = Scheme::Coupled;
  double tau = 5.0;
  int steps = 20;
  /// Extra fixed-stress sweeps per step. Zero gives the plain lagged scheme;
  /// positive values iterate the split towards the coupled solution.
  int fixed_stress_iterations = 0;

  double final_time() const { return tau * steps; }
  void validate() const;
};

/// Dirichlet data for both fields. Pressure DOFs are node ids; displacement
/// DOFs are 2*node + component.
struct BoundaryConditions {
  DirichletData pressure;
  DirichletData displacement;
};

/// p = p_top on the top side, p = p_bottom on the bottom side (corners
/// included), no flux on left/right; u_x = 0 on the left side, u_y = 0 on
/// the bottom side, traction free elsewhere.
BoundaryConditions layered_boundary_conditions(const FineMesh& mesh, double p_bottom, double p_top);

/// Homogeneous pressure Dirichlet on top/bottom and the same displacement constraints.
BoundaryConditions homogeneous_boundary_conditions(const FineMesh& mesh);

struct State {
  double time = 0.0;
  Vector p;
  Vector u;
};

struct Trajectory {
  Scheme scheme = Scheme::Coupled;
  double tau = 0.0;
  std::vector<State> states;
};

/// Fine-scale Biot time integrator. Matrices are factored once at construction.
class FineSolver {
 public:
  /// `load` is the assembled source vector (f, q); empty means f = 0.
  FineSolver(const FineOperators& ops, BoundaryConditions bc, SchemeConfig config,
             Vector load = {});
  ~FineSolver();
  FineSolver(FineSolver&&) noexcept;
  FineSolver& operator=(FineSolver&&) noexcept;

  /// p0 nodewise with Dirichlet values imposed; u0 from quasi-static equilibrium.
  State initialize(const Vector& p0) const;
  State step_coupled(const State& current) const;
  State step_fixed_stress(const State& current, const State& previous) const;
  /// Runs config.steps steps of the configured scheme starting from p0.
  Trajectory run(const Vector& p0) const;

  /// Stationary Darcy-with-equilibrium solve: the coupled system without storage terms.
  State solve_stationary() const;

  const SchemeConfig& config() const { return config_; }
  const BoundaryConditions& boundary_conditions() const { return bc_; }

 private:
  Vector displacement_for(const Vector& p) const;

  struct Factorizations;
  const FineOperators* ops_;
  BoundaryConditions bc_;
  SchemeConfig config_;
  Vector load_;
  std::unique_ptr<Factorizations> fact_;
};

/// [p; u] stacking used by the monolithic system.
Vector stack(const Vector& p, const Vector& u);

/// Block matrix [[top_left, top_right], [bottom_left, bottom_right]].
SparseMatrix block_matrix(const SparseMatrix& top_left, const SparseMatrix& top_right,
                          const SparseMatrix& bottom_left, const SparseMatrix& bottom_right);

}  // namespace biotms
