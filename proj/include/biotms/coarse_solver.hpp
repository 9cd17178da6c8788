#pragma once

#include <memory>

#include "biotms/fine_solver.hpp"
#include "biotms/offline.hpp"

namespace biotms {

/// Coarse coefficient vectors for pressure and displacement.
struct CoarseState {
  double time = 0.0;
  Vector p;
  Vector u;
};

/// Fine operators projected through the restriction operators. Fine fields
/// are p = p_lift + Rp^T c_p and u = u_lift + Ru^T c_u.
struct CoarseSystem {
  SchemeConfig config;
  RestrictionOperator rp;
  RestrictionOperator ru;
  Vector p_lift;
  Vector u_lift;
  BoundaryConditions bc;
  SparseMatrix storage_projector;  // Rp S, for the initial projection

  Matrix darcy;          // Rp B Rp^T
  Matrix storage;        // Rp S Rp^T
  Matrix fs_storage;     // Rp s Rp^T
  Matrix stabilization;  // Rp (alpha^2/K_dr mass) Rp^T
  Matrix elasticity;     // Ru A Ru^T
  Matrix grad;           // Ru G Rp^T
  Matrix div;            // Rp D Ru^T
  Vector load_p;         // Rp (F - B p_lift)
  Vector load_u;         // Ru (-G p_lift - A u_lift)

  int dim_p() const { return rp.rows(); }
  int dim_u() const { return ru.rows(); }
  int dimension() const { return dim_p() + dim_u(); }
};

/// Projects every fine block used by `config.scheme`. `load` is the fine source vector (may be empty).
CoarseSystem project(const FineOperators& ops, RestrictionOperator rp, RestrictionOperator ru,
                     Vector p_lift, Vector u_lift, BoundaryConditions bc,
                     const SchemeConfig& config, const Vector& load = {});

/// Time stepping on the coarse space with dense factorizations.
class CoarseSolver {
 public:
  explicit CoarseSolver(CoarseSystem system);
  ~CoarseSolver();
  CoarseSolver(CoarseSolver&&) noexcept;

  /// Storage-weighted projection of p0 - p_lift; displacement from equilibrium.
  CoarseState initialize(const Vector& p0_fine) const;
  CoarseState step_coupled(const CoarseState& current) const;
  CoarseState step_fixed_stress(const CoarseState& current, const CoarseState& previous) const;
  CoarseState step(const CoarseState& current, const CoarseState& previous) const;

  /// Fine-grid state of a coarse state.
  State prolong(const CoarseState& coarse) const;

  /// Runs the configured scheme and returns the prolonged fine states.
  Trajectory run(const Vector& p0_fine) const;

  const CoarseSystem& system() const { return system_; }

 private:
  Vector displacement_for(const Vector& cp) const;

  struct Factorizations;
  CoarseSystem system_;
  std::unique_ptr<Factorizations> fact_;
};

}  // namespace biotms
