#pragma once

#include <vector>

#include "biotms/assembly.hpp"
#include "biotms/fine_solver.hpp"

namespace biotms {

/// A pair of weighted norms of one error field, with the same norms of the
/// reference field for relative values.
struct NormPair {
  double l2 = 0.0;      // weighted L2
  double h1 = 0.0;      // weighted H1 seminorm (energy seminorm for displacement)
  double ref_l2 = 0.0;
  double ref_h1 = 0.0;

  double rel_l2() const { return ref_l2 > 0.0 ? l2 / ref_l2 : l2; }
  double rel_h1() const { return ref_h1 > 0.0 ? h1 / ref_h1 : h1; }
};

struct StepErrors {
  double time = 0.0;
  NormPair pressure;
  NormPair displacement;
};

struct ErrorReport {
  std::vector<StepErrors> steps;
  const StepErrors& final() const { return steps.back(); }
};

/// sqrt(x^T op x), clamped at zero for round-off negative values.
double energy_norm(const SparseMatrix& op, const Vector& x);

/// Weighted norms through the assembled (k/nu) mass and Darcy stiffness.
NormPair pressure_errors(const FineOperators& ops, const Vector& p_fine, const Vector& p_ms);

/// Weighted norms through the (lambda+2mu) vector mass and the elasticity form.
NormPair displacement_errors(const FineOperators& ops, const Vector& u_fine, const Vector& u_ms);

/// Errors at every common time level.
ErrorReport compare(const FineOperators& ops, const Trajectory& fine, const Trajectory& multiscale);

}  // namespace biotms
