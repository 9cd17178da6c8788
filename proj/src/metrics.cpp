#include "biotms/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "biotms/errors.hpp"

namespace biotms {

double energy_norm(const SparseMatrix& op, const Vector& x) {
  if (op.cols() != x.size()) throw DimensionMismatch("norm: vector length does not match operator");
  return std::sqrt(std::max(0.0, x.dot(op * x)));
}

NormPair pressure_errors(const FineOperators& ops, const Vector& p_fine, const Vector& p_ms) {
  if (p_fine.size() != p_ms.size()) throw DimensionMismatch("pressure fields differ in length");
  const Vector e = p_fine - p_ms;
  return {energy_norm(ops.pressure_mass, e), energy_norm(ops.darcy, e),
          energy_norm(ops.pressure_mass, p_fine), energy_norm(ops.darcy, p_fine)};
}

NormPair displacement_errors(const FineOperators& ops, const Vector& u_fine, const Vector& u_ms) {
  if (u_fine.size() != u_ms.size()) throw DimensionMismatch("displacement fields differ in length");
  const Vector e = u_fine - u_ms;
  return {energy_norm(ops.vector_mass, e), energy_norm(ops.elasticity, e),
          energy_norm(ops.vector_mass, u_fine), energy_norm(ops.elasticity, u_fine)};
}

ErrorReport compare(const FineOperators& ops, const Trajectory& fine, const Trajectory& multiscale) {
  if (fine.states.size() != multiscale.states.size()) {
    throw DimensionMismatch("trajectories have different step counts");
  }
  ErrorReport report;
  for (std::size_t n = 0; n < fine.states.size(); ++n) {
    const auto& f = fine.states[n];
    const auto& m = multiscale.states[n];
    report.steps.push_back({f.time, pressure_errors(ops, f.p, m.p), displacement_errors(ops, f.u, m.u)});
  }
  return report;
}

}  // namespace biotms
