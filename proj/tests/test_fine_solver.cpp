#include <gtest/gtest.h>

#include <Eigen/SparseLU>

#include "biotms/errors.hpp"
#include "biotms/fine_solver.hpp"
#include "biotms/metrics.hpp"

using namespace biotms;

namespace {

struct Setup {
  FineMesh mesh;
  MaterialField mat;
  FineOperators ops;
};

Setup make_setup(int n, int case_id = 1) {
  Setup s;
  s.mesh = build_fine_mesh(n);
  s.mat = build_case(case_id, s.mesh, generate_inclusions_strips({}));
  s.ops = assemble_operators(s.mesh, s.mat);
  return s;
}

double weighted_distance(const FineOperators& ops, const State& a, const State& b) {
  return energy_norm(ops.pressure_mass, a.p - b.p);
}

}  // namespace

TEST(FineSolver, ZeroDataGivesZeroTrajectory) {
  const auto s = make_setup(8);
  for (Scheme scheme : {Scheme::Coupled, Scheme::FixedStress}) {
    SchemeConfig cfg;
    cfg.scheme = scheme;
    cfg.steps = 4;
    FineSolver solver(s.ops, homogeneous_boundary_conditions(s.mesh), cfg);
    const auto tr = solver.run(Vector::Zero(s.mesh.num_nodes()));
    ASSERT_EQ(tr.states.size(), 5u);
    for (const auto& st : tr.states) {
      EXPECT_EQ(st.p.cwiseAbs().maxCoeff(), 0.0);
      EXPECT_EQ(st.u.cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(FineSolver, DirichletExactness) {
  const auto s = make_setup(12);
  const auto bc = layered_boundary_conditions(s.mesh, 0.25, 1.0);
  for (Scheme scheme : {Scheme::Coupled, Scheme::FixedStress}) {
    SchemeConfig cfg;
    cfg.scheme = scheme;
    cfg.steps = 5;
    FineSolver solver(s.ops, bc, cfg);
    const auto tr = solver.run(Vector::Zero(s.mesh.num_nodes()));
    for (const auto& st : tr.states) {
      for (int i = 0; i < s.mesh.num_nodes(); ++i) {
        if (s.mesh.boundary[i] & kTop) EXPECT_NEAR(st.p[i], 1.0, 1e-12);
        if (s.mesh.boundary[i] & kBottom) EXPECT_NEAR(st.p[i], 0.25, 1e-12);
        if (s.mesh.boundary[i] & kLeft) EXPECT_EQ(st.u[2 * i], 0.0);
        if (s.mesh.boundary[i] & kBottom) EXPECT_EQ(st.u[2 * i + 1], 0.0);
      }
    }
    EXPECT_GT(tr.states[0].u.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_DOUBLE_EQ(tr.states.back().time, 25.0);
  }
}

TEST(FineSolver, InitialDisplacementMatchesMonolithicSolve) {
  const auto m = build_fine_mesh(8);
  const auto mat = homogeneous_material(m, 1.0, 1.0, 1.0);
  const auto ops = assemble_operators(m, mat);
  const auto bc = layered_boundary_conditions(m, 0.0, 1.0);
  Vector p0(m.num_nodes());
  for (int i = 0; i < m.num_nodes(); ++i) p0[i] = m.nodes[i].y;
  FineSolver solver(ops, bc, SchemeConfig{});
  const State st = solver.initialize(p0);

  // oracle: [[I, 0], [G, A]] with both field constraints eliminated by hand
  const int nn = m.num_nodes();
  const SparseMatrix id = [&] {
    SparseMatrix i(nn, nn);
    i.setIdentity();
    return i;
  }();
  SparseMatrix zero(nn, 2 * nn);
  const SparseMatrix k = block_matrix(id, zero, ops.grad, ops.elasticity);
  DirichletData all = bc.pressure;
  for (std::size_t j = 0; j < bc.displacement.dofs.size(); ++j) {
    all.dofs.push_back(nn + bc.displacement.dofs[j]);
    all.values.push_back(bc.displacement.values[j]);
  }
  Vector rhs = Vector::Zero(3 * nn);
  rhs.head(nn) = p0;
  const auto [op, b] = eliminate_dirichlet(k, rhs, all);
  Eigen::SparseLU<SparseMatrix> lu(op);
  const Vector x = lu.solve(b);
  EXPECT_LE((x.tail(2 * nn) - st.u).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, st.u.cwiseAbs().maxCoeff()));
}

TEST(FineSolver, LargeStepApproachesStationarySolve) {
  const auto s = make_setup(10);
  const auto bc = layered_boundary_conditions(s.mesh, 0.0, 1.0);
  SchemeConfig cfg;
  cfg.tau = 1e9;
  cfg.steps = 1;
  FineSolver solver(s.ops, bc, cfg);
  const auto tr = solver.run(Vector::Zero(s.mesh.num_nodes()));
  const State stat = solver.solve_stationary();
  EXPECT_LE((tr.states.back().p - stat.p).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((tr.states.back().u - stat.u).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(FineSolver, FixedStressFromEquilibriumIsStationary) {
  const auto s = make_setup(8);
  const auto bc = layered_boundary_conditions(s.mesh, 0.0, 1.0);
  SchemeConfig cfg;
  cfg.scheme = Scheme::FixedStress;
  FineSolver solver(s.ops, bc, cfg);
  SchemeConfig stat_cfg;
  FineSolver coupled(s.ops, bc, stat_cfg);
  const State eq = coupled.solve_stationary();
  const State next = solver.step_fixed_stress(eq, eq);
  EXPECT_LE((next.p - eq.p).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE((next.u - eq.u).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FineSolver, FixedStressIterationsConvergeToCoupled) {
  const auto s = make_setup(10);
  const auto bc = layered_boundary_conditions(s.mesh, 0.0, 1.0);
  SchemeConfig c;
  c.steps = 1;
  const auto ref = FineSolver(s.ops, bc, c).run(Vector::Zero(s.mesh.num_nodes()));
  double prev = 1e300;
  for (int it : {0, 2, 8, 40}) {
    SchemeConfig f = c;
    f.scheme = Scheme::FixedStress;
    f.fixed_stress_iterations = it;
    const auto tr = FineSolver(s.ops, bc, f).run(Vector::Zero(s.mesh.num_nodes()));
    const double d = weighted_distance(s.ops, tr.states.back(), ref.states.back());
    EXPECT_LE(d, prev);
    prev = d;
  }
  EXPECT_LE(prev, 1e-8);
}

TEST(FineSolver, SplittingErrorShrinksWithStep) {
  const auto s = make_setup(12);
  const auto bc = layered_boundary_conditions(s.mesh, 0.0, 1.0);
  double prev = 1e300;
  for (int k = 0; k < 3; ++k) {
    SchemeConfig c;
    c.tau = 2.0 / (1 << k);
    c.steps = 5 * (1 << k);
    SchemeConfig f = c;
    f.scheme = Scheme::FixedStress;
    const auto a = FineSolver(s.ops, bc, c).run(Vector::Zero(s.mesh.num_nodes()));
    const auto b = FineSolver(s.ops, bc, f).run(Vector::Zero(s.mesh.num_nodes()));
    const double d = weighted_distance(s.ops, a.states.back(), b.states.back());
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(FineSolver, DeterministicRuns) {
  const auto s = make_setup(10);
  const auto bc = layered_boundary_conditions(s.mesh, 0.0, 1.0);
  SchemeConfig c;
  c.steps = 3;
  const auto a = FineSolver(s.ops, bc, c).run(Vector::Zero(s.mesh.num_nodes()));
  const auto b = FineSolver(s.ops, bc, c).run(Vector::Zero(s.mesh.num_nodes()));
  for (std::size_t n = 0; n < a.states.size(); ++n) {
    EXPECT_EQ((a.states[n].p - b.states[n].p).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((a.states[n].u - b.states[n].u).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(FineSolver, ConfigValidation) {
  SchemeConfig c;
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = SchemeConfig{};
  c.steps = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
  EXPECT_EQ(parse_scheme("fixed-stress"), Scheme::FixedStress);
  EXPECT_EQ(parse_scheme("coupled"), Scheme::Coupled);
  EXPECT_THROW(parse_scheme("explicit"), InvalidInput);
  EXPECT_DOUBLE_EQ(SchemeConfig{}.final_time(), 100.0);
}

TEST(FineSolver, UnconstrainedElasticityIsReportedSingular) {
  const auto s = make_setup(4);
  BoundaryConditions bc;  // no displacement constraints: rigid motions are free
  EXPECT_THROW(FineSolver(s.ops, bc, SchemeConfig{}), SolverError);
}
