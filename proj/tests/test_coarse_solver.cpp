#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "biotms/coarse_solver.hpp"
#include "biotms/errors.hpp"
#include "biotms/metrics.hpp"

using namespace biotms;

namespace {

struct Setup {
  FineMesh mesh;
  CoarseGrid cg;
  MaterialField mat;
  FineOperators ops;
};

Setup make_setup(int n, int nc, bool homogeneous = false) {
  Setup s;
  s.mesh = build_fine_mesh(n);
  s.cg = build_coarse_grid(s.mesh, nc);
  s.mat = homogeneous ? homogeneous_material(s.mesh, 1.0, 2.0, 1.0)
                      : build_case(1, s.mesh, generate_inclusions_strips({}));
  s.ops = assemble_operators(s.mesh, s.mat);
  return s;
}

Vector nodal(const FineMesh& m, double (*f)(double, double)) {
  Vector v(m.num_nodes());
  for (int i = 0; i < m.num_nodes(); ++i) v[i] = f(m.nodes[i].x, m.nodes[i].y);
  return v;
}

CoarseSolver identity_solver(const Setup& s, const BoundaryConditions& bc, const SchemeConfig& cfg) {
  const int nn = s.mesh.num_nodes();
  return CoarseSolver(project(s.ops, identity_restriction(FieldKind::Pressure, nn, bc.pressure.dofs),
                              identity_restriction(FieldKind::Displacement, 2 * nn, bc.displacement.dofs),
                              bc.pressure.lift(nn), bc.displacement.lift(2 * nn), bc, cfg));
}

// Standard P1 element matrices on a triangle with vertices a, b, c.
void p1_element(const Point& a, const Point& b, const Point& c, Eigen::Matrix3d& stiff, Eigen::Matrix3d& mass) {
  const double area = 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
  const double bx[3] = {b.y - c.y, c.y - a.y, a.y - b.y};
  const double by[3] = {c.x - b.x, a.x - c.x, b.x - a.x};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      stiff(i, j) = (bx[i] * bx[j] + by[i] * by[j]) / (4.0 * area);
      mass(i, j) = area / 12.0 * (i == j ? 2.0 : 1.0);
    }
}

}  // namespace

TEST(CoarseSolver, IdentityRestrictionReproducesFine) {
  const auto s = make_setup(8, 2);
  const auto bc = layered_boundary_conditions(s.mesh, 0.0, 1.0);
  const Vector p0 = nodal(s.mesh, [](double, double y) { return y * y; });
  for (Scheme scheme : {Scheme::Coupled, Scheme::FixedStress}) {
    SchemeConfig cfg;
    cfg.scheme = scheme;
    cfg.steps = 6;
    const auto fine = FineSolver(s.ops, bc, cfg).run(p0);
    const auto coarse = identity_solver(s, bc, cfg).run(p0);
    ASSERT_EQ(fine.states.size(), coarse.states.size());
    for (std::size_t n = 0; n < fine.states.size(); ++n) {
      EXPECT_LE((fine.states[n].p - coarse.states[n].p).norm(), 1e-12 * fine.states[n].p.norm());
      EXPECT_LE((fine.states[n].u - coarse.states[n].u).norm(), 1e-12 * fine.states[n].u.norm());
    }
  }
}

TEST(CoarseSolver, ZeroDataGivesZero) {
  const auto s = make_setup(12, 3);
  OfflineSettings os;
  os.n_off_p = 2;
  os.n_off_u = 2;
  const auto basis = build_offline(s.mesh, s.cg, s.mat, os);
  const auto bc = homogeneous_boundary_conditions(s.mesh);
  const int nn = s.mesh.num_nodes();
  SchemeConfig cfg;
  cfg.steps = 3;
  CoarseSolver solver(project(s.ops, restriction(basis, FieldKind::Pressure, 2, bc.pressure),
                              restriction(basis, FieldKind::Displacement, 2, bc.displacement),
                              dirichlet_lift(basis, s.cg, FieldKind::Pressure, bc.pressure, nn),
                              dirichlet_lift(basis, s.cg, FieldKind::Displacement, bc.displacement, nn), bc,
                              cfg));
  for (const auto& st : solver.run(Vector::Zero(nn)).states) {
    EXPECT_EQ(st.p.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(st.u.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(CoarseSolver, MultiscaleRunKeepsDirichletValues) {
  const auto s = make_setup(12, 3);
  OfflineSettings os;
  os.n_off_p = 3;
  os.n_off_u = 3;
  const auto basis = build_offline(s.mesh, s.cg, s.mat, os);
  const auto bc = layered_boundary_conditions(s.mesh, 0.5, 2.0);
  const int nn = s.mesh.num_nodes();
  for (Scheme scheme : {Scheme::Coupled, Scheme::FixedStress}) {
    SchemeConfig cfg;
    cfg.scheme = scheme;
    cfg.steps = 4;
    CoarseSolver solver(project(s.ops, restriction(basis, FieldKind::Pressure, 3, bc.pressure),
                                restriction(basis, FieldKind::Displacement, 3, bc.displacement),
                                dirichlet_lift(basis, s.cg, FieldKind::Pressure, bc.pressure, nn),
                                dirichlet_lift(basis, s.cg, FieldKind::Displacement, bc.displacement, nn), bc,
                                cfg));
    EXPECT_EQ(solver.system().dim_p(), 16 * 3);
    EXPECT_EQ(solver.system().dim_u(), 16 * 6);
    const auto tr = solver.run(Vector::Zero(nn));
    for (const auto& st : tr.states)
      for (int i = 0; i < nn; ++i) {
        if (s.mesh.boundary[i] & kTop) EXPECT_NEAR(st.p[i], 2.0, 1e-12);
        if (s.mesh.boundary[i] & kBottom) EXPECT_NEAR(st.p[i], 0.5, 1e-12);
        if (s.mesh.boundary[i] & kLeft) EXPECT_EQ(st.u[2 * i], 0.0);
        if (s.mesh.boundary[i] & kBottom) EXPECT_EQ(st.u[2 * i + 1], 0.0);
      }
    // prolongation is lift + R^T c
    CoarseState c;
    c.p = Vector::LinSpaced(solver.system().dim_p(), -1.0, 1.0);
    c.u = Vector::LinSpaced(solver.system().dim_u(), 0.0, 2.0);
    const State f = solver.prolong(c);
    EXPECT_LE((f.p - solver.system().p_lift - Matrix(solver.system().rp.matrix).transpose() * c.p).norm(), 1e-13);
  }
}

TEST(CoarseSolver, HomogeneousSingleModeIsCoarseP1) {
  // pressure equation (S/tau + B) with natural boundary conditions on constant coefficients
  const auto s = make_setup(24, 4, true);
  OfflineSettings os;
  os.n_off_p = 1;
  os.n_off_u = 1;
  const auto basis = build_offline(s.mesh, s.cg, s.mat, os);
  const int nn = s.mesh.num_nodes();
  BoundaryConditions none;
  none.displacement = homogeneous_boundary_conditions(s.mesh).displacement;
  SchemeConfig cfg;
  const auto sys = project(s.ops, restriction(basis, FieldKind::Pressure, 1, DirichletData{}),
                           identity_restriction(FieldKind::Displacement, 2 * nn, none.displacement.dofs),
                           Vector::Zero(nn), Vector::Zero(2 * nn), none, cfg);

  // independent coarse P1 assembly on the coarse triangles
  const int nc = s.cg.num_nodes();
  Matrix stiff = Matrix::Zero(nc, nc), mass = Matrix::Zero(nc, nc);
  for (const auto& t : s.cg.coarse_cells) {
    Eigen::Matrix3d ke, me;
    p1_element(s.cg.coords[t[0]], s.cg.coords[t[1]], s.cg.coords[t[2]], ke, me);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        stiff(t[a], t[b]) += ke(a, b);
        mass(t[a], t[b]) += me(a, b);
      }
  }
  const double k = 1.0, storage = 1.0 / 2.0, tau = cfg.tau;
  Vector c(nc);
  for (int i = 0; i < nc; ++i) c[i] = std::sin(3.0 * s.cg.coords[i].x) + s.cg.coords[i].y * s.cg.coords[i].y;
  // fine representation of the coarse P1 field
  auto to_fine = [&](const Vector& coef) {
    Vector f = Vector::Zero(nn);
    for (int cell = 0; cell < s.cg.num_cells(); ++cell)
      for (int fc : s.cg.cell_to_fine[cell])
        for (int v : s.mesh.cells[fc]) {
          double val = 0.0;
          for (int a = 0; a < 3; ++a) val += coef[s.cg.coarse_cells[cell][a]] * s.cg.hat(cell, a, s.mesh.nodes[v]);
          f[v] = val;
        }
    return f;
  };
  const Vector p0 = to_fine(c);
  const Matrix lhs_ref = storage / tau * mass + k * stiff;
  const Eigen::LDLT<Matrix> ref(lhs_ref);
  const Matrix lhs_ms = sys.storage / tau + sys.darcy;
  const Eigen::LDLT<Matrix> ms(lhs_ms);
  const Matrix rpt = Matrix(sys.rp.matrix).transpose();
  Vector cm = Matrix(sys.storage).ldlt().solve(sys.storage_projector * p0);
  Vector cr = c;
  for (int n = 0; n < 5; ++n) {
    cr = ref.solve(storage / tau * (mass * cr));
    cm = ms.solve(sys.storage / tau * cm);
    const Vector diff = to_fine(cr) - rpt * cm;
    EXPECT_LE(energy_norm(s.ops.pressure_mass, diff), 1e-8 * energy_norm(s.ops.pressure_mass, to_fine(cr)));
  }
}

TEST(CoarseSolver, RankDeficientBasisIsReported) {
  // linear partition of unity times rotations sums to zero in homogeneous media
  const auto s = make_setup(12, 3, true);
  OfflineSettings os;
  os.n_off_p = 1;
  os.n_off_u = 3;
  os.pou = PouMode::Linear;
  const auto basis = build_offline(s.mesh, s.cg, s.mat, os);
  const auto bc = BoundaryConditions{};
  const int nn = s.mesh.num_nodes();
  SchemeConfig cfg;
  try {
    CoarseSolver solver(project(s.ops, restriction(basis, FieldKind::Pressure, 1, bc.pressure),
                                restriction(basis, FieldKind::Displacement, 3, bc.displacement),
                                Vector::Zero(nn), Vector::Zero(2 * nn), bc, cfg));
    FAIL() << "singular coarse elasticity was accepted";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("rank-deficient"), std::string::npos) << e.what();
  }
}
