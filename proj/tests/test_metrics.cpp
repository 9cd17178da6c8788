#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "biotms/metrics.hpp"

using namespace biotms;

namespace {

struct Setup {
  FineMesh mesh;
  MaterialField mat;
  FineOperators ops;
};

Setup make_setup(int n) {
  Setup s;
  s.mesh = build_fine_mesh(n);
  s.mat = homogeneous_material(s.mesh, 2.0, 1.0, 5.0);
  s.ops = assemble_operators(s.mesh, s.mat);
  return s;
}

}  // namespace

TEST(Metrics, LinearFieldOracle) {
  const auto s = make_setup(6);
  const int nn = s.mesh.num_nodes();
  Vector p(nn), u = Vector::Zero(2 * nn);
  for (int i = 0; i < nn; ++i) {
    p[i] = s.mesh.nodes[i].x;
    u[2 * i] = s.mesh.nodes[i].x;
  }
  // int 2 x^2 = 2/3, int 2 |grad x|^2 = 2
  const auto np = pressure_errors(s.ops, p, Vector::Zero(nn));
  EXPECT_NEAR(np.l2, std::sqrt(2.0 / 3.0), 1e-13);
  EXPECT_NEAR(np.h1, std::sqrt(2.0), 1e-13);
  EXPECT_NEAR(np.ref_l2, np.l2, 1e-15);
  EXPECT_NEAR(np.rel_l2(), 1.0, 1e-14);
  // u = (x, 0): (lambda + 2mu)/3 and 2 mu + lambda
  const double pm = s.mat.lambda[0] + 2.0 * s.mat.mu[0];
  const auto nu = displacement_errors(s.ops, u, Vector::Zero(2 * nn));
  EXPECT_NEAR(nu.l2, std::sqrt(pm / 3.0), 1e-12);
  EXPECT_NEAR(nu.h1, std::sqrt(pm), 1e-12);
}

TEST(Metrics, ConstantsAndRigidMotions) {
  const auto s = make_setup(5);
  const int nn = s.mesh.num_nodes();
  const auto np = pressure_errors(s.ops, Vector::Constant(nn, 3.0), Vector::Constant(nn, 1.0));
  EXPECT_NEAR(np.l2, std::sqrt(2.0) * 2.0, 1e-13);
  EXPECT_NEAR(np.h1, 0.0, 1e-7);
  Vector rot(2 * nn);
  for (int i = 0; i < nn; ++i) {
    rot[2 * i] = -s.mesh.nodes[i].y;
    rot[2 * i + 1] = s.mesh.nodes[i].x;
  }
  const auto nu = displacement_errors(s.ops, rot, Vector::Zero(2 * nn));
  EXPECT_GT(nu.l2, 0.1);
  EXPECT_NEAR(nu.h1, 0.0, 1e-6);
  EXPECT_EQ(pressure_errors(s.ops, Vector::Zero(nn), Vector::Zero(nn)).rel_l2(), 0.0);
}

TEST(Metrics, NormAxioms) {
  const auto s = make_setup(7);
  const int nn = s.mesh.num_nodes();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    Vector a(nn), b(nn);
    for (int i = 0; i < nn; ++i) {
      a[i] = g(rng);
      b[i] = g(rng);
    }
    const double na = energy_norm(s.ops.pressure_mass, a), nb = energy_norm(s.ops.pressure_mass, b);
    EXPECT_LE(energy_norm(s.ops.pressure_mass, a + b), na + nb + 1e-12);
    EXPECT_NEAR(energy_norm(s.ops.pressure_mass, -2.5 * a), 2.5 * na, 1e-12);
    EXPECT_GT(na, 0.0);
  }
}

TEST(Metrics, CompareAlignsTimeLevels) {
  const auto s = make_setup(4);
  const int nn = s.mesh.num_nodes();
  Trajectory a, b;
  for (int n = 0; n < 3; ++n) {
    a.states.push_back({5.0 * n, Vector::Constant(nn, 1.0 + n), Vector::Zero(2 * nn)});
    b.states.push_back({5.0 * n, Vector::Constant(nn, 1.0), Vector::Zero(2 * nn)});
  }
  const auto rep = compare(s.ops, a, b);
  ASSERT_EQ(rep.steps.size(), 3u);
  EXPECT_DOUBLE_EQ(rep.final().time, 10.0);
  EXPECT_NEAR(rep.final().pressure.rel_l2(), 2.0 / 3.0, 1e-13);
  EXPECT_EQ(rep.steps[0].pressure.l2, 0.0);
}
