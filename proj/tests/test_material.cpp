#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>

#include "biotms/errors.hpp"
#include "biotms/material.hpp"
#include "biotms/mesh.hpp"

using namespace biotms;

TEST(Lame, HandEvaluatedValues) {
  const Lame l = lame_from_modulus(10.0, 0.22);
  // mu = E / (2 (1 + eta)), lambda = E eta / ((1 + eta)(1 - 2 eta))
  EXPECT_NEAR(l.mu, 10.0 / 2.44, 1e-14);
  EXPECT_NEAR(l.lambda, 2.2 / (1.22 * 0.56), 1e-14);
  EXPECT_NEAR(l.mu, 4.0984, 1e-4);
  EXPECT_NEAR(l.lambda, 3.2201, 1e-4);

  const Lame tenth = lame_from_modulus(1.0, 0.22);
  EXPECT_NEAR(tenth.mu, l.mu / 10.0, 1e-15);
  EXPECT_NEAR(tenth.lambda, l.lambda / 10.0, 1e-15);
  EXPECT_NEAR(lame_from_modulus(1e-3, 0.22).mu, 4.0984e-4, 1e-8);
}

TEST(Lame, DrainedModulus) {
  EXPECT_NEAR(drained_modulus(10.0, 0.22), 11.4169, 1e-4);
  const Lame l = lame_from_modulus(10.0, 0.22);
  // E (1 - eta) / ((1 - 2 eta)(1 + eta)) coincides with lambda + 2 mu
  EXPECT_NEAR(drained_modulus(10.0, 0.22), l.lambda + 2.0 * l.mu, 1e-13);
  EXPECT_DOUBLE_EQ(drained_modulus(0.0, 0.22), 0.0);
  EXPECT_NEAR(drained_modulus(7.0, 0.0), 7.0, 1e-14);
  EXPECT_THROW(lame_from_modulus(1.0, 0.5), InvalidInput);
  EXPECT_THROW(drained_modulus(1.0, 0.6), InvalidInput);
}

TEST(Material, CaseCoefficients) {
  const auto mesh = build_fine_mesh(60);
  const auto geo = generate_inclusions_strips({});
  const auto c1 = build_case(1, mesh, geo);
  const auto c2 = build_case(2, mesh, geo);
  EXPECT_EQ(c1.permeability, c2.permeability);
  EXPECT_EQ(c1.biot_modulus, c2.biot_modulus);
  EXPECT_EQ(c1.label, c2.label);
  const auto [lo1, hi1] = std::minmax_element(c1.modulus.begin(), c1.modulus.end());
  const auto [lo2, hi2] = std::minmax_element(c2.modulus.begin(), c2.modulus.end());
  EXPECT_NEAR(*hi1 / *lo1, 10.0, 1e-12);
  EXPECT_NEAR(*hi2 / *lo2, 1e4, 1e-8);
  for (int c = 0; c < c1.num_cells(); ++c) {
    const bool one = c1.label[c] == 1;
    EXPECT_EQ(c1.permeability[c], one ? 1e-3 : 1.0);
    EXPECT_EQ(c1.biot_modulus[c], one ? 1.0 : 10.0);
    EXPECT_EQ(c2.modulus[c], one ? 10.0 : 1e-3);
    EXPECT_GT(c1.mu[c], 0.0);
    EXPECT_GT(c1.lambda[c], 0.0);
    EXPECT_GT(c1.drained[c], 0.0);
  }
  EXPECT_EQ(c1.alpha, 0.9);
  EXPECT_EQ(c1.poisson, 0.22);
  EXPECT_EQ(c1.viscosity, 1.0);
  EXPECT_THROW(case_coefficients(3), InvalidInput);
}

TEST(Material, UniformLabelGivesHomogeneousField) {
  const auto mesh = build_fine_mesh(10);
  const auto m = build_case(1, mesh, uniform_geometry(10, 10, 1));
  for (double k : m.permeability) EXPECT_EQ(k, 1e-3);
}

TEST(Material, DerivedFieldsAreDeterministic) {
  const auto mesh = build_fine_mesh(20);
  const auto geo = generate_inclusions_strips({});
  const auto a = build_case(2, mesh, geo);
  const auto b = build_case(2, mesh, geo);
  EXPECT_EQ(a.mu, b.mu);
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_EQ(a.drained, b.drained);
}

TEST(Geometry, RasterOrientationAndRoundTrip) {
  SubdomainGeometry g = uniform_geometry(4, 2, 1);
  g.labels[0] = 2;  // row 0 is the top row: pixel (0, 0) covers x<1/4, y>1/2
  EXPECT_EQ(g.label_at({0.1, 0.9}), 2);
  EXPECT_EQ(g.label_at({0.1, 0.1}), 1);
  EXPECT_EQ(g.label_at({0.9, 0.9}), 1);

  const auto path = std::filesystem::temp_directory_path() / "biotms_geo_test.txt";
  write_geometry(g, path.string());
  const auto back = read_geometry(path.string());
  EXPECT_EQ(back.width, 4);
  EXPECT_EQ(back.height, 2);
  EXPECT_EQ(back.labels, g.labels);
  std::filesystem::remove(path);
  EXPECT_THROW(read_geometry("/nonexistent/geometry.txt"), InvalidInput);
}

TEST(Geometry, GeneratorIsSeededAndMixed) {
  const auto a = generate_inclusions_strips({});
  const auto b = generate_inclusions_strips({});
  EXPECT_EQ(a.labels, b.labels);
  InclusionStripSpec other;
  other.seed = 8;
  EXPECT_NE(generate_inclusions_strips(other).labels, a.labels);
  const auto twos = std::count(a.labels.begin(), a.labels.end(), 2);
  EXPECT_GT(twos, 0);
  EXPECT_LT(twos, static_cast<long>(a.labels.size()) / 2);
}

TEST(Material, RejectsBadCoefficients) {
  const auto mesh = build_fine_mesh(2);
  auto c = case_coefficients(1);
  c.permeability[0] = 0.0;
  EXPECT_THROW(make_material(mesh, uniform_geometry(2, 2, 1), c), InvalidInput);
  c = case_coefficients(1);
  c.poisson = 0.5;
  EXPECT_THROW(make_material(mesh, uniform_geometry(2, 2, 1), c), InvalidInput);
}
