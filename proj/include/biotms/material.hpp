#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biotms/mesh.hpp"

namespace biotms {

struct Lame {
  double mu = 0.0;
  double lambda = 0.0;
};

/// Lame parameters from elastic modulus and Poisson ratio.
Lame lame_from_modulus(double modulus, double poisson);

/// Drained bulk modulus E(1-v)/((1-2v)(1+v)).
double drained_modulus(double modulus, double poisson);

/// Label raster over the unit square. Row 0 is the top row (y near 1);
/// labels are 1 or 2. A fine cell takes the label of the pixel under its centroid.
struct SubdomainGeometry {
  int width = 0;
  int height = 0;
  std::vector<int> labels;  // row-major

  int label_at(Point p) const;
};

/// Plain-text raster: "width height" then width*height integer labels.
SubdomainGeometry read_geometry(const std::string& path);
void write_geometry(const SubdomainGeometry& geometry, const std::string& path);

/// Background of label 1 with circular inclusions and thin strips of label 2.
struct InclusionStripSpec {
  int width = 60;
  int height = 60;
  std::uint64_t seed = 7;
  int inclusions = 14;
  double min_radius = 0.025;
  double max_radius = 0.05;
  int horizontal_strips = 2;
  int vertical_strips = 1;
  double strip_width = 1.0 / 30.0;
};

SubdomainGeometry generate_inclusions_strips(const InclusionStripSpec& spec);

SubdomainGeometry uniform_geometry(int width, int height, int label);

/// Piecewise-constant coefficients on the fine cells.
struct MaterialField {
  std::vector<double> permeability;  // k
  std::vector<double> biot_modulus;  // M
  std::vector<double> modulus;       // E
  std::vector<double> mu;
  std::vector<double> lambda;
  std::vector<double> drained;       // K_dr
  std::vector<int> label;
  double viscosity = 1.0;
  double alpha = 0.9;
  double poisson = 0.22;

  int num_cells() const { return static_cast<int>(permeability.size()); }
  double mobility(int cell) const { return permeability[cell] / viscosity; }
  double storage(int cell) const { return 1.0 / biot_modulus[cell]; }
  /// alpha^2 / K_dr, the fixed-stress stabilization weight.
  double stabilization(int cell) const { return alpha * alpha / drained[cell]; }
  double p_modulus(int cell) const { return lambda[cell] + 2.0 * mu[cell]; }
};

/// Per-subdomain coefficient values (index 0 -> label 1, index 1 -> label 2).
struct SubdomainCoefficients {
  double permeability[2];
  double biot_modulus[2];
  double modulus[2];
  double viscosity = 1.0;
  double alpha = 0.9;
  double poisson = 0.22;
};

SubdomainCoefficients case_coefficients(int case_id);

MaterialField make_material(const FineMesh& mesh, const SubdomainGeometry& geometry,
                            const SubdomainCoefficients& coefficients);

/// Test case 1 (E = 10 / 1) or 2 (E = 10 / 1e-3) on the given geometry.
MaterialField build_case(int case_id, const FineMesh& mesh, const SubdomainGeometry& geometry);

/// Same coefficients in every cell.
MaterialField homogeneous_material(const FineMesh& mesh, double permeability, double biot_modulus,
                                   double modulus, double viscosity = 1.0, double alpha = 0.9,
                                   double poisson = 0.22);

}  // namespace biotms
