#include "biotms/material.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "biotms/errors.hpp"

namespace biotms {

namespace {

void check_elastic_range(double modulus, double poisson) {
  if (!(modulus >= 0.0)) throw InvalidInput("elastic modulus must be non-negative");
  if (!(poisson < 0.5)) throw InvalidInput("incompressible limit: Poisson ratio must be < 0.5");
  if (!(poisson > -1.0)) throw InvalidInput("Poisson ratio must be > -1");
}

}  // namespace

Lame lame_from_modulus(double modulus, double poisson) {
  check_elastic_range(modulus, poisson);
  return {modulus / (2.0 * (1.0 + poisson)),
          modulus * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson))};
}

double drained_modulus(double modulus, double poisson) {
  check_elastic_range(modulus, poisson);
  return modulus * (1.0 - poisson) / ((1.0 - 2.0 * poisson) * (1.0 + poisson));
}

int SubdomainGeometry::label_at(Point p) const {
  int col = static_cast<int>(std::floor(p.x * width));
  int row = static_cast<int>(std::floor((1.0 - p.y) * height));
  col = std::clamp(col, 0, width - 1);
  row = std::clamp(row, 0, height - 1);
  return labels[static_cast<std::size_t>(row) * width + col];
}

SubdomainGeometry read_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open geometry file: " + path);
  SubdomainGeometry g;
  if (!(in >> g.width >> g.height) || g.width < 1 || g.height < 1) {
    throw InvalidInput("geometry file " + path + ": bad 'width height' header");
  }
  g.labels.resize(static_cast<std::size_t>(g.width) * g.height);
  for (auto& label : g.labels) {
    if (!(in >> label)) throw InvalidInput("geometry file " + path + ": too few labels");
    if (label != 1 && label != 2) {
      throw InvalidInput("geometry file " + path + ": labels must be 1 or 2");
    }
  }
  return g;
}

void write_geometry(const SubdomainGeometry& geometry, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write geometry file: " + path);
  out << geometry.width << ' ' << geometry.height << '\n';
  for (int r = 0; r < geometry.height; ++r) {
    for (int c = 0; c < geometry.width; ++c) {
      if (c) out << ' ';
      out << geometry.labels[static_cast<std::size_t>(r) * geometry.width + c];
    }
    out << '\n';
  }
}

SubdomainGeometry uniform_geometry(int width, int height, int label) {
  return {width, height, std::vector<int>(static_cast<std::size_t>(width) * height, label)};
}

SubdomainGeometry generate_inclusions_strips(const InclusionStripSpec& spec) {
  struct Disk { double x, y, r; };
  struct Band { bool horizontal; double pos, from, to; };

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double a, double b) { return a + (b - a) * unit(rng); };

  std::vector<Band> bands;
  for (int s = 0; s < spec.horizontal_strips + spec.vertical_strips; ++s) {
    const double pos = uniform(0.15, 0.85);
    const double from = uniform(0.05, 0.3);
    const double to = uniform(0.7, 0.95);
    bands.push_back({s < spec.horizontal_strips, pos, from, to});
  }
  std::vector<Disk> disks;
  for (int d = 0; d < spec.inclusions; ++d) {
    const double r = uniform(spec.min_radius, spec.max_radius);
    disks.push_back({uniform(r, 1.0 - r), uniform(r, 1.0 - r), r});
  }

  SubdomainGeometry g = uniform_geometry(spec.width, spec.height, 1);
  for (int row = 0; row < spec.height; ++row) {
    for (int col = 0; col < spec.width; ++col) {
      const double x = (col + 0.5) / spec.width;
      const double y = 1.0 - (row + 0.5) / spec.height;
      bool inside = false;
      for (const auto& d : disks)
        inside = inside || (x - d.x) * (x - d.x) + (y - d.y) * (y - d.y) <= d.r * d.r;
      for (const auto& b : bands) {
        const double across = b.horizontal ? y : x;
        const double along = b.horizontal ? x : y;
        inside = inside || (std::abs(across - b.pos) <= 0.5 * spec.strip_width &&
                            along >= b.from && along <= b.to);
      }
      if (inside) g.labels[static_cast<std::size_t>(row) * spec.width + col] = 2;
    }
  }
  return g;
}

SubdomainCoefficients case_coefficients(int case_id) {
  SubdomainCoefficients c{};
  c.permeability[0] = 1e-3;
  c.permeability[1] = 1.0;
  c.biot_modulus[0] = 1.0;
  c.biot_modulus[1] = 10.0;
  c.viscosity = 1.0;
  c.alpha = 0.9;
  c.poisson = 0.22;
  c.modulus[0] = 10.0;
  if (case_id == 1) {
    c.modulus[1] = 1.0;
  } else if (case_id == 2) {
    c.modulus[1] = 1e-3;
  } else {
    throw InvalidInput("unknown case id " + std::to_string(case_id) + " (expected 1 or 2)");
  }
  return c;
}

MaterialField make_material(const FineMesh& mesh, const SubdomainGeometry& geometry,
                            const SubdomainCoefficients& coefficients) {
  if (!(coefficients.alpha >= 0.0 && coefficients.alpha <= 1.0)) {
    throw InvalidInput("Biot-Willis coefficient must lie in [0, 1]");
  }
  if (!(coefficients.poisson > 0.0 && coefficients.poisson < 0.5)) {
    throw InvalidInput("Poisson ratio must lie in (0, 0.5)");
  }
  if (!(coefficients.viscosity > 0.0)) throw InvalidInput("viscosity must be positive");
  for (int s = 0; s < 2; ++s) {
    if (!(coefficients.permeability[s] > 0.0 && coefficients.biot_modulus[s] > 0.0 &&
          coefficients.modulus[s] > 0.0)) {
      throw InvalidInput("permeability, Biot modulus and elastic modulus must be positive");
    }
  }

  MaterialField m;
  m.viscosity = coefficients.viscosity;
  m.alpha = coefficients.alpha;
  m.poisson = coefficients.poisson;
  const auto n = static_cast<std::size_t>(mesh.num_cells());
  for (auto* v : {&m.permeability, &m.biot_modulus, &m.modulus, &m.mu, &m.lambda, &m.drained})
    v->resize(n);
  m.label.resize(n);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const int label = geometry.label_at(mesh.centroid(c));
    const int s = label - 1;
    m.label[c] = label;
    m.permeability[c] = coefficients.permeability[s];
    m.biot_modulus[c] = coefficients.biot_modulus[s];
    m.modulus[c] = coefficients.modulus[s];
    const Lame l = lame_from_modulus(m.modulus[c], m.poisson);
    m.mu[c] = l.mu;
    m.lambda[c] = l.lambda;
    m.drained[c] = drained_modulus(m.modulus[c], m.poisson);
  }
  return m;
}

MaterialField build_case(int case_id, const FineMesh& mesh, const SubdomainGeometry& geometry) {
  return make_material(mesh, geometry, case_coefficients(case_id));
}

MaterialField homogeneous_material(const FineMesh& mesh, double permeability, double biot_modulus,
                                   double modulus, double viscosity, double alpha,
                                   double poisson) {
  SubdomainCoefficients c{};
  c.permeability[0] = c.permeability[1] = permeability;
  c.biot_modulus[0] = c.biot_modulus[1] = biot_modulus;
  c.modulus[0] = c.modulus[1] = modulus;
  c.viscosity = viscosity;
  c.alpha = alpha;
  c.poisson = poisson;
  return make_material(mesh, uniform_geometry(1, 1, 1), c);
}

}  // namespace biotms
