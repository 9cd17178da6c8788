// Command-line driver: mesh, offline, solve-fine, solve-coarse, sweep, report.
#include <filesystem>
#include <iostream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "biotms/errors.hpp"
#include "biotms/experiment.hpp"
#include "biotms/parallel.hpp"
#include "biotms/vtk.hpp"

namespace fs = std::filesystem;
using namespace biotms;

namespace {

struct Flags {
  std::string scheme = "coupled";
  std::string snapshots = "delta";
  std::string pou = "multiscale";
};

void print_config(const ExperimentConfig& c) {
  fmt::print("mesh {}x{} / coarse {}x{}, case {}, scheme {}, tau {}, steps {}\n", c.fine_n, c.fine_n,
             c.coarse_n, c.coarse_n, c.case_id, to_string(c.scheme), c.tau, c.steps);
}

int cmd_mesh(const ExperimentConfig& c) {
  const Problem pb = make_problem(c);
  fs::create_directories(c.output);
  int label2 = 0;
  for (int l : pb.material.label) label2 += l == 2;
  fmt::print("fine: {} nodes, {} cells; coarse: {} nodes, {} cells; {} fine cells per coarse cell\n",
             pb.mesh.num_nodes(), pb.mesh.num_cells(), pb.coarse.num_nodes(), pb.coarse.num_cells(),
             pb.mesh.num_cells() / pb.coarse.num_cells());
  fmt::print("subdomain 2 holds {} of {} cells\n", label2, pb.mesh.num_cells());
  VtkFields f;
  Vector labels(pb.mesh.num_cells());
  for (int k = 0; k < pb.mesh.num_cells(); ++k) labels[k] = pb.material.label[k];
  f.cell_scalars.emplace_back("subdomain", labels);
  write_vtk((fs::path(c.output) / "mesh.vtk").string(), pb.mesh, f);
  write_geometry(pb.geometry, (fs::path(c.output) / "geometry.txt").string());
  write_manifest(c.output, {"mesh.vtk", "geometry.txt"}, c);
  return 0;
}

int cmd_offline(const ExperimentConfig& c) {
  const Problem pb = make_problem(c);
  const std::string cache = c.cache_dir.empty() ? (fs::path(c.output) / "cache").string() : c.cache_dir;
  for (int t : c.oversample) {
    bool hit = false;
    const OfflineBasis b = cached_offline(pb, offline_settings(c, t), cache, &hit);
    fmt::print("t = {}: {} ({})\n", t, hit ? "cache hit" : "built",
               offline_cache_key(pb, offline_settings(c, t)));
    int regularized = 0;
    for (const auto& nb : b.nodes) regularized += nb.regularized;
    for (int np : c.noff_p) {
      const auto r = restriction(b, FieldKind::Pressure, np, pb.bc.pressure);
      const auto rank = check_rank(r);
      fmt::print("  pressure N_off {:>2}: dim {:>5}, rank {}\n", np, r.rows(),
                 rank.full_rank ? "full" : "DEFICIENT");
    }
    for (int nu : c.noff_u) {
      const auto r = restriction(b, FieldKind::Displacement, nu, pb.bc.displacement);
      const auto rank = check_rank(r);
      fmt::print("  displacement N_off {:>2}: dim {:>5}, rank {}\n", nu, r.rows(),
                 rank.full_rank ? "full" : "DEFICIENT");
    }
    if (regularized) fmt::print("  {} neighborhoods needed a mass ridge\n", regularized);
  }
  return 0;
}

int cmd_solve_fine(const ExperimentConfig& c) {
  const Problem pb = make_problem(c);
  fs::create_directories(c.output);
  print_config(c);
  const Trajectory tr = run_fine(pb, c);
  std::vector<std::string> files = {"fine_diagnostics.csv"};
  write_diagnostics_csv((fs::path(c.output) / files[0]).string(), tr);
  if (c.vtk) write_trajectory_vtk((fs::path(c.output) / "fine").string(), pb, tr);
  write_manifest(c.output, files, c);
  const auto& last = tr.states.back();
  fmt::print("t = {}: p in [{:.4g}, {:.4g}], |u|_inf = {:.4g}\n", last.time, last.p.minCoeff(),
             last.p.maxCoeff(), last.u.cwiseAbs().maxCoeff());
  return 0;
}

int cmd_solve_coarse(const ExperimentConfig& c) {
  const Problem pb = make_problem(c);
  fs::create_directories(c.output);
  print_config(c);
  const std::string cache = c.cache_dir.empty() ? (fs::path(c.output) / "cache").string() : c.cache_dir;
  const CellSpec spec{c.noff_p.front(), c.noff_u.front(), c.oversample.front()};
  const Trajectory ref = run_fine(pb, c);
  const OfflineBasis b = cached_offline(pb, offline_settings(c, spec.oversample), cache);
  Trajectory ms;
  const CellResult cell = run_cell(pb, b, ref, c, spec, &ms);
  if (cell.status != "ok") throw SolverError(cell.status);
  std::vector<std::string> files = {"coarse_errors.csv", "coarse_diagnostics.csv"};
  write_series_csv((fs::path(c.output) / files[0]).string(), cell.errors);
  write_diagnostics_csv((fs::path(c.output) / files[1]).string(), ms);
  if (c.vtk) write_trajectory_vtk((fs::path(c.output) / "coarse").string(), pb, ms);
  write_manifest(c.output, files, c);
  const auto& f = cell.errors.final();
  fmt::print("dim {} + {}: relative errors p L2 {:.3g} H1 {:.3g}, u L2 {:.3g} H1 {:.3g}\n", cell.dim_p,
             cell.dim_u, f.pressure.rel_l2(), f.pressure.rel_h1(), f.displacement.rel_l2(),
             f.displacement.rel_h1());
  return 0;
}

int cmd_sweep(const ExperimentConfig& c) {
  print_config(c);
  const auto summary = run_sweep(c);
  int failed = 0;
  for (const auto& cell : summary.cells) failed += cell.status != "ok";
  fmt::print("{}", write_report(c.output));
  if (failed) fmt::print("{} of {} cells failed (see cells.csv)\n", failed, summary.cells.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale solver for heterogeneous linear poroelasticity"};
  app.set_config("--config", "", "Flat key = value configuration file");
  app.fallthrough();
  app.require_subcommand(1);

  ExperimentConfig c;
  c.workers = worker_count();
  Flags flags;
  app.add_option("--fine-n", c.fine_n, "Fine cells per side")->capture_default_str();
  app.add_option("--coarse-n", c.coarse_n, "Coarse cells per side")->capture_default_str();
  app.add_option("--case", c.case_id, "Coefficient case (1 or 2)")->capture_default_str();
  app.add_option("--geometry", c.geometry, "Label raster file (default: generated)");
  app.add_option("--geometry-seed", c.geometry_seed, "Seed of the generated geometry")->capture_default_str();
  app.add_option("--scheme", flags.scheme, "coupled | fixed-stress")->capture_default_str();
  app.add_option("--tau", c.tau, "Time step")->capture_default_str();
  app.add_option("--steps", c.steps, "Number of time steps")->capture_default_str();
  app.add_option("--fs-iterations", c.fs_iterations, "Extra fixed-stress sweeps per step")->capture_default_str();
  app.add_option("--p-bottom", c.p_bottom, "Pressure on the bottom side")->capture_default_str();
  app.add_option("--p-top", c.p_top, "Pressure on the top side")->capture_default_str();
  app.add_option("--p-initial", c.p_initial, "Initial pressure")->capture_default_str();
  app.add_option("--noff-p", c.noff_p, "Pressure basis functions per node")->delimiter(',')->capture_default_str();
  app.add_option("--noff-u", c.noff_u, "Displacement basis functions per node")->delimiter(',')->capture_default_str();
  app.add_option("--pairing", c.pairing, "triangular | product | diagonal")->capture_default_str();
  app.add_option("--snapshots", flags.snapshots, "delta | random")->capture_default_str();
  app.add_option("--snapshot-ratio", c.snapshot_ratio, "Randomized snapshot fraction")->capture_default_str();
  app.add_option("--oversample-t", c.oversample, "Oversampling layers")->delimiter(',')->capture_default_str();
  app.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app.add_option("--pou", flags.pou, "multiscale | linear")->capture_default_str();
  app.add_option("--output", c.output, "Output directory")->capture_default_str();
  app.add_option("--cache-dir", c.cache_dir, "Offline cache (default: <output>/cache)");
  app.add_flag("--vtk", c.vtk, "Write per-step VTK fields");
  app.add_option("--workers", c.workers, "Worker threads (default: BIOTMS_WORKERS or cores)");

  auto* mesh = app.add_subcommand("mesh", "Build mesh and material; write mesh.vtk");
  auto* offline = app.add_subcommand("offline", "Build (or load) the offline bases");
  auto* fine = app.add_subcommand("solve-fine", "Fine-scale reference solve");
  auto* coarse = app.add_subcommand("solve-coarse", "One multiscale solve (first list entries)");
  auto* sweep = app.add_subcommand("sweep", "Full N_off / oversampling sweep with tables");
  auto* report = app.add_subcommand("report", "Rebuild tables from an output directory");
  std::string report_dir;
  report->add_option("dir", report_dir, "Output directory of a sweep")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    c.scheme = parse_scheme(flags.scheme);
    c.snapshots = parse_snapshot_mode(flags.snapshots);
    c.pou = parse_pou_mode(flags.pou);
    if (*report) {
      fmt::print("{}", write_report(report_dir));
      return 0;
    }
    c.validate();
    if (*mesh) return cmd_mesh(c);
    if (*offline) return cmd_offline(c);
    if (*fine) return cmd_solve_fine(c);
    if (*coarse) return cmd_solve_coarse(c);
    if (*sweep) return cmd_sweep(c);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
