#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "biotms/coarse_solver.hpp"
#include "biotms/metrics.hpp"

namespace biotms {

/// Flat experiment description. Every field has a CLI flag and a config key
/// of the same name (see README).
struct ExperimentConfig {
  int fine_n = 60;
  int coarse_n = 5;
  int case_id = 1;
  std::string geometry;  // raster path; empty -> generated inclusions/strips
  std::uint64_t geometry_seed = 7;

  Scheme scheme = Scheme::Coupled;
  double tau = 5.0;
  int steps = 20;
  int fs_iterations = 0;
  double p_bottom = 0.0;
  double p_top = 1.0;
  double p_initial = 0.0;

  std::vector<int> noff_p = {2, 4, 8, 12, 16};
  std::vector<int> noff_u = {2, 4, 8, 12, 16};
  std::string pairing = "triangular";  // triangular (p <= u) | product | diagonal
  SnapshotMode snapshots = SnapshotMode::HarmonicDelta;
  double snapshot_ratio = 0.36;
  std::vector<int> oversample = {0};
  std::uint64_t seed = 1;
  PouMode pou = PouMode::Multiscale;

  std::string output = "biotms_out";
  std::string cache_dir;  // empty -> <output>/cache
  bool vtk = false;
  int workers = 1;

  /// Throws InvalidInput listing every offending field.
  void validate() const;
  SchemeConfig scheme_config() const;
};

/// Everything derived from the config before any solve.
struct Problem {
  FineMesh mesh;
  CoarseGrid coarse;
  SubdomainGeometry geometry;
  MaterialField material;
  FineOperators ops;
  BoundaryConditions bc;
  Vector p_initial;
};

Problem make_problem(const ExperimentConfig& config);

Trajectory run_fine(const Problem& problem, const ExperimentConfig& config);

/// Offline settings for oversampling t, holding the largest requested N_off.
OfflineSettings offline_settings(const ExperimentConfig& config, int oversample);

/// Stable hash of every input the offline phase depends on.
std::string offline_cache_key(const Problem& problem, const OfflineSettings& settings);

/// Loads the archive for the key from cache_dir if present, else builds and stores it.
OfflineBasis cached_offline(const Problem& problem, const OfflineSettings& settings,
                            const std::string& cache_dir, bool* hit = nullptr);

struct CellSpec {
  int noff_p = 0;
  int noff_u = 0;
  int oversample = 0;
};

struct CellResult {
  CellSpec spec;
  int dim_p = 0;
  int dim_u = 0;
  std::string status = "ok";
  ErrorReport errors;
};

/// One coarse run against a precomputed fine reference.
CellResult run_cell(const Problem& problem, const OfflineBasis& basis, const Trajectory& reference,
                    const ExperimentConfig& config, const CellSpec& spec,
                    Trajectory* coarse_out = nullptr);

std::vector<CellSpec> sweep_cells(const ExperimentConfig& config);

struct SweepSummary {
  std::vector<CellResult> cells;
  std::vector<std::string> files;  // relative to output dir
};

/// Fine reference, offline bases (cached), all sweep cells, CSV tables and manifest.
SweepSummary run_sweep(const ExperimentConfig& config);

/// Rewrites the summary tables from <dir>/cells.csv; returns the table text.
std::string write_report(const std::string& dir);

// Output helpers shared with the CLI.
std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);
void write_series_csv(const std::string& path, const ErrorReport& errors);
void write_diagnostics_csv(const std::string& path, const Trajectory& trajectory);
void write_trajectory_vtk(const std::string& prefix, const Problem& problem, const Trajectory& trajectory);
void write_manifest(const std::string& dir, const std::vector<std::string>& files,
                    const ExperimentConfig& config);

}  // namespace biotms
