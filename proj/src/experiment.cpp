#include "biotms/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/os.h>
#include "json.hpp"

#include "biotms/errors.hpp"
#include "biotms/parallel.hpp"
#include "biotms/vtk.hpp"

namespace fs = std::filesystem;

namespace biotms {

namespace {

constexpr int kCacheFormat = 1;

void check_list(std::vector<std::string>& problems, const char* name, const std::vector<int>& v,
                int lo) {
  if (v.empty()) problems.push_back(fmt::format("{}: list must not be empty", name));
  for (int x : v)
    if (x < lo) problems.push_back(fmt::format("{}: value {} must be >= {}", name, x, lo));
}

std::string hex(const unsigned char* d, unsigned n) {
  std::string s;
  s.reserve(2 * n);
  for (unsigned i = 0; i < n; ++i) s += fmt::format("{:02x}", d[i]);
  return s;
}

template <typename T>
void hash_bytes(std::string& acc, const std::vector<T>& v) {
  acc.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string num(double x) { return fmt::format("{:.6e}", x); }

}  // namespace

void ExperimentConfig::validate() const {
  std::vector<std::string> problems;
  if (fine_n < 1) problems.push_back("fine_n: must be >= 1");
  if (coarse_n < 1) problems.push_back("coarse_n: must be >= 1");
  if (fine_n >= 1 && coarse_n >= 1 && fine_n % coarse_n != 0)
    problems.push_back(fmt::format("coarse_n: {} does not divide fine_n {}", coarse_n, fine_n));
  if (case_id != 1 && case_id != 2) problems.push_back("case: must be 1 or 2");
  if (!geometry.empty() && !fs::exists(geometry))
    problems.push_back("geometry: file not found: " + geometry);
  if (!(tau > 0.0)) problems.push_back("tau: must be positive");
  if (steps < 1) problems.push_back("steps: must be >= 1");
  if (fs_iterations < 0) problems.push_back("fs_iterations: must be >= 0");
  check_list(problems, "noff_p", noff_p, 1);
  check_list(problems, "noff_u", noff_u, 1);
  check_list(problems, "oversample", oversample, 0);
  if (pairing != "triangular" && pairing != "product" && pairing != "diagonal")
    problems.push_back("pairing: expected triangular, product or diagonal");
  if (pairing == "diagonal" && noff_p != noff_u)
    problems.push_back("pairing: diagonal requires identical noff_p and noff_u lists");
  if (!(snapshot_ratio > 0.0 && snapshot_ratio <= 1.0))
    problems.push_back("snapshot_ratio: must lie in (0, 1]");
  if (output.empty()) problems.push_back("output: must not be empty");
  if (workers < 1) problems.push_back("workers: must be >= 1");
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw InvalidInput(msg);
  }
}

SchemeConfig ExperimentConfig::scheme_config() const {
  SchemeConfig s;
  s.scheme = scheme;
  s.tau = tau;
  s.steps = steps;
  s.fixed_stress_iterations = fs_iterations;
  return s;
}

Problem make_problem(const ExperimentConfig& config) {
  config.validate();
  Problem pb;
  pb.mesh = build_fine_mesh(config.fine_n);
  pb.coarse = build_coarse_grid(pb.mesh, config.coarse_n);
  if (config.geometry.empty()) {
    InclusionStripSpec spec;
    spec.seed = config.geometry_seed;
    pb.geometry = generate_inclusions_strips(spec);
  } else {
    pb.geometry = read_geometry(config.geometry);
  }
  pb.material = build_case(config.case_id, pb.mesh, pb.geometry);
  pb.ops = assemble_operators(pb.mesh, pb.material);
  pb.bc = layered_boundary_conditions(pb.mesh, config.p_bottom, config.p_top);
  pb.p_initial = Vector::Constant(pb.mesh.num_nodes(), config.p_initial);
  return pb;
}

Trajectory run_fine(const Problem& problem, const ExperimentConfig& config) {
  FineSolver solver(problem.ops, problem.bc, config.scheme_config());
  return solver.run(problem.p_initial);
}

OfflineSettings offline_settings(const ExperimentConfig& config, int oversample) {
  OfflineSettings s;
  s.n_off_p = *std::max_element(config.noff_p.begin(), config.noff_p.end());
  s.n_off_u = *std::max_element(config.noff_u.begin(), config.noff_u.end());
  s.snapshots = config.snapshots;
  s.snapshot_ratio = config.snapshot_ratio;
  s.oversample = oversample;
  s.seed = config.seed;
  s.pou = config.pou;
  s.workers = config.workers;
  return s;
}

std::string offline_cache_key(const Problem& problem, const OfflineSettings& s) {
  std::string acc = fmt::format("v{} n{} N{} p{} u{} snap{} ratio{:.17g} buf{} t{} seed{} pou{}|",
                                kCacheFormat, problem.mesh.n, problem.coarse.n, s.n_off_p, s.n_off_u,
                                to_string(s.snapshots), s.snapshot_ratio, s.snapshot_buffer,
                                s.oversample, s.seed, to_string(s.pou));
  const auto& m = problem.material;
  hash_bytes(acc, m.permeability);
  hash_bytes(acc, m.biot_modulus);
  hash_bytes(acc, m.mu);
  hash_bytes(acc, m.lambda);
  acc += fmt::format("{:.17g} {:.17g}", m.viscosity, m.alpha);
  return sha256_hex(acc);
}

OfflineBasis cached_offline(const Problem& problem, const OfflineSettings& settings,
                            const std::string& cache_dir, bool* hit) {
  const fs::path path = fs::path(cache_dir) / ("offline-" + offline_cache_key(problem, settings) + ".bin");
  if (fs::exists(path)) {
    if (hit) *hit = true;
    OfflineBasis b = load_offline(path.string());
    b.settings.workers = settings.workers;
    return b;
  }
  if (hit) *hit = false;
  OfflineBasis b = build_offline(problem.mesh, problem.coarse, problem.material, settings);
  fs::create_directories(cache_dir);
  // write-then-rename so a concurrent reader never sees a partial archive
  const fs::path tmp = path.string() + ".tmp";
  save_offline(b, tmp.string());
  fs::rename(tmp, path);
  return b;
}

CellResult run_cell(const Problem& problem, const OfflineBasis& basis, const Trajectory& reference,
                    const ExperimentConfig& config, const CellSpec& spec, Trajectory* coarse_out) {
  CellResult cell;
  cell.spec = spec;
  try {
    auto rp = restriction(basis, FieldKind::Pressure, spec.noff_p, problem.bc.pressure);
    auto ru = restriction(basis, FieldKind::Displacement, spec.noff_u, problem.bc.displacement);
    cell.dim_p = rp.rows();
    cell.dim_u = ru.rows();
    const int nn = problem.mesh.num_nodes();
    Vector p_lift = dirichlet_lift(basis, problem.coarse, FieldKind::Pressure, problem.bc.pressure, nn);
    Vector u_lift =
        dirichlet_lift(basis, problem.coarse, FieldKind::Displacement, problem.bc.displacement, nn);
    CoarseSolver solver(project(problem.ops, std::move(rp), std::move(ru), std::move(p_lift),
                                std::move(u_lift), problem.bc, config.scheme_config()));
    Trajectory ms = solver.run(problem.p_initial);
    cell.errors = compare(problem.ops, reference, ms);
    if (coarse_out) *coarse_out = std::move(ms);
  } catch (const std::exception& e) {
    cell.status = std::string("failed: ") + e.what();
    std::replace(cell.status.begin(), cell.status.end(), ',', ';');
    std::replace(cell.status.begin(), cell.status.end(), '\n', ' ');
  }
  return cell;
}

std::vector<CellSpec> sweep_cells(const ExperimentConfig& config) {
  std::vector<CellSpec> cells;
  for (int t : config.oversample) {
    if (config.pairing == "diagonal") {
      for (std::size_t i = 0; i < config.noff_p.size(); ++i)
        cells.push_back({config.noff_p[i], config.noff_u[i], t});
      continue;
    }
    for (int nu : config.noff_u)
      for (int np : config.noff_p)
        if (config.pairing == "product" || np <= nu) cells.push_back({np, nu, t});
  }
  return cells;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  return hex(digest, len);
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

void write_series_csv(const std::string& path, const ErrorReport& errors) {
  auto out = fmt::output_file(path);
  out.print("time,p_l2,p_h1,u_l2,u_h1,p_l2_abs,p_h1_abs,u_l2_abs,u_h1_abs\n");
  for (const auto& s : errors.steps) {
    out.print("{},{},{},{},{},{},{},{},{}\n", num(s.time), num(s.pressure.rel_l2()),
              num(s.pressure.rel_h1()), num(s.displacement.rel_l2()), num(s.displacement.rel_h1()),
              num(s.pressure.l2), num(s.pressure.h1), num(s.displacement.l2), num(s.displacement.h1));
  }
}

void write_diagnostics_csv(const std::string& path, const Trajectory& trajectory) {
  auto out = fmt::output_file(path);
  out.print("time,p_min,p_max,u_max\n");
  for (const auto& s : trajectory.states) {
    double umax = 0.0;
    for (Eigen::Index i = 0; i + 1 < s.u.size(); i += 2)
      umax = std::max(umax, std::hypot(s.u[i], s.u[i + 1]));
    out.print("{},{},{},{}\n", num(s.time), num(s.p.minCoeff()), num(s.p.maxCoeff()), num(umax));
  }
}

void write_trajectory_vtk(const std::string& prefix, const Problem& problem,
                          const Trajectory& trajectory) {
  Vector labels(problem.mesh.num_cells());
  for (int c = 0; c < problem.mesh.num_cells(); ++c) labels[c] = problem.material.label[c];
  for (std::size_t n = 0; n < trajectory.states.size(); ++n) {
    VtkFields f;
    f.point_scalars.emplace_back("pressure", trajectory.states[n].p);
    f.point_vectors.emplace_back("displacement", trajectory.states[n].u);
    f.cell_scalars.emplace_back("subdomain", labels);
    write_vtk(fmt::format("{}_{:03d}.vtk", prefix, n), problem.mesh, f);
  }
}

void write_manifest(const std::string& dir, const std::vector<std::string>& files,
                    const ExperimentConfig& config) {
  nlohmann::ordered_json j;
  j["tool"] = "biotms";
  nlohmann::ordered_json c;
  c["fine_n"] = config.fine_n;
  c["coarse_n"] = config.coarse_n;
  c["case"] = config.case_id;
  c["geometry"] = config.geometry.empty() ? fmt::format("generated:seed={}", config.geometry_seed)
                                          : config.geometry;
  c["scheme"] = to_string(config.scheme);
  c["tau"] = config.tau;
  c["steps"] = config.steps;
  c["fs_iterations"] = config.fs_iterations;
  c["p_bottom"] = config.p_bottom;
  c["p_top"] = config.p_top;
  c["p_initial"] = config.p_initial;
  c["noff_p"] = config.noff_p;
  c["noff_u"] = config.noff_u;
  c["pairing"] = config.pairing;
  c["snapshots"] = to_string(config.snapshots);
  c["snapshot_ratio"] = config.snapshot_ratio;
  c["oversample"] = config.oversample;
  c["seed"] = config.seed;
  c["pou"] = to_string(config.pou);
  j["config"] = c;
  std::vector<std::string> sorted = files;
  std::sort(sorted.begin(), sorted.end());
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& f : sorted) {
    const auto p = fs::path(dir) / f;
    list.push_back({{"path", f}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p.string())}});
  }
  j["files"] = list;
  std::ofstream(fs::path(dir) / "manifest.json") << j.dump(2) << "\n";
}

namespace {

void write_cells_csv(const std::string& path, const std::vector<CellResult>& cells) {
  auto out = fmt::output_file(path);
  out.print("oversample,noff_u,noff_p,dim_p,dim_u,dim,status,p_l2,p_h1,u_l2,u_h1,"
            "p_l2_abs,p_h1_abs,u_l2_abs,u_h1_abs\n");
  for (const auto& c : cells) {
    out.print("{},{},{},{},{},{},{}", c.spec.oversample, c.spec.noff_u, c.spec.noff_p, c.dim_p,
              c.dim_u, c.dim_p + c.dim_u, c.status);
    if (c.errors.steps.empty()) {
      out.print(",,,,,,,,\n");
      continue;
    }
    const auto& f = c.errors.final();
    out.print(",{},{},{},{},{},{},{},{}\n", num(f.pressure.rel_l2()), num(f.pressure.rel_h1()),
              num(f.displacement.rel_l2()), num(f.displacement.rel_h1()), num(f.pressure.l2),
              num(f.pressure.h1), num(f.displacement.l2), num(f.displacement.h1));
  }
}

struct Row {
  std::map<std::string, std::string> v;
  const std::string& operator[](const std::string& k) const {
    auto it = v.find(k);
    if (it == v.end()) throw InvalidInput("cells.csv: missing column " + k);
    return it->second;
  }
};

std::vector<Row> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path);
  std::string line;
  std::vector<std::string> header;
  std::vector<Row> rows;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  if (std::getline(in, line)) header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split(line);
    Row r;
    for (std::size_t i = 0; i < header.size(); ++i) r.v[header[i]] = i < f.size() ? f[i] : "";
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string short_num(const std::string& s) {
  if (s.empty()) return "-";
  return fmt::format("{:.2g}", std::stod(s));
}

}  // namespace

std::string write_report(const std::string& dir) {
  const auto rows = read_csv((fs::path(dir) / "cells.csv").string());
  std::set<int> ts;
  for (const auto& r : rows) ts.insert(std::stoi(r["oversample"]));
  const bool diagonal = std::all_of(rows.begin(), rows.end(),
                                    [](const Row& r) { return r["noff_p"] == r["noff_u"]; });

  // Table 1-4 layout: N_off^p rows grouped by N_off^u; Table 5-6 layout when every
  // cell is diagonal and several oversampling levels are present.
  std::string text;
  auto csv = fmt::output_file((fs::path(dir) / "table.csv").string());
  if (diagonal && ts.size() > 1) {
    csv.print("oversample,noff,p_l2,p_h1,u_l2,u_h1\n");
    text += fmt::format("{:>10} {:>6} | {:>9} {:>9} | {:>9} {:>9}\n", "t", "N_off", "p L2", "p H1",
                        "u L2", "u H1");
    for (int t : ts) {
      for (const auto& r : rows) {
        if (std::stoi(r["oversample"]) != t) continue;
        csv.print("{},{},{},{},{},{}\n", t, r["noff_p"], r["p_l2"], r["p_h1"], r["u_l2"], r["u_h1"]);
        text += fmt::format("{:>10} {:>6} | {:>9} {:>9} | {:>9} {:>9}\n", t, r["noff_p"],
                            short_num(r["p_l2"]), short_num(r["p_h1"]), short_num(r["u_l2"]),
                            short_num(r["u_h1"]));
      }
    }
  } else {
    csv.print("oversample,noff_u,noff_p,dim,p_l2,p_h1,u_l2,u_h1,status\n");
    for (int t : ts) {
      if (ts.size() > 1) text += fmt::format("oversampling t = {}\n", t);
      text += fmt::format("{:>6} {:>6} | {:>9} {:>9} | {:>9} {:>9}\n", "N_off^p", "dim", "p L2",
                          "p H1", "u L2", "u H1");
      std::string group;
      for (const auto& r : rows) {
        if (std::stoi(r["oversample"]) != t) continue;
        if (r["noff_u"] != group) {
          group = r["noff_u"];
          text += fmt::format("-- N_off^u = {}\n", group);
        }
        csv.print("{},{},{},{},{},{},{},{},{}\n", t, r["noff_u"], r["noff_p"], r["dim"], r["p_l2"],
                  r["p_h1"], r["u_l2"], r["u_h1"], r["status"]);
        text += fmt::format("{:>7} {:>6} | {:>9} {:>9} | {:>9} {:>9}{}\n", r["noff_p"], r["dim"],
                            short_num(r["p_l2"]), short_num(r["p_h1"]), short_num(r["u_l2"]),
                            short_num(r["u_h1"]), r["status"] == "ok" ? "" : "  " + r["status"]);
      }
    }
  }
  csv.close();
  std::ofstream(fs::path(dir) / "table.txt") << text;
  return text;
}

SweepSummary run_sweep(const ExperimentConfig& config) {
  const Problem problem = make_problem(config);
  const fs::path out = config.output;
  fs::create_directories(out / "series");
  const std::string cache = config.cache_dir.empty() ? (out / "cache").string() : config.cache_dir;

  SweepSummary summary;
  const Trajectory reference = run_fine(problem, config);
  write_diagnostics_csv((out / "fine_diagnostics.csv").string(), reference);
  summary.files.push_back("fine_diagnostics.csv");
  if (config.vtk) {
    fs::create_directories(out / "vtk");
    write_trajectory_vtk((out / "vtk" / "fine").string(), problem, reference);
  }

  const auto specs = sweep_cells(config);
  summary.cells.resize(specs.size());
  std::set<int> ts(config.oversample.begin(), config.oversample.end());
  for (int t : ts) {
    const OfflineBasis basis = cached_offline(problem, offline_settings(config, t), cache);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < specs.size(); ++i)
      if (specs[i].oversample == t) idx.push_back(i);
    parallel_for(static_cast<int>(idx.size()), config.workers, [&](int k) {
      const std::size_t i = idx[k];
      Trajectory ms;
      summary.cells[i] = run_cell(problem, basis, reference, config, specs[i], config.vtk ? &ms : nullptr);
      if (config.vtk && summary.cells[i].status == "ok") {
        write_trajectory_vtk(
            (out / "vtk" / fmt::format("ms_t{}_u{}_p{}", t, specs[i].noff_u, specs[i].noff_p)).string(),
            problem, ms);
      }
    });
  }

  for (const auto& c : summary.cells) {
    if (c.errors.steps.empty()) continue;
    const std::string name = fmt::format("series/t{}_u{}_p{}.csv", c.spec.oversample,
                                         c.spec.noff_u, c.spec.noff_p);
    write_series_csv((out / name).string(), c.errors);
    summary.files.push_back(name);
  }
  write_cells_csv((out / "cells.csv").string(), summary.cells);
  summary.files.push_back("cells.csv");
  write_report(out.string());
  summary.files.push_back("table.csv");
  summary.files.push_back("table.txt");
  write_manifest(out.string(), summary.files, config);
  return summary;
}

}  // namespace biotms
