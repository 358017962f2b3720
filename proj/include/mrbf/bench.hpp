#pragma once

// Batch experiments: a JSON config names a problem, a geometry with a list
// of node counts and a list of schemes; every (count, scheme) pair is a cell.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrbf/geometry.hpp"
#include "mrbf/problems.hpp"
#include "mrbf/solvers.hpp"

namespace mrbf {

struct NodeCount {
  int boundary = 0;
  int interior = 0;
};

struct GeometrySpec {
  /// square_cutout, cube_two_ball_cavity, circle, sphere or interval.
  std::string kind = "square_cutout";
  std::vector<NodeCount> counts;
  SquareCutout square;
  CubeTwoBallCavity cube;
  double radius = 1.0;  // circle, sphere, interval half length
  /// Interior nodes are moved by up to jitter * (mean spacing) in each
  /// coordinate, drawn from the per-cell generator. 0 keeps the grid.
  double jitter = 0.0;
};

struct SchemeSpec {
  /// BKM, BPM, Kansa, MKM, LSRCM, or "interpolation" (MQ interpolation of
  /// the exact solution at all nodes, a reference for convergence studies).
  std::string name;
  double shape = 1.0;  // MQ c: DRM basis for BKM, trial basis for the others
  int order = 0;       // BKM kernel order
  int truncation = 4;  // BPM M
  LevelSolver level_solver = LevelSolver::TruncatedSvd;
  double rank_tolerance = 1e-10;
  bool exploit_structure = true;
  double oversampling = 2.0;  // LSRCM field nodes per source node
};

struct StudySpec {
  std::string name;
  std::string problem;  // named_problem tag
  ProblemParams params;
  GeometrySpec geometry;
  std::vector<SchemeSpec> schemes;
  int checkpoints = 364;
  double checkpoint_offset = 0.37;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  std::vector<StudySpec> studies;
  std::string csv_path;   // empty: not written
  std::string json_path;
  bool timing_in_csv = false;
  nlohmann::json source;  // echoed into the JSON report
};

/// Accepts either a single study at the top level or a "studies" array.
/// Every named problem is spot-checked (10 random points, residual < 1e-8)
/// before anything is solved. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

struct ReportRow {
  std::string study;
  std::string problem;
  std::string scheme;
  int boundary = 0;
  int interior = 0;
  std::size_t unknowns = 0;
  double l2_error = 0.0;
  double condition = 0.0;
  double seconds = 0.0;
  bool ok = true;
  std::string failure;  // "<ErrorType>: message" when !ok
};

struct ConvergenceFit {
  double p = 0.0;         // slope of log(err) against log(M)
  double q = 0.0;         // coefficient of log(log M) when requested
  double residual = 0.0;  // RMS of the log-space fit residual
  std::size_t points = 0;
};

struct FitRow {
  std::string study;
  std::string scheme;
  ConvergenceFit fit;
};

struct ExperimentReport {
  std::string name;
  std::vector<ReportRow> rows;
  std::vector<FitRow> fits;  // filled by add_convergence_fits
  nlohmann::json config;

  bool all_ok() const;
};

/// Runs every cell, `jobs` at a time. Rows come back in config order and do
/// not depend on `jobs`. A failing cell becomes a tagged row; the rest run.
ExperimentReport run_experiment(const ExperimentConfig& config, int jobs = 1);

/// Least squares of log(err) = a + p log(M) [+ q log(log M)].
/// Throws FitError with fewer than 3 distinct M (4 with the extra term).
ConvergenceFit fit_convergence(const std::vector<double>& m, const std::vector<double>& err,
                               bool log_log_term = false);

/// One fit per (study, scheme) over its successful rows, M = boundary +
/// interior node count. Groups with too few rows are skipped.
void add_convergence_fits(ExperimentReport& report, bool log_log_term = false);

void write_csv(const ExperimentReport& report, std::ostream& os, bool timing = false);
nlohmann::json to_json(const ExperimentReport& report);
/// Writes the CSV/JSON outputs named in the config into `dir` (or their own
/// paths when `dir` is empty).
void write_outputs(const ExperimentReport& report, const ExperimentConfig& config, const std::string& dir = "");

std::unique_ptr<Region> make_region(const GeometrySpec& g);
NodeCloud make_cloud(const GeometrySpec& g, const NodeCount& count, std::uint64_t cell_seed = 0);

/// Seed for cell `index` of a run seeded with `seed`.
std::uint64_t cell_seed(std::uint64_t seed, std::size_t index);

}  // namespace mrbf
