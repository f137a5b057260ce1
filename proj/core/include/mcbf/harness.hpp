// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo sweeps over (scenario, Q, M, K) grids: channel generation, the
// relaxation bound, the selected solvers, ratio statistics and CSV output.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcbf/channel.hpp"

namespace mcbf {

enum class Method { Sdr, Sca, OneGroup, Equipartition };

std::string_view to_string(Method m) noexcept;
/// Accepts "sdr", "sca", "onegroup", "equipartition".
Method parse_method(std::string_view token);

/// Config text: one `name = value` per line, `#` starts a comment, lists are
/// comma-separated. Keys:
///
///   Q, M, K          lists of positive integers (grid axes)
///   scenario         list of general | homogeneous
///   realizations     channel draws per cell
///   L                randomization trials for the sdr method
///   dfgp_iters       inner iteration budget of every sca solve
///   sca_max_outer    outer iteration budget of every sca solve
///   seed             master seed
///   methods          list of sdr | sca | onegroup | equipartition
///   qos_db, noise_variance, shadow_db   channel model
///   sdr_tol          relaxation residual tolerance
///   sdr_max_iter     relaxation iteration cap
///   traces           true | false, write per-iteration sca traces
struct ExperimentConfig {
  std::vector<std::size_t> Q{2};
  std::vector<std::size_t> M{8};
  std::vector<std::size_t> K{10};
  std::vector<Scenario> scenario{Scenario::Homogeneous};
  std::size_t realizations = 500;
  std::size_t L = 1000;
  int dfgp_iters = 400;
  int sca_max_outer = 200;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::Sdr};
  double qos_db = 3.0;
  double noise_variance = 1.0;
  double shadow_db = 0.5;
  double sdr_tol = 1e-7;
  int sdr_max_iter = 50000;
  bool traces = false;

  /// Throws InvalidInput on empty axes, zero sizes or duplicate methods.
  void validate() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Inverse of parse_config.
void write_config(std::ostream& out, const ExperimentConfig& cfg);

struct Cell {
  std::size_t index = 0;
  Scenario scenario = Scenario::General;
  std::size_t Q = 0, M = 0, K = 0;
};

/// Cartesian product, scenario outermost, then Q, M, and K innermost.
std::vector<Cell> grid(const ExperimentConfig& cfg);

struct IterPoint {
  double cost = 0.0;
  double min_margin = 0.0;
  double step_norm = 0.0;
};

struct MethodOutcome {
  Method method = Method::Sdr;
  double power = 0.0;
  double ratio = 0.0;  // power / v_SDR-LB
  int outer_iters = 0;    // sca only
  std::vector<IterPoint> trace;  // sca only, start point first
};

struct RealizationResult {
  std::size_t cell = 0;
  std::size_t realization = 0;
  std::uint64_t seed = 0;  // derive_seed(master, cell, realization)
  bool failed = false;
  std::string error;
  double sdr_lb = 0.0;
  int sdr_iterations = 0;
  std::vector<MethodOutcome> outcomes;  // config method order
};

struct RatioStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, N - 1 denominator
  double theta_bound = 0.0;
};

/// Throws InvalidInput for an empty list. A single value has std 0.
RatioStats aggregate(std::span<const double> ratios, double bound);

/// 10 log10(p); throws InvalidInput for p <= 0 or non-finite p.
double db_convert(double p_linear);

struct CellSummary {
  Cell cell;
  Method method = Method::Sdr;
  std::size_t successes = 0;
  double mean_power_db = 0.0;
  double mean_sdr_lb_db = 0.0;
  RatioStats stats;
  std::size_t failures = 0;
  std::size_t violations = 0;  // ratios above theta_bound
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<Cell> cells;
  std::vector<RealizationResult> realizations;  // cell-major, realization minor
  std::vector<CellSummary> summary;             // cell-major, config method order
};

/// Called after each finished realization with (done, total); may be invoked
/// from worker threads but never concurrently.
using ProgressFn = std::function<void(std::size_t, std::size_t)>;

/// Runs every (cell, realization) pair on `jobs` worker threads. Outputs do
/// not depend on `jobs`.
ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned jobs = 1,
                                const ProgressFn& progress = {});

/// Solves one realization: the channel draw, the relaxation bound and every
/// configured method. Solver failures are caught and flagged.
RealizationResult run_realization(const ExperimentConfig& cfg, const Cell& cell,
                                  std::size_t realization);

std::vector<CellSummary> summarize(const ExperimentConfig& cfg, const std::vector<Cell>& cells,
                                   const std::vector<RealizationResult>& realizations);

void write_summary_csv(std::ostream& out, const ExperimentResult& res);
void write_realizations_csv(std::ostream& out, const ExperimentResult& res);
void write_traces_csv(std::ostream& out, const ExperimentResult& res);

/// summary.csv, realizations.csv, config.txt and, with cfg.traces set,
/// traces.csv. Creates `dir` if needed.
void write_outputs(const std::filesystem::path& dir, const ExperimentResult& res);

}  // namespace mcbf
