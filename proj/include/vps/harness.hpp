#pragma once

#include "vps/channel.hpp"
#include "vps/gc_vps.hpp"
#include "vps/metrics.hpp"
#include "vps/vps_lc_hpd.hpp"

#include <string>

namespace vps {

enum class Scheme {
  vps_hpd,
  vps_lc_hpd,
  gc_vps_hpd,
  gc_vps_lc_hpd,
  frozen_phase,
  fully_digital,
};

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

/// Full description of a Monte Carlo sweep; the experiment output is a
/// pure function of this struct (wall-clock columns aside).
struct ExperimentSpec {
  SystemConfig system;
  ChannelParams channel;
  std::vector<Scheme> schemes;
  std::vector<double> snr_grid_db;
  int trials = 200;
  SolverOptions solver;
  PowerModel power_model;
  std::uint64_t master_seed = 1;

  void validate() const;
};

struct ResultRow {
  std::string scheme;
  double snr_db = 0.0;
  int n_c = 0;
  int q = 1;
  int trials = 0;
  double se_mean = 0.0;
  double se_std = 0.0;
  double ee_mean = 0.0;
  double wall_s = 0.0;       // total design time for the scheme
  double residual_mean = 0.0;
  int failures = 0;
};

enum class OutputFormat { csv, json_lines };

/// Fixed-phase approximation of the FPS comparison scheme: P_t frozen at
/// the grid 2*pi*(l-1)/n_ps, alternating only the semi-unitary and
/// switch/scale stages.
HybridPrecoder frozen_phase_baseline(const MatC& f_opt, const SystemConfig& cfg,
                                     const SolverOptions& opts, Rng& rng,
                                     std::vector<double>* trace = nullptr);

/// Runs every (scheme, trial) with matched per-trial channel seeds, then
/// evaluates SE/EE on the SNR grid. Solver errors abort the trial and are
/// tallied per row.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec,
                                      int threads = 1);

/// CSV or JSON-lines emission, rows sorted by (scheme, snr_db), floats at
/// 6 significant digits.
void emit_results(const std::vector<ResultRow>& rows, const std::string& path,
                  OutputFormat format);

struct PowerReportRow {
  std::string architecture;
  HardwareCounts counts;
  double ps_power = 0.0;
  double sw_power = 0.0;
  double total = 0.0;
};

/// Both-ends phase-shifter/switch counts and power for the
/// fully-connected, FPS/VPS, and group-connected (q = 2, 4) rows.
std::vector<PowerReportRow> power_report(const SystemConfig& cfg,
                                         const PowerModel& pm);

/// Reads an ExperimentSpec from a JSON file; unknown keys are rejected.
ExperimentSpec load_spec(const std::string& path);

/// Writes a matrix as `name rows cols` followed by one row per line of
/// full-precision real/imaginary pairs.
void dump_matrix(std::ostream& os, const std::string& name, const MatC& m);

}  // namespace vps
