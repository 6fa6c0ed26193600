// Hybrid precoding design simulator: precoder design, Monte Carlo SNR
// sweeps, power reports and convergence traces for the phase-shifter +
// switch transceiver architectures.

#include "vps/harness.hpp"
#include "vps/vps_hpd.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

// exit categories: 2 config, 3 solver, 4 I/O
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

vps::ExperimentSpec load_or_exit(const std::string& path) {
  try {
    return vps::load_spec(path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    std::exit(kExitConfig);
  }
}

std::ofstream open_or_exit(const std::string& path) {
  std::ofstream os(path);
  if (!os) {
    std::cerr << "i/o error: cannot open " << path << '\n';
    std::exit(kExitIo);
  }
  return os;
}

struct DesignOutput {
  vps::HybridPrecoder precoder;
  std::vector<double> trace;
};

DesignOutput design_one(const vps::ExperimentSpec& spec, vps::Scheme scheme,
                        std::uint64_t seed) {
  vps::Rng ch_rng(seed);
  const auto ch = vps::generate_channel(spec.system, spec.channel, ch_rng);
  const auto target =
      vps::optimal_precoder_combiner(ch.matrix, spec.system.n_streams);

  vps::SolverOptions opts = spec.solver;
  opts.rng_seed = seed;
  vps::Rng rng(seed);
  DesignOutput out;
  switch (scheme) {
    case vps::Scheme::vps_hpd:
      out.precoder = vps::vps_hpd(target.f_opt, spec.system, opts, rng, &out.trace);
      break;
    case vps::Scheme::vps_lc_hpd:
      out.precoder =
          vps::vps_lc_hpd(target.f_opt, spec.system, opts, rng, &out.trace);
      break;
    case vps::Scheme::frozen_phase:
      out.precoder = vps::frozen_phase_baseline(target.f_opt, spec.system, opts,
                                                rng, &out.trace);
      break;
    case vps::Scheme::gc_vps_hpd:
      out.precoder =
          vps::gc_vps(target.f_opt, spec.system, vps::BaseSolver::hpd, opts);
      break;
    case vps::Scheme::gc_vps_lc_hpd:
      out.precoder =
          vps::gc_vps(target.f_opt, spec.system, vps::BaseSolver::lc_hpd, opts);
      break;
    default:
      std::cerr << "config error: scheme has no precoder to design\n";
      std::exit(kExitConfig);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid precoding design simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  std::string scheme_name = "vps_hpd";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;

  auto add_common = [&](CLI::App* cmd, bool with_scheme) {
    cmd->add_option("--config", config_path, "experiment config (JSON)")
        ->required();
    cmd->add_option("--out", out_path, "output file path");
    cmd->add_option("--seed", seed, "override the config master seed")
        ->each([&](const std::string&) { seed_given = true; });
    if (with_scheme)
      cmd->add_option("--scheme", scheme_name, "precoding scheme");
    return cmd;
  };

  auto* design = add_common(app.add_subcommand(
      "design", "design one precoder and dump its matrices"), true);
  auto* sweep = add_common(app.add_subcommand(
      "sweep", "Monte Carlo SNR sweep over the configured schemes"), false);
  sweep->add_option("--format", format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  sweep->add_option("--threads", threads, "trial worker count")
      ->check(CLI::PositiveNumber);
  auto* power = add_common(app.add_subcommand(
      "power", "phase-shifter/switch count and power report"), false);
  auto* conv = add_common(app.add_subcommand(
      "convergence", "per-iteration objective trace as CSV"), true);

  CLI11_PARSE(app, argc, argv);

  vps::ExperimentSpec spec = load_or_exit(config_path);
  if (seed_given) spec.master_seed = seed;

  try {
    if (design->parsed()) {
      const auto out =
          design_one(spec, vps::scheme_from_name(scheme_name), spec.master_seed);
      std::ofstream file;
      const bool to_file = !out_path.empty();
      if (to_file) file = open_or_exit(out_path);
      std::ostream& os = to_file ? file : std::cout;
      vps::dump_matrix(os, "S_t",
                       out.precoder.switches.entries.cast<vps::Cplx>());
      vps::dump_matrix(os, "P_t", out.precoder.phases.entries);
      vps::dump_matrix(os, "F_BB", out.precoder.digital);
      vps::dump_matrix(os, "F_RF", out.precoder.analog());
    } else if (sweep->parsed()) {
      const auto rows = vps::run_experiment(spec, threads);
      if (out_path.empty()) {
        std::cerr << "config error: sweep requires --out\n";
        return kExitConfig;
      }
      vps::emit_results(rows, out_path,
                        format == "csv" ? vps::OutputFormat::csv
                                        : vps::OutputFormat::json_lines);
    } else if (power->parsed()) {
      const auto rows = vps::power_report(spec.system, spec.power_model);
      std::ofstream file;
      const bool to_file = !out_path.empty();
      if (to_file) file = open_or_exit(out_path);
      std::ostream& os = to_file ? file : std::cout;
      os << "architecture,n_ps,ps_power_w,n_sw,sw_power_w,total_w\n";
      char buf[128];
      for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%ld,%.6g,%ld,%.6g,%.6g",
                      r.architecture.c_str(), r.counts.n_ps, r.ps_power,
                      r.counts.n_sw, r.sw_power, r.total);
        os << buf << '\n';
      }
    } else if (conv->parsed()) {
      const auto out =
          design_one(spec, vps::scheme_from_name(scheme_name), spec.master_seed);
      std::ofstream file;
      const bool to_file = !out_path.empty();
      if (to_file) file = open_or_exit(out_path);
      std::ostream& os = to_file ? file : std::cout;
      os << "iteration,objective\n";
      char buf[64];
      for (std::size_t i = 0; i < out.trace.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g", i + 1, out.trace[i]);
        os << buf << '\n';
      }
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
  return 0;
}
