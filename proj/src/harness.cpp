#include "vps/harness.hpp"

#include "vps/vps_hpd.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <thread>

namespace vps {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t master, int trial, std::uint64_t salt) {
  return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(trial) * 2 + salt));
}

}  // namespace

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::vps_hpd: return "vps_hpd";
    case Scheme::vps_lc_hpd: return "vps_lc_hpd";
    case Scheme::gc_vps_hpd: return "gc_vps_hpd";
    case Scheme::gc_vps_lc_hpd: return "gc_vps_lc_hpd";
    case Scheme::frozen_phase: return "frozen_phase";
    case Scheme::fully_digital: return "fully_digital";
  }
  throw std::logic_error("scheme_name: unreachable");
}

Scheme scheme_from_name(const std::string& name) {
  for (Scheme s : {Scheme::vps_hpd, Scheme::vps_lc_hpd, Scheme::gc_vps_hpd,
                   Scheme::gc_vps_lc_hpd, Scheme::frozen_phase,
                   Scheme::fully_digital})
    if (scheme_name(s) == name) return s;
  throw std::invalid_argument("unknown scheme: " + name);
}

void ExperimentSpec::validate() const {
  system.validate();
  channel.validate();
  solver.validate();
  power_model.validate();
  if (trials < 1) throw std::invalid_argument("ExperimentSpec: trials must be >= 1");
  if (snr_grid_db.empty())
    throw std::invalid_argument("ExperimentSpec: snr grid must be nonempty");
  if (schemes.empty())
    throw std::invalid_argument("ExperimentSpec: scheme list must be nonempty");
}

HybridPrecoder frozen_phase_baseline(const MatC& f_opt, const SystemConfig& cfg,
                                     const SolverOptions& opts, Rng& rng,
                                     std::vector<double>* trace) {
  LcOptions lc;
  lc.freeze_phases = true;
  lc.init_phase_offset = 0;  // the fixed grid 2*pi*(l-1)/n_ps
  return vps_lc_hpd(f_opt, cfg, opts, rng, trace, lc);
}

namespace {

struct TrialOutcome {
  bool ok = false;
  double design_seconds = 0.0;
  double resid = 0.0;
  std::vector<double> se;  // one per SNR point
};

// Effective precoder/combiner pair for one channel draw.
struct Design {
  MatC f_eff;
  MatC w_eff;
  double resid = 0.0;
};

SystemConfig combiner_config(const SystemConfig& cfg) {
  SystemConfig rx = cfg;
  std::swap(rx.n_tx, rx.n_rx);
  return rx;
}

Design design_trial(Scheme scheme, const SystemConfig& cfg,
                    const DigitalTarget& target, std::uint64_t solver_seed,
                    const SolverOptions& base_opts) {
  Design d;
  if (scheme == Scheme::fully_digital) {
    d.f_eff = target.f_opt;
    d.w_eff = target.w_opt;
    return d;
  }

  const SystemConfig rx_cfg = combiner_config(cfg);
  SolverOptions opts = base_opts;

  auto solve = [&](const MatC& goal, const SystemConfig& side_cfg,
                   std::uint64_t seed) {
    opts.rng_seed = seed;
    Rng rng(seed);
    switch (scheme) {
      case Scheme::vps_hpd:
        return vps_hpd(goal, side_cfg, opts, rng);
      case Scheme::vps_lc_hpd:
        return vps_lc_hpd(goal, side_cfg, opts, rng);
      case Scheme::frozen_phase:
        return frozen_phase_baseline(goal, side_cfg, opts, rng);
      case Scheme::gc_vps_hpd:
        return gc_vps(goal, side_cfg, BaseSolver::hpd, opts);
      case Scheme::gc_vps_lc_hpd:
        return gc_vps(goal, side_cfg, BaseSolver::lc_hpd, opts);
      default:
        throw std::logic_error("design_trial: unreachable");
    }
  };

  const HybridPrecoder tx = solve(target.f_opt, cfg, solver_seed);
  const HybridPrecoder rx = solve(target.w_opt, rx_cfg, splitmix64(solver_seed));
  d.f_eff = tx.effective();
  d.w_eff = rx.effective();
  d.resid = (target.f_opt - d.f_eff).squaredNorm();
  return d;
}

HardwareCounts tx_counts(Scheme scheme, const SystemConfig& cfg) {
  switch (scheme) {
    case Scheme::fully_digital:
      return {0, 0};
    case Scheme::gc_vps_hpd:
    case Scheme::gc_vps_lc_hpd:
      return hardware_counts(Architecture::gc_vps, cfg, 1);
    default:
      return hardware_counts(Architecture::fps_vps, cfg, 1);
  }
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, int threads) {
  spec.validate();
  const double noise_var = 1.0;  // SNR = P / sigma^2; sweeps vary P
  std::vector<double> p_tx(spec.snr_grid_db.size());
  for (std::size_t i = 0; i < p_tx.size(); ++i)
    p_tx[i] = noise_var * std::pow(10.0, spec.snr_grid_db[i] / 10.0);

  std::vector<ResultRow> rows;
  for (Scheme scheme : spec.schemes) {
    std::vector<TrialOutcome> outcomes(spec.trials);

    auto run_trial = [&](int t) {
      TrialOutcome& out = outcomes[t];
      try {
        Rng ch_rng(trial_seed(spec.master_seed, t, 0));
        const ChannelRealization ch =
            generate_channel(spec.system, spec.channel, ch_rng);
        const DigitalTarget target =
            optimal_precoder_combiner(ch.matrix, spec.system.n_streams);

        const auto t0 = std::chrono::steady_clock::now();
        const Design d = design_trial(scheme, spec.system, target,
                                      trial_seed(spec.master_seed, t, 1),
                                      spec.solver);
        out.design_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();

        out.se.resize(p_tx.size());
        for (std::size_t i = 0; i < p_tx.size(); ++i)
          out.se[i] =
              spectral_efficiency(ch.matrix, d.f_eff, d.w_eff, p_tx[i], noise_var);
        out.resid = d.resid;
        out.ok = true;
      } catch (const std::exception&) {
        out.ok = false;
      }
    };

    if (threads <= 1) {
      for (int t = 0; t < spec.trials; ++t) run_trial(t);
    } else {
      std::atomic<int> next{0};
      const int n_workers = std::min(threads, spec.trials);
      std::vector<std::thread> pool;
      pool.reserve(n_workers);
      for (int w = 0; w < n_workers; ++w)
        pool.emplace_back([&] {
          for (int t = next.fetch_add(1); t < spec.trials; t = next.fetch_add(1))
            run_trial(t);
        });
      for (auto& th : pool) th.join();
    }

    const bool is_gc =
        scheme == Scheme::gc_vps_hpd || scheme == Scheme::gc_vps_lc_hpd;
    double wall = 0.0;
    int failures = 0;
    for (const auto& o : outcomes) {
      wall += o.design_seconds;
      if (!o.ok) ++failures;
    }
    const int n_ok = spec.trials - failures;

    const HardwareCounts counts = tx_counts(scheme, spec.system);
    SystemConfig ee_cfg = spec.system;
    if (scheme == Scheme::fully_digital) ee_cfg.n_rf = ee_cfg.n_tx;

    for (std::size_t i = 0; i < p_tx.size(); ++i) {
      ResultRow row;
      row.scheme = scheme_name(scheme);
      row.snr_db = spec.snr_grid_db[i];
      row.n_c = spec.system.n_ps;
      row.q = is_gc ? spec.system.groups : 1;
      row.trials = spec.trials;
      row.wall_s = wall;
      row.failures = failures;
      if (n_ok > 0) {
        double se_sum = 0.0, resid_sum = 0.0, ee_sum = 0.0;
        for (const auto& o : outcomes)
          if (o.ok) {
            se_sum += o.se[i];
            resid_sum += o.resid;
            ee_sum += energy_efficiency(o.se[i], p_tx[i], ee_cfg, counts,
                                        spec.power_model);
          }
        row.se_mean = se_sum / n_ok;
        row.ee_mean = ee_sum / n_ok;
        row.residual_mean = resid_sum / n_ok;
        if (n_ok > 1) {
          double var = 0.0;
          for (const auto& o : outcomes)
            if (o.ok) var += (o.se[i] - row.se_mean) * (o.se[i] - row.se_mean);
          row.se_std = std::sqrt(var / (n_ok - 1));
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void emit_results(const std::vector<ResultRow>& rows, const std::string& path,
                  OutputFormat format) {
  std::vector<ResultRow> sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ResultRow& a, const ResultRow& b) {
                     return std::tie(a.scheme, a.snr_db) <
                            std::tie(b.scheme, b.snr_db);
                   });

  std::ofstream os(path);
  if (!os) throw std::runtime_error("emit_results: cannot open " + path);

  if (format == OutputFormat::csv) {
    os << "scheme,snr_db,n_c,q,trials,se_mean,se_std,ee_mean,wall_s,"
          "residual_mean,failures\n";
    for (const auto& r : sorted)
      os << r.scheme << ',' << fmt6(r.snr_db) << ',' << r.n_c << ',' << r.q
         << ',' << r.trials << ',' << fmt6(r.se_mean) << ',' << fmt6(r.se_std)
         << ',' << fmt6(r.ee_mean) << ',' << fmt6(r.wall_s) << ','
         << fmt6(r.residual_mean) << ',' << r.failures << '\n';
  } else {
    for (const auto& r : sorted) {
      json j{{"scheme", r.scheme},
             {"snr_db", r.snr_db},
             {"n_c", r.n_c},
             {"q", r.q},
             {"trials", r.trials},
             {"se_mean", r.se_mean},
             {"se_std", r.se_std},
             {"ee_mean", r.ee_mean},
             {"wall_s", r.wall_s},
             {"residual_mean", r.residual_mean},
             {"failures", r.failures}};
      os << j.dump() << '\n';
    }
  }
  if (!os) throw std::runtime_error("emit_results: write failed for " + path);
}

std::vector<PowerReportRow> power_report(const SystemConfig& cfg,
                                         const PowerModel& pm) {
  std::vector<PowerReportRow> rows;
  auto add = [&](const std::string& name, Architecture arch, int q) {
    SystemConfig c = cfg;
    c.groups = q;
    PowerReportRow row;
    row.architecture = name;
    row.counts = hardware_counts(arch, c, 2);
    row.ps_power = row.counts.n_ps * pm.p_phase_shifter;
    row.sw_power = row.counts.n_sw * pm.p_switch;
    row.total = row.ps_power + row.sw_power;
    rows.push_back(std::move(row));
  };
  add("fully_connected", Architecture::fully_connected, 1);
  add("fps_vps", Architecture::fps_vps, 1);
  for (int q : {2, 4})
    if (q <= cfg.n_rf && cfg.n_rf % q == 0 && cfg.n_tx % q == 0)
      add("gc_vps_q" + std::to_string(q), Architecture::gc_vps, q);
  return rows;
}

namespace {

void require_keys(const json& j, const char* where,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return key == k;
        }) == allowed.end())
      throw std::invalid_argument(std::string("config: unknown key '") + key +
                                  "' in " + where);
  }
}

}  // namespace

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_spec: cannot open " + path);
  json j = json::parse(is);

  require_keys(j, "top level",
               {"system", "channel", "schemes", "snr_grid_db", "trials",
                "solver", "power_model", "master_seed"});

  ExperimentSpec spec;
  if (j.contains("system")) {
    const auto& s = j["system"];
    require_keys(s, "system",
                 {"n_tx", "n_rx", "n_rf", "n_streams", "n_ps", "phase_bits",
                  "groups"});
    spec.system.n_tx = s.value("n_tx", spec.system.n_tx);
    spec.system.n_rx = s.value("n_rx", spec.system.n_rx);
    spec.system.n_rf = s.value("n_rf", spec.system.n_rf);
    spec.system.n_streams = s.value("n_streams", spec.system.n_streams);
    spec.system.n_ps = s.value("n_ps", spec.system.n_ps);
    spec.system.phase_bits = s.value("phase_bits", spec.system.phase_bits);
    spec.system.groups = s.value("groups", spec.system.groups);
  }
  if (j.contains("channel")) {
    const auto& c = j["channel"];
    require_keys(c, "channel", {"n_paths", "gain_variances"});
    spec.channel.n_paths = c.value("n_paths", spec.channel.n_paths);
    if (c.contains("gain_variances"))
      spec.channel.gain_variances = c["gain_variances"].get<std::vector<double>>();
  }
  if (j.contains("schemes")) {
    spec.schemes.clear();
    for (const auto& name : j["schemes"])
      spec.schemes.push_back(scheme_from_name(name.get<std::string>()));
  }
  if (j.contains("snr_grid_db"))
    spec.snr_grid_db = j["snr_grid_db"].get<std::vector<double>>();
  spec.trials = j.value("trials", spec.trials);
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    require_keys(s, "solver",
                 {"max_outer", "max_inner", "rel_tol", "quantize_each_inner"});
    spec.solver.max_outer = s.value("max_outer", spec.solver.max_outer);
    spec.solver.max_inner = s.value("max_inner", spec.solver.max_inner);
    spec.solver.rel_tol = s.value("rel_tol", spec.solver.rel_tol);
    spec.solver.quantize_each_inner =
        s.value("quantize_each_inner", spec.solver.quantize_each_inner);
  }
  if (j.contains("power_model")) {
    const auto& p = j["power_model"];
    require_keys(p, "power_model",
                 {"p_rf_chain", "p_amplifier", "p_phase_shifter", "p_switch",
                  "p_transmit"});
    spec.power_model.p_rf_chain = p.value("p_rf_chain", spec.power_model.p_rf_chain);
    spec.power_model.p_amplifier =
        p.value("p_amplifier", spec.power_model.p_amplifier);
    spec.power_model.p_phase_shifter =
        p.value("p_phase_shifter", spec.power_model.p_phase_shifter);
    spec.power_model.p_switch = p.value("p_switch", spec.power_model.p_switch);
    spec.power_model.p_transmit =
        p.value("p_transmit", spec.power_model.p_transmit);
  }
  spec.master_seed = j.value("master_seed", spec.master_seed);

  spec.validate();
  return spec;
}

void dump_matrix(std::ostream& os, const std::string& name, const MatC& m) {
  os << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  char buf[64];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g %.17g", m(r, c).real(),
                    m(r, c).imag());
      os << (c ? " " : "") << buf;
    }
    os << '\n';
  }
}

}  // namespace vps
