// slabdecay: dispersion | evolve | synthesize | verify | sweep
#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "slabdecay/acceptance.hpp"
#include "slabdecay/config.hpp"
#include "slabdecay/dispersion.hpp"
#include "slabdecay/errors.hpp"
#include "slabdecay/report.hpp"
#include "slabdecay/stokes1d.hpp"
#include "slabdecay/synthesis.hpp"

using namespace slabdecay;

namespace {

constexpr int kOk = 0, kAcceptanceFailure = 1, kUsage = 2;
constexpr double pi = std::numbers::pi;

std::string method_for(const RunConfig& cfg, double xi, double mu) {
  if (xi < cfg.tolerances.crossover) return "low_freq";
  return high_freq_precondition(xi, mu) ? "bracket" : "scan";
}

// Bracket check for high-frequency rows, kappa trend toward mu(0) l^3 / 3 for low ones.
ojson sweep_summary(const RunConfig& cfg, const std::vector<SweepRow>& rows) {
  const double lo = 1.0 / (4.0 * pi), hi = 1.0 + lo;
  ojson list = ojson::array();
  std::vector<std::pair<double, double>> low;  // (|xi|, |kappa - kappa0|)
  const double kappa0 =
      eval_symbol_radial(cfg.slab.symbol, 0.0) * std::pow(cfg.slab.ell, 3) / 3.0;
  int errors = 0;
  for (const auto& r : rows) {
    ojson row = {{"xi_mod", r.xi_mod}, {"mu", r.mu}, {"method", r.method}};
    if (!r.error.empty()) {
      row["error"] = r.error;
      ++errors;
    } else {
      row["root"] = to_json(r.result);
      if (r.method == "bracket") {
        const double k = r.result.rho.real() * r.xi_mod / r.mu;
        row["bracket_pass"] = k >= lo && k <= hi && r.result.det_residual <= 1e-8;
      }
      if (r.method == "low_freq") low.emplace_back(r.xi_mod, std::abs(r.result.kappa - kappa0));
    }
    list.push_back(row);
  }
  std::sort(low.begin(), low.end(), [](auto a, auto b) { return a.first > b.first; });
  bool trend = low.size() >= 2;
  for (std::size_t k = 1; k < low.size(); ++k) trend = trend && low[k].second < low[k - 1].second;
  ojson j;
  j["rows"] = list;
  j["errors"] = errors;
  j["low_freq_kappa_limit"] = kappa0;
  j["low_freq_trend_decreasing"] = low.size() >= 2 ? ojson(trend) : ojson(nullptr);
  return j;
}

int cmd_sweep_like(const RunConfig& cfg, const std::vector<double>& moduli, const std::string& stem) {
  const ojson conf = config_to_json(cfg);
  const auto rows = sweep_dispersion(cfg.slab, moduli, cfg.tolerances, cfg.jobs);
  write_output(cfg.output_dir, stem + ".csv", stamp_csv(conf, sweep_to_csv(rows)));
  const ojson summary = sweep_summary(cfg, rows);
  write_output(cfg.output_dir, stem + "_summary.json", stamp_json(conf, summary));
  std::cout << stem << ": " << rows.size() << " rows, " << summary["errors"].get<int>()
            << " with errors -> " << cfg.output_dir << "/" << stem << ".csv\n";
  return kOk;
}

int cmd_dispersion(const RunConfig& cfg) { return cmd_sweep_like(cfg, cfg.dispersion.moduli, "dispersion"); }

int cmd_sweep(const RunConfig& cfg) {
  std::vector<double> xs;
  const int n = cfg.sweep.count;
  for (int i = 0; i < n; ++i) {
    const double s = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    xs.push_back(cfg.sweep.xi_min * std::pow(cfg.sweep.xi_max / cfg.sweep.xi_min, s));
  }
  return cmd_sweep_like(cfg, xs, "sweep");
}

int cmd_evolve(const RunConfig& cfg) {
  const EvolveBlock& e = cfg.evolve;
  const double xi = e.xi_mod;
  const double mu = eval_symbol_radial(cfg.slab.symbol, xi);
  std::optional<DispersionResult> root;
  std::string root_error;
  if (xi > 0.0) {
    try {
      const std::string m = method_for(cfg, xi, mu);
      if (m == "low_freq") root = find_low_freq_root(xi, cfg.slab, cfg.tolerances);
      else if (m == "bracket") root = find_high_freq_root(xi, mu, cfg.slab.ell, cfg.tolerances);
      else root = find_scan_root(xi, mu, cfg.slab.ell, cfg.tolerances);
    } catch (const Error& err) {
      root_error = err.what();
    }
  }
  const double rho_est = xi == 0.0 ? pi * pi / (4.0 * cfg.slab.ell * cfg.slab.ell)
                                   : (root ? std::abs(root->rho) : mu / (4.0 * pi * xi));
  const double dt = e.dt > 0.0 ? e.dt : 0.05 / std::max(rho_est, 1.0);
  const Grid1D grid(e.grid, cfg.slab.ell);
  ModeState init = ModeState::surface(grid, xi == 0.0 ? 0.0 : e.h0);
  for (int j = 0; j <= grid.n_cells; ++j) {
    init.w[j] += e.w_amplitude * std::sin(0.5 * pi * grid.node(j) / cfg.slab.ell);
  }
  EvolveOptions eo;
  eo.startup_half_steps = e.startup_half_steps;
  eo.c_beta = e.c_beta;
  EvolveResult run = evolve(cfg.slab, xi, init, e.T, dt, eo);

  ojson conf = config_to_json(cfg);
  ojson summary;
  summary["dt"] = dt;
  summary["steps"] = run.steps;
  summary["n_cells"] = grid.n_cells;
  summary["mu"] = mu;
  summary["max_divergence_residual"] = run.max_divergence_residual;
  summary["projected"] = run.projected;
  const double t1 = e.fit_t1 > 0.0 ? e.fit_t1 : e.T;
  try {
    const RateFit fit = fit_decay_rate(run.energy, e.fit_t0, t1);
    summary["fit"] = to_json(fit);
    if (root) {
      const double two_rho = 2.0 * root->rho.real();
      summary["dispersion_check"] = {{"two_re_rho", two_rho}, {"rel_error", std::abs(fit.rate / two_rho - 1.0)}};
    }
  } catch (const Error& err) {
    summary["fit"] = {{"error", err.what()}};
  }
  if (root) summary["dispersion_root"] = to_json(*root);
  if (!root_error.empty()) summary["dispersion_root"] = {{"error", root_error}};
  summary["theoretical_envelope"] = theoretical_envelope(cfg.slab, xi);
  summary["final_state"] = ojson::parse(state_to_json(run.final_state, cfg.slab.ell, xi, mu));
  write_output(cfg.output_dir, "evolve.csv", stamp_csv(conf, evolve_to_csv(run)));
  write_output(cfg.output_dir, "evolve_summary.json", stamp_json(conf, summary));
  std::cout << "evolve: " << run.steps << " steps, E(T)/E(0) = "
            << (run.energy.values.front() > 0.0 ? run.energy.values.back() / run.energy.values.front() : 0.0)
            << ", fit " << summary["fit"].dump() << "\n";
  return kOk;
}

int cmd_synthesize(const RunConfig& cfg) {
  const SynthesisBlock& b = cfg.synthesis;
  SynthesisOptions o = b.options;
  o.jobs = cfg.jobs;
  o.dispersion = cfg.tolerances;
  const SynthesisResult r = b.domain == "torus" ? synthesize_torus(cfg.slab, b.data, b.lattice_radius, o)
                                                : synthesize_plane(cfg.slab, b.data, o);
  ojson conf = config_to_json(cfg);
  ojson report = to_json(r);
  const double t1 = std::min(b.fit.t1, o.T);
  try {
    report["requested_fit"] = to_json(fit_decay_law(r.curve, law_from_string(b.fit.law), b.fit.alpha, b.fit.t0, t1));
  } catch (const Error& err) {
    report["requested_fit"] = {{"error", err.what()}};
  }
  try {
    report["stretched_free_fit"] = to_json(fit_stretched_free(r.curve, b.fit.t0, t1));
  } catch (const Error& err) {
    report["stretched_free_fit"] = {{"error", err.what()}};
  }
  write_output(cfg.output_dir, "synthesis_curve.csv", stamp_csv(conf, synthesis_to_csv(r)));
  write_output(cfg.output_dir, "synthesis_modes.csv", stamp_csv(conf, modes_to_csv(r)));
  write_output(cfg.output_dir, "synthesis_report.json", stamp_json(conf, report));
  std::cout << "synthesize: " << r.modes.size() << " moduli, fit " << report["requested_fit"].dump() << "\n";
  return kOk;
}

int cmd_verify(const RunConfig& cfg) {
  AcceptanceOptions opt;
  opt.flip_gamma43 = cfg.verify.flip_gamma43;
  opt.truncate_T = cfg.verify.truncate_T;
  opt.only = cfg.verify.only;
  opt.jobs = cfg.jobs;
  opt.seed = cfg.seed;
  const auto results = run_acceptance(opt, [](const CriterionResult& r) {
    std::cout << format_line(r) << std::endl;
  });
  const ojson j = acceptance_to_json(results);
  write_output(cfg.output_dir, "acceptance.json", stamp_json(config_to_json(cfg), j));
  const bool ok = j["all_passed"].get<bool>();
  std::cout << (ok ? "all criteria passed" : "acceptance FAILED") << "\n";
  return ok ? kOk : kAcceptanceFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decay rates of the linearized free-boundary Stokes slab"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for the randomized checks");
  std::string chosen;
  for (const char* name : {"dispersion", "evolve", "synthesize", "verify", "sweep"}) {
    app.add_subcommand(name)->fallthrough()->callback([&chosen, name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (jobs) cfg.jobs = *jobs;
    if (seed) cfg.seed = *seed;
  } catch (const Error& e) {
    std::cerr << "slabdecay: " << e.what() << "\n";
    return kUsage;
  }
  try {
    if (chosen == "dispersion") return cmd_dispersion(cfg);
    if (chosen == "sweep") return cmd_sweep(cfg);
    if (chosen == "evolve") return cmd_evolve(cfg);
    if (chosen == "synthesize") return cmd_synthesize(cfg);
    return cmd_verify(cfg);
  } catch (const Error& e) {
    std::cerr << "slabdecay: " << e.what() << "\n";
    const bool usage = e.kind() == ErrorKind::config || e.kind() == ErrorKind::parameter;
    return usage ? kUsage : kAcceptanceFailure;
  } catch (const std::exception& e) {
    std::cerr << "slabdecay: " << e.what() << "\n";
    return kAcceptanceFailure;
  }
}
