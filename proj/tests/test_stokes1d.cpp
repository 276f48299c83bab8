#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "slabdecay/dispersion.hpp"
#include "slabdecay/stokes1d.hpp"

using namespace slabdecay;

namespace {

constexpr double pi = std::numbers::pi;

SlabParams constant_symbol() {
  SlabParams s;
  s.symbol.r = 0.0;
  return s;
}

}  // namespace

TEST_CASE("zero mode decays like the first heat eigenfunction") {
  const SlabParams s = constant_symbol();
  const Grid1D grid(64, 1.0);
  ModeState init = ModeState::zero(grid);
  for (int j = 0; j <= grid.n_cells; ++j) init.w[j] = std::sin(0.5 * pi * grid.node(j));
  const EvolveResult run = evolve(s, 0.0, init, 5.0, 0.02);
  const RateFit fit = fit_decay_rate(run.energy, 1.0, 5.0);
  CHECK(fit.rate == doctest::Approx(pi * pi / 2.0).epsilon(0.01));
  CHECK(fit.quality > 0.999);
}

TEST_CASE("transverse component rate") {
  const double xi = 1.0;
  const Grid1D grid(128, 1.0);
  std::vector<cplx> w0(grid.n_cells + 1);
  for (int j = 0; j <= grid.n_cells; ++j) w0[j] = std::sin(0.5 * pi * grid.node(j));
  const EnergyCurve e = evolve_transverse(1.0, xi, w0, 0.3, 5e-4);
  const RateFit fit = fit_decay_rate(e, 0.05, 0.3);
  CHECK(fit.rate == doctest::Approx(2.0 * (4.0 * pi * pi * xi * xi + pi * pi / 4.0)).epsilon(0.01));
}

TEST_CASE("energy is nonincreasing and matches the dispersion rate") {
  const SlabParams s = constant_symbol();
  const double xi = 3.0, mu = 2.0;
  const DispersionResult root = find_high_freq_root(xi, mu, s.ell);
  const double dt = 0.05 / std::max(std::abs(root.rho), 1.0);
  const EvolveResult run = evolve(s, xi, ModeState::surface(Grid1D(128, s.ell)), 30.0, dt);
  const auto& e = run.energy.values;
  double worst = 0.0;
  for (std::size_t k = 1; k < e.size(); ++k) worst = std::max(worst, (e[k] - e[k - 1]) / e.front());
  CHECK(worst <= 1e-13);
  const RateFit fit = fit_decay_rate(run.energy, 5.0, 30.0);
  CHECK(fit.rate == doctest::Approx(2.0 * root.rho.real()).epsilon(0.05));
  CHECK(run.max_divergence_residual < 1e-8);
}

TEST_CASE("projection removes the divergence") {
  const Grid1D grid(64, 1.0);
  ModeState s = ModeState::zero(grid);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  for (int j = 1; j <= grid.n_cells; ++j) {
    s.w[j] = {n01(rng), n01(rng)};
    s.v[j] = {n01(rng), n01(rng)};
  }
  double change = 0.0;
  const ModeState p = project_divergence_free(s, 1.0, 2.0, &change);
  CHECK(change > 0.0);
  CHECK(divergence_residual(p, 1.0, 2.0) < 1e-10);
  const ModeState q = project_divergence_free(p, 1.0, 2.0, &change);
  CHECK(change < 1e-10);
  CHECK(std::abs(q.w[5] - p.w[5]) < 1e-10);
}

TEST_CASE("inequality suite") {
  const InequalityReport rep = discrete_inequality_suite(Grid1D(128, 1.0), 2.0, 200, 11);
  CHECK(rep.trials == 200);
  CHECK(rep.trace_violations == 0);
  CHECK(rep.trace_worst_ratio <= 1.0);
  // phi = y: (1+l) ||phi||_H^2 / ((1+|xi|) phi(l)^2) with ||phi||_H^2 = 1 + 4 pi^2 |xi|^2 / 3
  const double expected = 2.0 * (1.0 + 4.0 * pi * pi * 4.0 / 3.0) / 3.0;
  CHECK(rep.linear_trace_factor == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("state and trajectory output") {
  const SlabParams s = constant_symbol();
  const EvolveResult run = evolve(s, 1.0, ModeState::surface(Grid1D(32, 1.0)), 0.5, 0.05);
  const auto j = nlohmann::json::parse(state_to_json(run.final_state, 1.0, 1.0, 2.0));
  CHECK(j.contains("h"));
  const std::string csv = evolve_to_csv(run);
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == run.energy.times.size() + 1);
  CHECK(energy_xi(ModeState::surface(Grid1D(32, 1.0)), 1.0, 2.0) == doctest::Approx(1.0));
}
