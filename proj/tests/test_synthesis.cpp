#include <doctest.h>

#include <cmath>
#include <functional>

#include "slabdecay/errors.hpp"
#include "slabdecay/synthesis.hpp"

using namespace slabdecay;

namespace {

EnergyCurve synthetic(const std::function<double(double)>& f, double t1, int n) {
  EnergyCurve c;
  c.times.push_back(0.0);
  c.values.push_back(f(0.0));
  for (int k = 0; k < n; ++k) {
    const double t = std::pow(t1, static_cast<double>(k) / (n - 1));  // 1 .. t1
    c.times.push_back(t);
    c.values.push_back(f(t));
  }
  return c;
}

SlabParams constant_symbol(int dim = 3) {
  SlabParams s;
  s.symbol.r = 0.0;
  s.dim = dim;
  return s;
}

SynthesisOptions quick(double T) {
  SynthesisOptions o;
  o.T = T;
  o.samples_per_decade = 10;
  o.grid = 64;
  return o;
}

}  // namespace

TEST_CASE("law fits recover synthetic curves") {
  const EnergyCurve st = synthetic([](double t) { return std::exp(-2.0 * std::sqrt(t)); }, 1e3, 60);
  const FitRecord f = fit_decay_law(st, Law::stretched_exp, 1.0, 1.0, 1e3);
  CHECK(f.exponent == doctest::Approx(0.5));
  CHECK(f.rate == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(f.quality == doctest::Approx(1.0).epsilon(1e-12));
  const FitRecord free = fit_stretched_free(st, 1.0, 1e3);
  CHECK(free.exponent == doctest::Approx(0.5).epsilon(1e-3));

  const EnergyCurve alg = synthetic([](double t) { return std::pow(1.0 + t, -3.0); }, 1e3, 60);
  const FitRecord a = fit_decay_law(alg, Law::auto_select, 1.0, 1.0, 1e3);
  CHECK(a.law == "algebraic");
  CHECK(a.exponent == doctest::Approx(3.0).epsilon(1e-9));

  const EnergyCurve ex = synthetic([](double t) { return 5.0 * std::exp(-0.7 * t); }, 50.0, 60);
  const FitRecord e = fit_decay_law(ex, Law::auto_select, 1.0, 1.0, 50.0);
  CHECK(e.law == "exponential");
  CHECK(e.rate == doctest::Approx(0.7).epsilon(1e-9));

  const EnergyCurve lc = synthetic([](double t) { return std::exp(-0.3 * t / std::log(t)); }, 1e3, 60);
  const FitRecord l = fit_decay_law(lc, Law::log_corrected_exp, 1.0, 10.0, 1e3);
  CHECK(l.rate == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("fit window needs ten samples") {
  const EnergyCurve c = synthetic([](double t) { return std::exp(-t); }, 10.0, 30);
  try {
    fit_decay_law(c, Law::exponential, 1.0, 2.0, 2.5);
    FAIL("expected a fit-domain error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::fit_domain);
  }
}

TEST_CASE("lattice shell counts match brute force") {
  for (int d : {1, 2, 3}) {
    const int R = 4;
    const auto counts = lattice_shell_counts(d, R);
    REQUIRE(counts.size() == static_cast<std::size_t>(R * R + 1));
    std::vector<long long> brute(R * R + 1, 0);
    for (int a = -R; a <= R; ++a)
      for (int b = (d > 1 ? -R : 0); b <= (d > 1 ? R : 0); ++b)
        for (int c = (d > 2 ? -R : 0); c <= (d > 2 ? R : 0); ++c) {
          const int q = a * a + b * b + c * c;
          if (q <= R * R) ++brute[q];
        }
    for (int q = 0; q <= R * R; ++q) CHECK(counts[q] == brute[q]);
  }
}

TEST_CASE("initial data families") {
  InitialDataSpec d;
  d.s = 2.0;
  d.epsilon = 0.5;
  // (1 + x^2)^{-(2s + N - 1 + eps)/4}, N = 3
  CHECK(initial_height(d, 2.0, 3) == doctest::Approx(std::pow(5.0, -6.5 / 4.0)));
  d.family = DataFamily::flat_spectrum;
  d.cutoff = 1.0;
  CHECK(initial_height(d, 0.5, 3) == 1.0);
  CHECK(initial_height(d, 1.5, 3) == 0.0);
}

TEST_CASE("grouping by modulus is exact") {
  const SlabParams s = constant_symbol(3);
  InitialDataSpec d;
  SynthesisOptions o = quick(5.0);
  const SynthesisResult grouped = synthesize_torus(s, d, 3, o);
  o.group_moduli = false;
  const SynthesisResult each = synthesize_torus(s, d, 3, o);
  REQUIRE(grouped.curve.values.size() == each.curve.values.size());
  for (std::size_t k = 0; k < each.curve.values.size(); ++k) {
    CHECK(grouped.curve.values[k] == doctest::Approx(each.curve.values[k]).epsilon(1e-10));
  }
  long long inside = 0;
  for (long long c : lattice_shell_counts(2, 3)) inside += c;
  CHECK(grouped.lattice_points == inside);
  CHECK(grouped.modes.size() < each.modes.size());
}

TEST_CASE("lattice radius beyond the data support changes nothing") {
  const SlabParams s = constant_symbol(2);
  InitialDataSpec d;
  d.family = DataFamily::flat_spectrum;
  d.cutoff = 1.0;
  const SynthesisOptions o = quick(5.0);
  const SynthesisResult r1 = synthesize_torus(s, d, 1, o);
  const SynthesisResult r2 = synthesize_torus(s, d, 2, o);
  REQUIRE(r1.curve.values.size() == r2.curve.values.size());
  for (std::size_t k = 0; k < r1.curve.values.size(); ++k) {
    CHECK(r1.curve.values[k] == doctest::Approx(r2.curve.values[k]).epsilon(1e-12));
  }
}

TEST_CASE("plane quadrature converges under refinement") {
  const SlabParams s = constant_symbol(2);
  InitialDataSpec d;
  d.family = DataFamily::flat_spectrum;
  d.cutoff = 1.0;
  SynthesisOptions o = quick(20.0);
  o.nodes_per_decade = 12;
  const SynthesisResult coarse = synthesize_plane(s, d, o);
  o.nodes_per_decade = 24;
  const SynthesisResult fine = synthesize_plane(s, d, o);
  REQUIRE(coarse.curve.values.size() == fine.curve.values.size());
  // xi ranges over [-1, 1] with mu/2 = 1
  CHECK(fine.curve.values.front() == doctest::Approx(2.0).epsilon(1e-2));
  for (std::size_t k = 0; k < fine.curve.values.size(); ++k) {
    CHECK(std::abs(coarse.curve.values[k] / fine.curve.values[k] - 1.0) < 1e-2);
  }
}

TEST_CASE("pde and dispersion engines agree on a single modulus") {
  const SlabParams s = constant_symbol(3);
  InitialDataSpec d;
  SynthesisOptions o = quick(40.0);
  o.grid = 192;
  const std::vector<double> times = sample_times(o);
  const ModeCurve pde = mode_energy(s, d, 3.0, times, o, 10.0);
  const ModeCurve disp = mode_energy(s, d, 3.0, times, o, 0.0);
  CHECK(pde.engine == Engine::pde);
  CHECK(disp.engine == Engine::dispersion);
  CHECK(pde.rate == doctest::Approx(disp.rate).epsilon(0.05));
  const std::size_t last = times.size() - 1;
  CHECK(pde.curve.values[last] == doctest::Approx(disp.curve.values[last]).epsilon(0.2));
}

TEST_CASE("envelope") {
  const SlabParams s = constant_symbol(3);
  CHECK(theoretical_envelope(s, 1.0) == doctest::Approx(0.25));
  CHECK(theoretical_envelope(s, 3.0) == doctest::Approx(18.0 / 64.0));
  CHECK(theoretical_envelope(s, 0.0) == 1.0);
}

TEST_CASE("curve csv") {
  const SynthesisResult r = synthesize_torus(constant_symbol(2), InitialDataSpec{}, 1, quick(2.0));
  const std::string csv = synthesis_to_csv(r);
  CHECK(csv.rfind("t,E\n", 0) == 0);
}
