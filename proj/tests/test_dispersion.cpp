#include <doctest.h>

#include <cmath>

#include "slabdecay/dispersion.hpp"
#include "slabdecay/errors.hpp"

using namespace slabdecay;

namespace {

SlabParams slab_with(double g, double sigma, double r) {
  SlabParams s;
  s.symbol.g = g;
  s.symbol.sigma = sigma;
  s.symbol.r = r;
  return s;
}

}  // namespace

TEST_CASE("determinant against an 80-digit permutation expansion") {
  // mu = 2, |xi| = 4, l = 1; column-scaled determinant
  CHECK(det_dispersion(0.1, 4.0, 2.0, 1.0).real() == doctest::Approx(9.4804665973474984e-9).epsilon(1e-8));
  CHECK(det_dispersion(0.3, 4.0, 2.0, 1.0).real() == doctest::Approx(3.6869071679591344e-7).epsilon(1e-8));
  CHECK(det_dispersion(1.0, 4.0, 2.0, 1.0).real() == doctest::Approx(1.5108512588792127e-5).epsilon(1e-8));
  // mu = 3, |xi| = 1/2, l = 2
  CHECK(det_dispersion(0.05, 0.5, 3.0, 2.0).real() == doctest::Approx(-5.7532328715303377e-6).epsilon(1e-8));
}

TEST_CASE("unscaled determinant carries the column factors") {
  const DispersionMatrix m = build_matrix(0.3, 4.0, 2.0, 1.0);
  double prod = 1.0;
  for (double s : m.scaling) prod *= s;
  CHECK(det_unscaled(0.3, 4.0, 2.0, 1.0).real() * prod ==
        doctest::Approx(det_dispersion(0.3, 4.0, 2.0, 1.0).real()).epsilon(1e-9));
}

TEST_CASE("high-frequency root for constant symbol") {
  // kappa from an 80-digit root of the same determinant, r = 0, g = sigma = 1
  const double mu = 2.0;
  const DispersionResult r = find_high_freq_root(8.0, mu, 1.0);
  CHECK(r.kappa.real() == doctest::Approx(0.0795779414914881).epsilon(1e-10));
  CHECK(r.rho.real() == doctest::Approx(0.0795779414914881 * mu / 8.0).epsilon(1e-10));
  REQUIRE(r.bracket.has_value());
  CHECK(r.rho.real() >= r.bracket->first);
  CHECK(r.rho.real() <= r.bracket->second);
  CHECK(r.det_residual < 1e-8);
  CHECK(r.null_residual < 1e-6);
}

TEST_CASE("low-frequency continuation tends to g l^3 / 3") {
  // sigma = 0 so mu = g = 1 at every frequency; 60-digit reference roots
  const SlabParams s = slab_with(1.0, 0.0, 0.5);
  CHECK(find_low_freq_root(0.1, s).kappa.real() == doctest::Approx(0.199459313).epsilon(1e-6));
  CHECK(find_low_freq_root(0.01, s).kappa.real() == doctest::Approx(0.33115362).epsilon(1e-6));
  CHECK(find_low_freq_root(0.001, s).kappa.real() == doctest::Approx(0.333311402).epsilon(1e-6));
}

TEST_CASE("large g pushes kappa above one") {
  // 60-digit reference root at |xi| = 0.01, mu = 4
  const DispersionResult r = find_low_freq_root(0.01, slab_with(4.0, 0.0, 0.0));
  CHECK(r.kappa.real() == doctest::Approx(1.32668768044).epsilon(1e-6));
  CHECK(std::abs(r.kappa.imag()) < 1e-12);
}

TEST_CASE("rho = 0 is a trivial zero") {
  for (double xi : {0.5, 8.0}) {
    const Mat4c m = build_matrix(0.0, xi, 2.0, 1.0).entries;
    double scale = 1.0;
    for (int c = 0; c < 4; ++c) scale *= m.col(c).norm();
    CHECK(std::abs(m.determinant()) / scale < 1e-12);
  }
}

TEST_CASE("mutation hook moves the root") {
  const DispersionResult base = find_high_freq_root(8.0, 2.0, 1.0);
  testing::set_flip_gamma43(true);
  double moved = 0.0;
  try {
    moved = find_high_freq_root(8.0, 2.0, 1.0).rho.real();
  } catch (const Error&) {
    moved = -1.0;
  }
  testing::set_flip_gamma43(false);
  CHECK_FALSE(testing::flip_gamma43());
  CHECK(std::abs(moved / base.rho.real() - 1.0) > 0.02);
}

TEST_CASE("reconstructed mode satisfies the boundary conditions") {
  const double mu = 2.0;
  const DispersionResult r = find_high_freq_root(8.0, mu, 1.0);
  const ModeProfile p = reconstruct_mode(r, 8.0, mu, 1.0, 256);
  CHECK(p.bulk_residual < 1e-6);
  for (double b : p.boundary_residual) CHECK(b < 1e-6);
}

TEST_CASE("sweep output") {
  const SlabParams s = slab_with(1.0, 1.0, 0.5);
  const auto rows = sweep_dispersion(s, {0.01, 1.0, 8.0});
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) CHECK(row.error.empty());
  CHECK(rows[0].method == "low_freq");
  const std::string csv = sweep_to_csv(rows);
  int lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 4);
  CHECK(high_freq_precondition(64.0, eval_symbol_radial(s.symbol, 64.0)));
}

TEST_CASE("swapping the a3 and a4 branches flips the determinant sign") {
  const DispersionMatrix m = build_matrix(0.3, 4.0, 2.0, 1.0);
  Mat4c swapped = m.entries;
  swapped.col(2).swap(swapped.col(3));
  double bound = 1.0;
  for (int c = 0; c < 4; ++c) bound *= m.entries.col(c).norm();
  CHECK(std::abs(swapped.determinant() + m.entries.determinant()) <= 1e-14 * bound);
  CHECK(std::abs(m.entries.determinant() - det_dispersion(0.3, 4.0, 2.0, 1.0)) <=
        1e-6 * std::abs(m.entries.determinant()));
}
