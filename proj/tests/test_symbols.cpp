#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "slabdecay/errors.hpp"
#include "slabdecay/symbols.hpp"

using namespace slabdecay;

namespace {

Symbol make(Family f, double g, double sigma, double r, double alpha = 1.0) {
  Symbol s;
  s.family = f;
  s.g = g;
  s.sigma = sigma;
  s.r = r;
  s.alpha = alpha;
  return s;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::config;
}

}  // namespace

TEST_CASE("fractional symbol values") {
  // reference values from 40-digit arithmetic
  CHECK(eval_symbol_radial(make(Family::fractional, 1, 1, 0.5), 1.0) == doctest::Approx(7.2831853071795865).epsilon(1e-14));
  CHECK(eval_symbol_radial(make(Family::fractional, 1, 1, 0.25), 3.0) == doctest::Approx(5.341607527349606).epsilon(1e-14));
  CHECK(eval_symbol_radial(make(Family::fractional, 1, 1, 0.0), 5.0) == 2.0);
  CHECK(eval_symbol_radial(make(Family::fractional, 1, 1, 0.0), 0.0) == 2.0);
}

TEST_CASE("log corrected families and the stitch") {
  const Symbol lg = make(Family::log_corrected, 1, 1, 0);
  CHECK(eval_symbol_radial(lg, 10.0) == doctest::Approx(28.287527076836827).epsilon(1e-14));
  CHECK(eval_symbol_radial(lg, 2.0) == doctest::Approx(13.566370614359173).epsilon(1e-14));
  CHECK(eval_symbol_radial(make(Family::log_corrected, 2, 0.5, 0, 2.0), 10.0) ==
        doctest::Approx(7.9254112171279028).epsilon(1e-14));
  // continuous across |xi| = e
  const double e = lg.stitch_radius();
  CHECK(eval_symbol_radial(lg, e * (1 + 1e-12)) == doctest::Approx(eval_symbol_radial(lg, e)).epsilon(1e-9));

  const Symbol ll = make(Family::loglog_corrected, 1, 1, 0);
  CHECK(eval_symbol_radial(ll, 100.0) == doctest::Approx(412.42411809322603).epsilon(1e-14));
  const double ee = ll.stitch_radius();
  CHECK(ee == doctest::Approx(std::exp(std::exp(1.0))));
  CHECK(eval_symbol_radial(ll, ee * (1 + 1e-12)) == doctest::Approx(eval_symbol_radial(ll, ee)).epsilon(1e-9));
}

TEST_CASE("radial and vector tables") {
  Symbol t;
  t.family = Family::tabulated;
  t.table = {{{2.0}, 5.0}, {{0.0}, 1.0}, {{1.0}, 3.0}};
  CHECK(eval_symbol_radial(t, 0.5) == doctest::Approx(2.0));
  CHECK(eval_symbol_radial(t, 1.5) == doctest::Approx(4.0));
  CHECK(eval_symbol_radial(t, 2.0) == 5.0);
  CHECK(kind_of([&] { eval_symbol_radial(t, 2.5); }) == ErrorKind::interpolation_unavailable);

  Symbol v;
  v.family = Family::tabulated;
  v.table = {{{1.0, 0.0}, 7.0}, {{0.0, 1.0}, 9.0}};
  const std::array<double, 2> near_x{0.9, 0.2};
  CHECK(eval_symbol(v, near_x) == 7.0);
  CHECK(kind_of([&] { eval_symbol_radial(v, 1.0); }) == ErrorKind::interpolation_unavailable);
}

TEST_CASE("table csv loading") {
  const auto path = std::filesystem::temp_directory_path() / "slabdecay_table_test.csv";
  {
    std::ofstream out(path);
    out << "# radial table\nxi,mu\n0,1\n1,3\n";
  }
  Symbol t;
  t.family = Family::tabulated;
  t.table = load_table_csv(path.string());
  REQUIRE(t.table.size() == 2);
  CHECK(eval_symbol_radial(t, 0.25) == doctest::Approx(1.5));
  std::filesystem::remove(path);
}

TEST_CASE("parameter checks") {
  CHECK(kind_of([] { check_symbol(make(Family::fractional, 0, 1, 0)); }) == ErrorKind::parameter);
  CHECK(kind_of([] { check_symbol(make(Family::fractional, 1, 1, 1.5)); }) == ErrorKind::parameter);
  CHECK(kind_of([] { eval_symbol_radial(make(Family::fractional, 1, 1, 0), -1.0); }) == ErrorKind::parameter);
  CHECK(family_from_string(to_string(Family::loglog_corrected)) == Family::loglog_corrected);
}

TEST_CASE("symbol class validation") {
  Symbol steep = make(Family::fractional, 1, 1, 1.0);
  steep.theta = 0.5;
  const ValidationReport bad = validate_symbol(steep, 100.0, 200);
  CHECK_FALSE(bad.passed());
  CHECK(bad.upper_violations > 0);
  CHECK(bad.lower_violations == 0);
  REQUIRE_FALSE(bad.first_violations.empty());
  CHECK_FALSE(bad.first_violations.front().lower);

  Symbol mild = make(Family::fractional, 1, 0.1, 1.0);
  mild.theta = 0.5;
  CHECK(validate_symbol(mild, 100.0, 200).passed());

  Symbol weak = make(Family::fractional, 0.2, 0.0, 0.0);
  weak.theta = 0.5;
  const ValidationReport low = validate_symbol(weak, 10.0, 50);
  CHECK(low.lower_violations == low.evaluated);
}

TEST_CASE("built-in families satisfy the class bounds with theta = min(g, sigma, 1) / 2") {
  for (const Symbol& base : {make(Family::fractional, 1, 1, 0.0), make(Family::fractional, 2, 0.5, 0.5),
                             make(Family::log_corrected, 1, 1, 0), make(Family::loglog_corrected, 1, 1, 0)}) {
    Symbol s = base;
    s.theta = std::min({s.g, s.sigma, 1.0}) / 2.0;
    const ValidationReport rep = validate_symbol(s, 1e4, 400);
    CHECK(rep.passed());
    CHECK(rep.unavailable == 0);
  }
}
