#include "slabdecay/dispersion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "slabdecay/errors.hpp"

namespace slabdecay {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * pi;

std::atomic<bool> g_flip_gamma43{false};

using mp_cplx = boost::multiprecision::cpp_complex_50;

template <class C>
C expm1_c(const C& z) {
  // exp(z) - 1 without cancellation for small |z|
  C half = z / 2;
  return C(2) * sinh(half) * exp(half);
}

inline cplx expm1_c(const cplx& z) {
  cplx half = z / 2.0;
  return 2.0 * std::sinh(half) * std::exp(half);
}

template <class C>
using Mat4 = std::array<std::array<C, 4>, 4>;

template <class C>
C det4(const Mat4<C>& m) {
  // Laplace expansion along the first two rows
  C det(0);
  static constexpr int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  for (int k = 0; k < 6; ++k) {
    int i = pairs[k][0], j = pairs[k][1];
    int c0 = -1, c1 = -1;
    for (int c = 0; c < 4; ++c) {
      if (c == i || c == j) continue;
      if (c0 < 0) c0 = c; else c1 = c;
    }
    C top = m[0][i] * m[1][j] - m[0][j] * m[1][i];
    C bot = m[2][c0] * m[3][c1] - m[2][c1] * m[3][c0];
    if ((i + j + 1) % 2 == 0) det += top * bot; else det -= top * bot;
  }
  return det;
}

template <class C, class R>
R hadamard(const Mat4<C>& m) {
  R prod(1);
  for (int c = 0; c < 4; ++c) {
    R s(0);
    for (int r = 0; r < 4; ++r) s += norm(m[r][c]);
    prod *= sqrt(s);
  }
  return prod;
}

inline double hadamard_d(const Mat4<cplx>& m) {
  double prod = 1.0;
  for (int c = 0; c < 4; ++c) {
    double s = 0.0;
    for (int r = 0; r < 4; ++r) s += std::norm(m[r][c]);
    prod *= std::sqrt(s);
  }
  return prod;
}

// Column-differenced matrix [s1 C1, s2 C2, e^{-a3 l}(C3 - C1), s4 (C4 - C2)].
template <class C>
struct Reduced {
  Mat4<C> m;
  C a1, a3, d, x, e1, t3;
};

template <class C>
Reduced<C> reduced_matrix(const C& rho, const C& a1, const C& a3, const C& mu, const C& ell,
                          bool flip) {
  Reduced<C> out;
  C one(1);
  C sum = a1 + a3;
  C d = rho / sum;  // a1 - a3
  C e1 = exp(-a1 * ell);
  C t3 = exp(-a3 * ell);
  C x = expm1_c(d * ell);
  C g23m = -rho / (a1 * sum);
  C g33m = -rho / (C(2) * a1 * a1);
  C g43m = rho * rho * rho / (mu * a1 * sum * sum);
  C g44m = -g43m;
  C k = rho / mu;
  C g41 = (rho / a1 - C(2) * a1) * k + one;
  C g42 = -(rho / a1 - C(2) * a1) * k + one;
  C g44 = C(2) * a3 * k + one;
  if (flip) g43m += C(4) * a3 * k;
  auto& m = out.m;
  m[0] = {e1, one, C(0), C(0)};
  m[1] = {e1, -one, g23m * t3, -g23m};
  m[2] = {one, e1, g33m - x, e1 * (g33m * (one + x) + x)};
  m[3] = {g41, g42 * e1, g43m - g41 * x, e1 * (g44m + g44 * x)};
  out.a1 = a1;
  out.a3 = a3;
  out.d = d;
  out.x = x;
  out.e1 = e1;
  out.t3 = t3;
  return out;
}

void check_args(cplx rho, double xi_mod, double mu, double ell) {
  if (!(xi_mod > 0.0)) throw Error(ErrorKind::parameter, "|xi| must be positive");
  if (!(mu > 0.0) || !(ell > 0.0)) throw Error(ErrorKind::parameter, "mu and ell must be positive");
  double a1sq = 4.0 * pi * pi * xi_mod * xi_mod;
  if (std::abs(rho - a1sq) <= 1e-14 * a1sq) {
    throw Error(ErrorKind::degenerate_exponent, "rho = 4 pi^2 |xi|^2 makes a3 = a4 = 0");
  }
}

Reduced<cplx> reduced_d(cplx rho, double xi_mod, double mu, double ell) {
  auto a = dispersion_exponents(rho, xi_mod);
  return reduced_matrix<cplx>(rho, a[0], a[2], cplx(mu), cplx(ell), g_flip_gamma43.load());
}

Mat4<cplx> to_array(const Mat4c& m) {
  Mat4<cplx> out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out[r][c] = m(r, c);
  return out;
}

Mat4c to_eigen(const Mat4<cplx>& m) {
  Mat4c out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out(r, c) = m[r][c];
  return out;
}

// Far from the slow regime the difference columns carry exp(Re(d) l); there the
// plain scaled matrix is already well separated.
bool use_reduced(const Reduced<cplx>& red, double ell) { return std::real(red.d) * ell <= 30.0; }

double real_det_for_sign(double rho, double xi_mod, double mu, double ell) {
  return std::real(det_dispersion(cplx(rho, 0.0), xi_mod, mu, ell));
}

cplx to_cplx(const mp_cplx& z) {
  return {z.real().convert_to<double>(), z.imag().convert_to<double>()};
}

// Null direction from the cofactors of a top-boundary row: the remaining three
// rows (both bottom conditions among them) are then satisfied to round-off.
Vec4c cofactor_null_vector(const Mat4c& m, double tol) {
  null_vector(m, tol);  // rank check only
  Eigen::Vector4d colnorm;
  Mat4c eq = m;
  for (int c = 0; c < 4; ++c) {
    colnorm(c) = m.col(c).norm();
    eq.col(c) /= colnorm(c);
  }
  Vec4c best = Vec4c::Zero();
  for (int drop : {2, 3}) {
    Vec4c z;
    for (int j = 0; j < 4; ++j) {
      Eigen::Matrix3cd minor;
      for (int r = 0, rr = 0; r < 4; ++r) {
        if (r == drop) continue;
        for (int c = 0, cc = 0; c < 4; ++c) {
          if (c == j) continue;
          minor(rr, cc++) = eq(r, c);
        }
        ++rr;
      }
      z(j) = ((drop + j) % 2 == 0 ? 1.0 : -1.0) * minor.determinant();
    }
    if (z.norm() > best.norm()) best = z;
  }
  Vec4c v;
  for (int c = 0; c < 4; ++c) v(c) = best(c) / colnorm(c);
  int imax = 0;
  for (int c = 1; c < 4; ++c)
    if (std::abs(v(c)) > std::abs(v(imax))) imax = c;
  v *= std::conj(v(imax)) / std::abs(v(imax));
  return v / v.norm();
}

void finish_root(DispersionResult& res, double xi_mod, double mu, double ell, double null_tol) {
  auto red = reduced_d(res.rho, xi_mod, mu, ell);
  double scale = hadamard_d(red.m);
  cplx det = det4(red.m);
  if (!std::isfinite(scale) || scale == 0.0) {
    throw Error(ErrorKind::not_a_root, "degenerate determinant scale");
  }
  if (res.det_residual == 0.0) res.det_residual = std::abs(det) / scale;
  DispersionMatrix mat = build_matrix(res.rho, xi_mod, mu, ell);
  Vec4c u = cofactor_null_vector(to_eigen(red.m), null_tol);
  res.reduced_vector = u;
  // back to scaled-column coordinates
  cplx t3_over_s1 = std::exp(red.d * ell);
  cplx t3_over_s3 = red.t3 / mat.scaling[2];
  Vec4c v;
  v(0) = u(0) - u(2) * t3_over_s1;
  v(1) = u(1) - u(3);
  v(2) = u(2) * t3_over_s3;
  v(3) = u(3);
  double nv = v.norm();
  if (std::isfinite(nv) && nv > 0.0) {
    v /= nv;
  }
  res.null_vector = v;
  Eigen::JacobiSVD<Mat4c> svd(mat.entries);
  double anorm = svd.singularValues()(0);
  res.null_residual = (mat.entries * v).norm() / anorm;
}

DispersionResult bisect(double lo, double hi, double flo, double xi_mod, double mu, double ell,
                        const DispersionOptions& opt) {
  DispersionResult res;
  int it = 0;
  double fmid = flo;
  while (it < opt.bisect_max_iter) {
    double mid = 0.5 * (lo + hi);
    ++it;
    fmid = real_det_for_sign(mid, xi_mod, mu, ell);
    if (fmid == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((fmid < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
    if (hi - lo <= opt.bisect_rel_tol * std::abs(hi)) break;
  }
  double root = 0.5 * (lo + hi);
  res.rho = cplx(root, 0.0);
  res.kappa = cplx(root * xi_mod / mu, 0.0);
  res.iterations = it;
  return res;
}

}  // namespace

namespace testing {
void set_flip_gamma43(bool on) { g_flip_gamma43.store(on); }
bool flip_gamma43() { return g_flip_gamma43.load(); }
}  // namespace testing

std::array<cplx, 4> dispersion_exponents(cplx rho, double xi_mod) {
  double a1 = two_pi * xi_mod;
  cplx a3 = std::sqrt(cplx(a1 * a1, 0.0) - rho);
  return {cplx(a1, 0.0), cplx(-a1, 0.0), a3, -a3};
}

DispersionMatrix build_matrix(cplx rho, double xi_mod, double mu, double ell) {
  check_args(rho, xi_mod, mu, ell);
  DispersionMatrix out;
  out.rho = rho;
  out.xi_mod = xi_mod;
  out.mu = mu;
  out.ell = ell;
  out.a = dispersion_exponents(rho, xi_mod);
  const cplx a1 = out.a[0], a3 = out.a[2];
  for (int j = 0; j < 4; ++j) out.scaling[j] = std::exp(-std::max(0.0, std::real(out.a[j])) * ell);
  const cplx g23 = a3 / a1;
  const cplx g33 = 1.0 - rho / (8.0 * pi * pi * xi_mod * xi_mod);
  const cplx k = rho / mu;
  const cplx g41 = (rho / a1 - 2.0 * a1) * k + 1.0;
  const cplx g42 = -(rho / a1 - 2.0 * a1) * k + 1.0;
  const cplx g43 = (g_flip_gamma43.load() ? 2.0 : -2.0) * a3 * k + 1.0;
  const cplx g44 = 2.0 * a3 * k + 1.0;
  // e^{a_j l} times the column scaling
  std::array<cplx, 4> top;
  for (int j = 0; j < 4; ++j) top[j] = std::exp(out.a[j] * ell) * out.scaling[j];
  Mat4c& m = out.entries;
  for (int j = 0; j < 4; ++j) m(0, j) = out.scaling[j];
  m(1, 0) = out.scaling[0];
  m(1, 1) = -out.scaling[1];
  m(1, 2) = g23 * out.scaling[2];
  m(1, 3) = -g23 * out.scaling[3];
  m(2, 0) = top[0];
  m(2, 1) = top[1];
  m(2, 2) = g33 * top[2];
  m(2, 3) = g33 * top[3];
  m(3, 0) = g41 * top[0];
  m(3, 1) = g42 * top[1];
  m(3, 2) = g43 * top[2];
  m(3, 3) = g44 * top[3];
  return out;
}

cplx det_reduced(cplx rho, double xi_mod, double mu, double ell, double* scale) {
  check_args(rho, xi_mod, mu, ell);
  auto red = reduced_d(rho, xi_mod, mu, ell);
  if (scale) *scale = hadamard_d(red.m);
  return det4(red.m);
}

cplx det_dispersion(cplx rho, double xi_mod, double mu, double ell) {
  check_args(rho, xi_mod, mu, ell);
  auto red = reduced_d(rho, xi_mod, mu, ell);
  if (!use_reduced(red, ell)) {
    return det4(to_array(build_matrix(rho, xi_mod, mu, ell).entries));
  }
  // s3 / e^{-a3 l}: a unit phase, exactly 1 for real rho below the degeneracy
  cplx phase = std::exp(cplx(0.0, std::imag(red.a3) * ell));
  return det4(red.m) * phase;
}

cplx det_unscaled(cplx rho, double xi_mod, double mu, double ell) {
  auto mat = build_matrix(rho, xi_mod, mu, ell);
  cplx det = det4(to_array(mat.entries));
  for (double s : mat.scaling) det /= s;
  return det;
}

bool high_freq_precondition(double xi_mod, double mu) {
  return (1.0 + 1.0 / (4.0 * pi)) * mu / (xi_mod * xi_mod * xi_mod) < 1.0;
}

std::pair<double, double> high_freq_bracket(double xi_mod, double mu) {
  return {mu / (4.0 * pi * xi_mod), (1.0 + 1.0 / (4.0 * pi)) * mu / xi_mod};
}

DispersionResult find_high_freq_root(double xi_mod, double mu, double ell,
                                     const DispersionOptions& opt) {
  if (!(xi_mod > 0.0)) throw Error(ErrorKind::parameter, "|xi| must be positive");
  if (!high_freq_precondition(xi_mod, mu)) {
    std::ostringstream msg;
    msg << "(1+1/(4pi)) mu/|xi|^3 = " << (1.0 + 1.0 / (4.0 * pi)) * mu / std::pow(xi_mod, 3)
        << " is not below 1";
    throw Error(ErrorKind::hypothesis_not_met, msg.str());
  }
  auto [lo, hi] = high_freq_bracket(xi_mod, mu);
  double flo = real_det_for_sign(lo, xi_mod, mu, ell);
  double fhi = real_det_for_sign(hi, xi_mod, mu, ell);
  if (flo == 0.0 || fhi == 0.0 || (flo < 0.0) == (fhi < 0.0)) {
    std::ostringstream msg;
    msg << "det has no sign change on [" << lo << ", " << hi << "] at |xi| = " << xi_mod;
    throw Error(ErrorKind::no_root_in_bracket, msg.str());
  }
  DispersionResult res = bisect(lo, hi, flo, xi_mod, mu, ell, opt);
  res.bracket = std::make_pair(lo, hi);
  res.method = "bracket";
  finish_root(res, xi_mod, mu, ell, opt.null_tol);
  return res;
}

DispersionResult find_scan_root(double xi_mod, double mu, double ell,
                                const DispersionOptions& opt) {
  if (!(xi_mod > 0.0)) throw Error(ErrorKind::parameter, "|xi| must be positive");
  const double a1sq = 4.0 * pi * pi * xi_mod * xi_mod;
  const int n = std::max(opt.scan_points, 4);
  // geometric grid from 1e-8 a1^2 up to just below the degeneracy
  const double lo = 1e-8 * a1sq;
  const double hi = (1.0 - 1e-9) * a1sq;
  double prev_rho = lo;
  double prev = real_det_for_sign(lo, xi_mod, mu, ell);
  for (int k = 1; k < n; ++k) {
    double rho = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
    double f = real_det_for_sign(rho, xi_mod, mu, ell);
    if (prev != 0.0 && f != 0.0 && (f < 0.0) != (prev < 0.0)) {
      DispersionResult res = bisect(prev_rho, rho, prev, xi_mod, mu, ell, opt);
      res.bracket = std::make_pair(prev_rho, rho);
      res.method = "scan";
      finish_root(res, xi_mod, mu, ell, opt.null_tol);
      return res;
    }
    prev = f;
    prev_rho = rho;
  }
  throw Error(ErrorKind::no_root_in_bracket, "no real sign change in (0, 4 pi^2 |xi|^2)");
}

DispersionResult find_low_freq_root(double xi_mod, const SlabParams& slab,
                                    const DispersionOptions& opt) {
  check_slab(slab);
  if (!(xi_mod > 0.0)) throw Error(ErrorKind::parameter, "|xi| must be positive");
  const double ell = slab.ell;
  double g0;
  try {
    g0 = eval_symbol_radial(slab.symbol, 0.0);
  } catch (const Error&) {
    g0 = slab.symbol.g;
  }
  if (!(g0 > 0.0)) throw Error(ErrorKind::degenerate_parameter, "mu(0) must be positive");
  if (std::abs(g0 * ell * ell * ell - 3.0) <= 1e-12 * 3.0) {
    throw Error(ErrorKind::degenerate_parameter, "g = 3/ell^3 makes the seed kappa = 1 (a3 = a4)");
  }
  if (xi_mod > opt.low_freq_max_xi) {
    throw Error(ErrorKind::hypothesis_not_met, "|xi| above the low-frequency continuation radius");
  }
  const double mu = eval_symbol_radial(slab.symbol, xi_mod);

  const mp_cplx a1(two_pi * xi_mod);
  const mp_cplx mu_m(mu), ell_m(ell);
  const mp_cplx fourpi2xi2 = mp_cplx(4) * boost::multiprecision::cpp_bin_float_50(pi) *
                             boost::multiprecision::cpp_bin_float_50(pi) * mp_cplx(xi_mod) *
                             mp_cplx(xi_mod);
  const bool flip = g_flip_gamma43.load();
  // det / sqrt(1-kappa) with the a3 scaling removed: analytic and even in the a3 branch
  auto F = [&](const mp_cplx& kap) {
    mp_cplx rho = fourpi2xi2 * kap;
    mp_cplx root = sqrt(mp_cplx(1) - kap);
    mp_cplx a3 = a1 * root;
    auto red = reduced_matrix<mp_cplx>(rho, a1, a3, mu_m, ell_m, flip);
    return det4(red.m) * exp(a3 * ell_m) / root;
  };

  mp_cplx kap(g0 * ell * ell * ell / 3.0);
  int it = 0;
  bool converged = false;
  while (it < opt.newton_max_iter) {
    ++it;
    mp_cplx f = F(kap);
    mp_cplx h = mp_cplx(1e-15) * (abs(kap) > 1 ? mp_cplx(abs(kap)) : mp_cplx(1));
    mp_cplx df = (F(kap + h) - F(kap - h)) / (mp_cplx(2) * h);
    if (abs(df) == 0) break;
    mp_cplx step = f / df;
    kap -= step;
    double kd = abs(kap).convert_to<double>();
    if (!std::isfinite(kd) || kd > 1e6) break;
    if (abs(step) <= opt.newton_tol * abs(kap)) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorKind::continuation_failed, "Newton iteration from the seed did not converge");
  }
  DispersionResult res;
  res.kappa = to_cplx(kap);
  res.rho = to_cplx(fourpi2xi2 * kap);
  // imaginary parts at round-off level are noise of the real iteration
  if (std::abs(std::imag(res.kappa)) <= 1e-14 * std::abs(res.kappa)) {
    res.kappa = std::real(res.kappa);
    res.rho = std::real(res.rho);
  }
  res.iterations = it;
  res.method = "low_freq";
  {
    mp_cplx rho = fourpi2xi2 * kap;
    mp_cplx a3 = a1 * sqrt(mp_cplx(1) - kap);
    auto red = reduced_matrix<mp_cplx>(rho, a1, a3, mu_m, ell_m, flip);
    auto sc = hadamard<mp_cplx, boost::multiprecision::cpp_bin_float_50>(red.m);
    res.det_residual = (abs(det4(red.m)) / sc).convert_to<double>();
  }
  finish_root(res, xi_mod, mu, ell, opt.null_tol);
  return res;
}

Vec4c null_vector(const Mat4c& m, double tol) {
  Eigen::Vector4d colnorm;
  Mat4c eq = m;
  for (int c = 0; c < 4; ++c) {
    colnorm(c) = m.col(c).norm();
    if (colnorm(c) == 0.0) {
      Vec4c e = Vec4c::Zero();
      e(c) = 1.0;
      return e;
    }
    eq.col(c) /= colnorm(c);
  }
  Eigen::JacobiSVD<Mat4c> svd(eq, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (s(3) > tol * s(0)) {
    std::ostringstream msg;
    msg << "smallest singular value ratio " << s(3) / s(0) << " exceeds " << tol;
    throw Error(ErrorKind::not_a_root, msg.str());
  }
  Vec4c z = svd.matrixV().col(3);
  Vec4c v;
  for (int c = 0; c < 4; ++c) v(c) = z(c) / colnorm(c);
  // fix the phase on the largest component for reproducible output
  int imax = 0;
  for (int c = 1; c < 4; ++c)
    if (std::abs(v(c)) > std::abs(v(imax))) imax = c;
  v *= std::conj(v(imax)) / std::abs(v(imax));
  return v / v.norm();
}

Vec4c null_vector(const DispersionMatrix& mat, double tol) { return null_vector(mat.entries, tol); }

namespace {

struct ModeTerms {
  std::array<cplx, 4> a;
  std::array<cplx, 4> cv, cw, cp;
  std::array<double, 4> shift;  // max(0, Re a_j) l
};

ModeTerms mode_terms(const DispersionResult& r, double xi_mod, double ell) {
  ModeTerms t;
  t.a = dispersion_exponents(r.rho, xi_mod);
  const cplx a1 = t.a[0];
  for (int j = 0; j < 4; ++j) {
    t.shift[j] = std::max(0.0, std::real(t.a[j])) * ell;
    t.cv[j] = r.null_vector(j);
    t.cw[j] = t.a[j] * t.cv[j] / a1;
    t.cp[j] = -(a1 * a1 - r.rho - t.a[j] * t.a[j]) * t.cv[j] / t.a[j];
  }
  return t;
}

}  // namespace

ModePoint eval_mode(const DispersionResult& r, double xi_mod, double mu, double ell, double y) {
  (void)mu;
  auto a = dispersion_exponents(r.rho, xi_mod);
  const cplx a1 = a[0], a3 = a[2];
  const cplx d = r.rho / (a1 + a3);
  const Vec4c& u = r.reduced_vector;
  const cplx xy = expm1_c(d * y);
  const cplx top1 = std::exp(a1 * (y - ell));
  const cplx top3 = std::exp(a3 * (y - ell));
  const cplx bot = std::exp(-a1 * y);
  ModePoint p;
  p.v = u(0) * top1 - u(2) * top3 * xy + bot * (u(1) + u(3) * xy);
  p.w = u(0) * top1 + u(2) * top3 * (-d - a1 * xy) / a1 +
        bot * (-a1 * u(1) + u(3) * (d - a3 * xy)) / a1;
  // only the a1, a2 terms carry pressure
  const cplx t3 = std::exp(-a3 * ell);
  const cplx v1_top = u(0) * top1 - u(2) * t3 * std::exp(a1 * y);
  p.p = r.rho / a1 * (v1_top - (u(1) - u(3)) * bot);
  return p;
}

cplx mode_surface_height(const DispersionResult& r, double xi_mod, double mu, double ell) {
  return -eval_mode(r, xi_mod, mu, ell, ell).v / r.rho;
}

ModeNorms mode_norms(const DispersionResult& r, double xi_mod, double mu, double ell) {
  using rule = boost::math::quadrature::gauss<double, 20>;
  const auto& xs = rule::abscissa();
  const auto& ws = rule::weights();
  ModeNorms out;
  auto panel = [&](double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (double sgn : {-1.0, 1.0}) {
        ModePoint pt = eval_mode(r, xi_mod, mu, ell, c + sgn * h * xs[i]);
        out.l2 += h * ws[i] * (std::norm(pt.w) + std::norm(pt.v));
        out.bilinear += h * ws[i] * (pt.w * pt.w + pt.v * pt.v);
      }
    }
  };
  // panels doubling in width away from each end, starting at the layer scale
  const double layer = std::min(ell / 4.0, 0.25 / (two_pi * xi_mod));
  std::vector<double> cuts{0.0};
  for (double w = layer; cuts.back() + w < 0.5 * ell; w *= 2.0) cuts.push_back(cuts.back() + w);
  cuts.push_back(0.5 * ell);
  const std::size_t half = cuts.size();
  for (std::size_t k = half - 1; k-- > 0;) cuts.push_back(ell - cuts[k]);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (cuts[k + 1] > cuts[k]) panel(cuts[k], cuts[k + 1]);
  }
  out.h = mode_surface_height(r, xi_mod, mu, ell);
  return out;
}

ModeProfile reconstruct_mode(const DispersionResult& r, double xi_mod, double mu, double ell,
                             int grid_size) {
  if (grid_size < 1) throw Error(ErrorKind::parameter, "grid_size must be positive");
  ModeProfile prof;
  ModeTerms t = mode_terms(r, xi_mod, ell);
  prof.a = t.a;
  prof.coeff_v = t.cv;
  prof.coeff_w = t.cw;
  prof.coeff_p = t.cp;
  const cplx a1 = t.a[0];
  const cplx rho = r.rho;
  double scale = 0.0, bulk = 0.0;
  for (int k = 0; k <= grid_size; ++k) {
    double y = ell * k / grid_size;
    ModePoint pt = eval_mode(r, xi_mod, mu, ell, y);
    prof.y.push_back(y);
    prof.v.push_back(pt.v);
    prof.w.push_back(pt.w);
    prof.p.push_back(pt.p);
    cplx r1 = 0.0, r2 = 0.0, r3 = 0.0;
    for (int j = 0; j < 4; ++j) {
      cplx e = std::exp(t.a[j] * y - t.shift[j]);
      cplx aj = t.a[j];
      r1 += (-a1 * t.cw[j] + aj * t.cv[j]) * e;
      r2 += (-rho * t.cw[j] + a1 * t.cp[j] + a1 * a1 * t.cw[j] - aj * aj * t.cw[j]) * e;
      r3 += (-rho * t.cv[j] + aj * t.cp[j] + a1 * a1 * t.cv[j] - aj * aj * t.cv[j]) * e;
      double mag = std::abs(e) * std::max({std::abs(t.cv[j]), std::abs(t.cw[j]), std::abs(t.cp[j])});
      scale = std::max(scale, mag * std::max(1.0, std::abs(aj) * std::abs(aj)));
    }
    bulk = std::max({bulk, std::abs(r1), std::abs(r2), std::abs(r3)});
  }
  prof.profile_scale = scale;
  prof.bulk_residual = scale > 0.0 ? bulk / scale : 0.0;
  prof.h = mode_surface_height(r, xi_mod, mu, ell);

  // boundary conditions from the per-term representation
  auto rel = [](cplx sum, double mag) { return mag > 0.0 ? std::abs(sum) / mag : std::abs(sum); };
  cplx v0 = 0.0, w0 = 0.0, tang = 0.0, normal = 0.0, vtop = 0.0;
  double mv0 = 0.0, mw0 = 0.0, mt = 0.0, mn = 0.0;
  for (int j = 0; j < 4; ++j) {
    cplx e0 = std::exp(-t.shift[j]);
    cplx el = std::exp(t.a[j] * ell - t.shift[j]);
    cplx aj = t.a[j];
    v0 += t.cv[j] * e0;
    w0 += t.cw[j] * e0;
    mv0 = std::max(mv0, std::abs(t.cv[j] * e0));
    mw0 = std::max(mw0, std::abs(t.cw[j] * e0));
    cplx tj = (a1 * t.cv[j] + aj * t.cw[j]) * el;
    tang += tj;
    mt = std::max(mt, std::abs(tj));
    cplx nj = (t.cp[j] - 2.0 * aj * t.cv[j] + mu * t.cv[j] / rho) * el;
    normal += nj;
    mn = std::max(mn, std::abs(t.cp[j] * el) + std::abs(2.0 * aj * t.cv[j] * el) +
                          std::abs(mu * t.cv[j] * el / rho));
    vtop += t.cv[j] * el;
  }
  cplx hk = -vtop / rho;
  prof.boundary_residual = {rel(v0, mv0), rel(w0, mw0), rel(tang, mt), rel(normal, mn),
                            rel(-rho * hk - vtop, std::abs(vtop))};
  return prof;
}

std::vector<SweepRow> sweep_dispersion(const SlabParams& slab, const std::vector<double>& xi_list,
                                       const DispersionOptions& opt, int jobs) {
  if (xi_list.empty()) throw Error(ErrorKind::parameter, "empty frequency list");
  check_slab(slab);
  for (double x : xi_list) {
    if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorKind::parameter, "moduli must be positive");
  }
  std::vector<SweepRow> rows(xi_list.size());
  auto work = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.xi_mod = xi_list[i];
    try {
      row.mu = eval_symbol_radial(slab.symbol, row.xi_mod);
      if (row.xi_mod < opt.crossover) {
        row.method = "low_freq";
        row.result = find_low_freq_root(row.xi_mod, slab, opt);
      } else if (high_freq_precondition(row.xi_mod, row.mu)) {
        row.method = "bracket";
        row.result = find_high_freq_root(row.xi_mod, row.mu, slab.ell, opt);
      } else {
        row.method = "scan";
        row.result = find_scan_root(row.xi_mod, row.mu, slab.ell, opt);
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < rows.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "xi_mod,mu,method,re_rho,im_rho,kappa_re,kappa_im,det_residual,iterations,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << r.xi_mod << ',' << r.mu << ',' << r.method << ',';
    if (r.error.empty()) {
      out << std::real(r.result.rho) << ',' << std::imag(r.result.rho) << ','
          << std::real(r.result.kappa) << ',' << std::imag(r.result.kappa) << ','
          << r.result.det_residual << ',' << r.result.iterations << ",\n";
    } else {
      out << ",,,,,," << err << '\n';
    }
  }
  return out.str();
}

}  // namespace slabdecay
