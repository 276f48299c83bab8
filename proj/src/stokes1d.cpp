#include "slabdecay/stokes1d.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <nlohmann/json.hpp>

#include "slabdecay/errors.hpp"

namespace slabdecay {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * pi;

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using VecD = Eigen::VectorXd;

// Unknowns: (w_j, v_j) for nodes j = 1..n interleaved, then p_0..p_{n-1}, then h.
struct Layout {
  int n;
  int iw(int j) const { return 2 * (j - 1); }
  int iv(int j) const { return 2 * (j - 1) + 1; }
  int ip(int k) const { return 2 * n + k; }
  int ih() const { return 3 * n; }
  int size() const { return 3 * n + 1; }
  int nu() const { return 2 * n; }
};

double lumped(int j, int n, double dy) { return j == n ? 0.5 * dy : dy; }

// Element contributions of the P1 bilinear form of the dissipation,
// local order (wL, wR, vL, vR).
void element_stiffness(double a1, double dy, double k[4][4]) {
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) k[r][c] = 0.0;
  const double m6 = dy / 6.0;
  const double mass[2][2] = {{2 * m6, m6}, {m6, 2 * m6}};
  const double lap[2][2] = {{1.0 / dy, -1.0 / dy}, {-1.0 / dy, 1.0 / dy}};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      k[r][c] += 2.0 * a1 * a1 * mass[r][c] + lap[r][c];
      k[2 + r][2 + c] += 2.0 * lap[r][c] + a1 * a1 * mass[r][c];
    }
  }
  // a1 (v phi_w' + w' phi_v)
  const double h = 0.5 * a1;
  k[0][2] += -h; k[0][3] += -h; k[1][2] += h; k[1][3] += h;
  k[2][0] += -h; k[2][1] += h; k[3][0] += -h; k[3][1] += h;
}

struct Operators {
  Layout lay;
  SpMat K, M, B;  // velocity stiffness, lumped mass (diagonal), divergence (n x 2n)
  VecD mdiag;
};

Operators build_operators(int n, double ell, double xi_mod) {
  Operators op{Layout{n}, SpMat(2 * n, 2 * n), SpMat(2 * n, 2 * n), SpMat(n, 2 * n), VecD(2 * n)};
  const double dy = ell / n;
  const double a1 = two_pi * xi_mod;
  std::vector<Triplet> tk, tb;
  for (int cell = 0; cell < n; ++cell) {
    double k[4][4];
    element_stiffness(a1, dy, k);
    const int nodes[2] = {cell, cell + 1};
    int idx[4];
    for (int s = 0; s < 2; ++s) {
      idx[s] = nodes[s] == 0 ? -1 : op.lay.iw(nodes[s]);
      idx[2 + s] = nodes[s] == 0 ? -1 : op.lay.iv(nodes[s]);
    }
    for (int r = 0; r < 4; ++r) {
      if (idx[r] < 0) continue;
      for (int c = 0; c < 4; ++c) {
        if (idx[c] < 0 || k[r][c] == 0.0) continue;
        tk.emplace_back(idx[r], idx[c], k[r][c]);
      }
    }
    // cell integral of -a1 w + v'
    if (idx[0] >= 0) tb.emplace_back(cell, idx[0], -0.5 * a1 * dy);
    tb.emplace_back(cell, idx[1], -0.5 * a1 * dy);
    if (idx[2] >= 0) tb.emplace_back(cell, idx[2], -1.0);
    tb.emplace_back(cell, idx[3], 1.0);
  }
  op.K.setFromTriplets(tk.begin(), tk.end());
  op.B.setFromTriplets(tb.begin(), tb.end());
  std::vector<Triplet> tm;
  for (int j = 1; j <= n; ++j) {
    double m = lumped(j, n, dy);
    op.mdiag(op.lay.iw(j)) = m;
    op.mdiag(op.lay.iv(j)) = m;
    tm.emplace_back(op.lay.iw(j), op.lay.iw(j), m);
    tm.emplace_back(op.lay.iv(j), op.lay.iv(j), m);
  }
  op.M.setFromTriplets(tm.begin(), tm.end());
  return op;
}

// theta-scheme step matrix for step length tau.
SpMat step_matrix(const Operators& op, double tau, double theta, double mu) {
  const Layout& L = op.lay;
  std::vector<Triplet> t;
  for (int k = 0; k < op.K.outerSize(); ++k)
    for (SpMat::InnerIterator it(op.K, k); it; ++it) t.emplace_back(it.row(), it.col(), theta * it.value());
  for (int i = 0; i < L.nu(); ++i) t.emplace_back(i, i, op.mdiag(i) / tau);
  for (int k = 0; k < op.B.outerSize(); ++k) {
    for (SpMat::InnerIterator it(op.B, k); it; ++it) {
      t.emplace_back(L.ip(it.row()), it.col(), it.value());
      t.emplace_back(it.col(), L.ip(it.row()), -it.value());
    }
  }
  const int vn = L.iv(L.n);
  t.emplace_back(vn, L.ih(), theta * mu);
  t.emplace_back(L.ih(), vn, -theta);
  t.emplace_back(L.ih(), L.ih(), 1.0 / tau);
  SpMat A(L.size(), L.size());
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

struct RealState {
  VecD u;  // 2n
  VecD p;  // n
  double h = 0.0;
};

void split(const ModeState& s, const Layout& L, RealState& re, RealState& im) {
  re.u.resize(L.nu());
  im.u.resize(L.nu());
  re.p.resize(L.n);
  im.p.resize(L.n);
  for (int j = 1; j <= L.n; ++j) {
    re.u(L.iw(j)) = s.w[j].real();
    im.u(L.iw(j)) = s.w[j].imag();
    re.u(L.iv(j)) = s.v[j].real();
    im.u(L.iv(j)) = s.v[j].imag();
  }
  for (int k = 0; k < L.n; ++k) {
    re.p(k) = s.p[k].real();
    im.p(k) = s.p[k].imag();
  }
  re.h = s.h.real();
  im.h = s.h.imag();
}

void merge(const RealState& re, const RealState& im, const Layout& L, ModeState& s) {
  s.w.assign(L.n + 1, 0.0);
  s.v.assign(L.n + 1, 0.0);
  s.p.assign(L.n, 0.0);
  for (int j = 1; j <= L.n; ++j) {
    s.w[j] = cplx(re.u(L.iw(j)), im.u(L.iw(j)));
    s.v[j] = cplx(re.u(L.iv(j)), im.u(L.iv(j)));
  }
  for (int k = 0; k < L.n; ++k) s.p[k] = cplx(re.p(k), im.p(k));
  s.h = cplx(re.h, im.h);
}

void check_state(const ModeState& s) {
  const std::size_t n = s.p.size();
  if (n < 8 || s.w.size() != n + 1 || s.v.size() != n + 1) {
    throw Error(ErrorKind::parameter, "mode state needs at least 8 cells and consistent sizes");
  }
  if (s.w[0] != 0.0 || s.v[0] != 0.0) {
    throw Error(ErrorKind::parameter, "bottom condition w(0) = v(0) = 0 violated");
  }
}

class Stepper {
public:
  Stepper(const Operators& op, double tau, double theta, double mu)
      : op_(op), tau_(tau), theta_(theta), mu_(mu) {
    A_ = step_matrix(op, tau, theta, mu);
    lu_.analyzePattern(A_);
    lu_.factorize(A_);
    if (lu_.info() != Eigen::Success) {
      throw Error(ErrorKind::singular_system, "factorization of the step matrix failed");
    }
  }

  void step(RealState& s) const {
    const Layout& L = op_.lay;
    VecD rhs = VecD::Zero(L.size());
    VecD ku = op_.K * s.u;
    VecD top = op_.mdiag.cwiseProduct(s.u) / tau_ - (1.0 - theta_) * ku;
    top(L.iv(L.n)) -= (1.0 - theta_) * mu_ * s.h;
    rhs.head(L.nu()) = top;
    rhs(L.ih()) = s.h / tau_ + (1.0 - theta_) * s.u(L.iv(L.n));
    VecD x = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success || !x.allFinite()) {
      throw Error(ErrorKind::singular_system, "step solve failed");
    }
    s.u = x.head(L.nu());
    s.p = x.segment(L.nu(), L.n);
    s.h = x(L.ih());
  }

  double tau() const { return tau_; }
  double theta() const { return theta_; }

private:
  const Operators& op_;
  double tau_, theta_, mu_;
  SpMat A_;
  Eigen::SparseLU<SpMat> lu_;
};

double lumped_norm2(const std::vector<cplx>& f, double dy) {
  const int n = static_cast<int>(f.size()) - 1;
  double s = 0.0;
  for (int j = 0; j <= n; ++j) {
    double m = (j == 0 || j == n) ? 0.5 * dy : dy;
    s += m * std::norm(f[j]);
  }
  return s;
}

}  // namespace

Grid1D::Grid1D(int n, double l) : n_cells(n), ell(l) {
  if (n < 8) throw Error(ErrorKind::parameter, "grid needs at least 8 cells");
  if (!(l > 0.0)) throw Error(ErrorKind::parameter, "ell must be positive");
}

ModeState ModeState::zero(const Grid1D& grid) {
  ModeState s;
  s.w.assign(grid.n_cells + 1, 0.0);
  s.v.assign(grid.n_cells + 1, 0.0);
  s.p.assign(grid.n_cells, 0.0);
  return s;
}

ModeState ModeState::surface(const Grid1D& grid, cplx h0) {
  ModeState s = zero(grid);
  s.h = h0;
  return s;
}

double energy_xi(const ModeState& s, double ell, double mu) {
  const double dy = ell / static_cast<double>(s.p.size());
  return 0.5 * (lumped_norm2(s.w, dy) + lumped_norm2(s.v, dy)) + 0.5 * mu * std::norm(s.h);
}

double dissipation_xi(const ModeState& s, double ell, double xi_mod) {
  const int n = static_cast<int>(s.p.size());
  const double dy = ell / n;
  const double a1 = two_pi * xi_mod;
  double total = 0.0;
  for (int c = 0; c < n; ++c) {
    const cplx w0 = s.w[c], w1 = s.w[c + 1], v0 = s.v[c], v1 = s.v[c + 1];
    const cplx dw = (w1 - w0) / dy, dv = (v1 - v0) / dy;
    // exact integral of |f|^2 for linear f on the cell
    auto sq = [dy](cplx f0, cplx f1) {
      return dy / 3.0 * (std::norm(f0) + std::real(f0 * std::conj(f1)) + std::norm(f1));
    };
    total += 2.0 * a1 * a1 * sq(w0, w1);
    total += 2.0 * std::norm(dv) * dy;
    total += sq(a1 * v0 + dw, a1 * v1 + dw);
  }
  return total;
}

std::pair<double, double> lyapunov_profile(double y, double ell, double xi_mod) {
  if (xi_mod == 0.0) return {1.0 / (two_pi * ell), y / ell};
  const double k = xi_mod;
  // sinh(k y)/sinh(k l) and its derivative without overflow
  const double den = -std::expm1(-2.0 * k * ell);
  const double e = std::exp(k * (y - ell));
  const double a = e * (-std::expm1(-2.0 * k * y)) / den;
  const double da = k * e * (1.0 + std::exp(-2.0 * k * y)) / den;
  return {da / (two_pi * xi_mod), a};
}

double lyapunov_xi(const ModeState& s, double ell, double xi_mod, double mu, double c_beta) {
  const double e = energy_xi(s, ell, mu);
  if (xi_mod == 0.0) return e;
  const int n = static_cast<int>(s.p.size());
  const double dy = ell / n;
  const double beta = c_beta * xi_mod * xi_mod * mu / std::pow(1.0 + xi_mod, 3);
  cplx cross = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double m = (j == 0 || j == n) ? 0.5 * dy : dy;
    auto [pw, pv] = lyapunov_profile(dy * j, ell, xi_mod);
    cross += m * (s.w[j] * pw + s.v[j] * pv);
  }
  return e + beta * std::real(cross * std::conj(s.h));
}

double divergence_residual(const ModeState& s, double ell, double xi_mod) {
  const int n = static_cast<int>(s.p.size());
  const double dy = ell / n;
  const double a1 = two_pi * xi_mod;
  double worst = 0.0, scale = 0.0;
  for (int c = 0; c < n; ++c) {
    cplx div = -0.5 * a1 * dy * (s.w[c] + s.w[c + 1]) + (s.v[c + 1] - s.v[c]);
    double mag = 0.5 * a1 * dy * (std::abs(s.w[c]) + std::abs(s.w[c + 1])) +
                 std::abs(s.v[c + 1]) + std::abs(s.v[c]);
    worst = std::max(worst, std::abs(div));
    scale = std::max(scale, mag);
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

ModeState project_divergence_free(const ModeState& s, double ell, double xi_mod, double* change) {
  check_state(s);
  const int n = s.n_cells();
  Operators op = build_operators(n, ell, xi_mod);
  const Layout& L = op.lay;
  // [M  -B^T; B 0] [u; q] = [M u0; 0]
  std::vector<Triplet> t;
  for (int i = 0; i < L.nu(); ++i) t.emplace_back(i, i, op.mdiag(i));
  for (int k = 0; k < op.B.outerSize(); ++k) {
    for (SpMat::InnerIterator it(op.B, k); it; ++it) {
      t.emplace_back(L.nu() + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), L.nu() + it.row(), -it.value());
    }
  }
  SpMat A(L.nu() + n, L.nu() + n);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::singular_system, "projection failed");
  RealState re, im;
  split(s, L, re, im);
  ModeState out = s;
  RealState outs[2] = {re, im};
  for (RealState* rs : {&outs[0], &outs[1]}) {
    VecD rhs = VecD::Zero(L.nu() + n);
    rhs.head(L.nu()) = op.mdiag.cwiseProduct(rs->u);
    VecD x = lu.solve(rhs);
    rs->u = x.head(L.nu());
  }
  merge(outs[0], outs[1], L, out);
  out.p = s.p;
  if (change) {
    double d = 0.0;
    for (int j = 0; j <= n; ++j) d += std::norm(out.w[j] - s.w[j]) + std::norm(out.v[j] - s.v[j]);
    *change = std::sqrt(d * ell / n);
  }
  return out;
}

EvolveResult evolve(const SlabParams& slab, double xi_mod, const ModeState& initial, double T,
                    double dt, const EvolveOptions& opt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::parameter, "dt must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw Error(ErrorKind::parameter, "T must be nonnegative");
  if (!(xi_mod >= 0.0)) throw Error(ErrorKind::parameter, "|xi| must be nonnegative");
  check_slab(slab);
  check_state(initial);
  const double ell = slab.ell;
  const double mu = eval_symbol_radial(slab.symbol, xi_mod);
  const int n = initial.n_cells();

  EvolveResult res;
  ModeState state = initial;
  if (divergence_residual(state, ell, xi_mod) > 1e-8) {
    state = project_divergence_free(state, ell, xi_mod, &res.projection_change);
    res.projected = true;
  }
  Operators op = build_operators(n, ell, xi_mod);
  const Layout& L = op.lay;

  res.energy.xi_mod = xi_mod;
  res.energy.mu = mu;
  res.energy.dt = dt;
  res.energy.n_cells = n;
  res.energy.symbol = to_string(slab.symbol.family);

  auto sample = [&](const ModeState& s) {
    res.energy.times.push_back(s.t);
    res.energy.values.push_back(energy_xi(s, ell, mu));
    res.dissipation.push_back(dissipation_xi(s, ell, xi_mod));
    if (opt.record_lyapunov) res.lyapunov.push_back(lyapunov_xi(s, ell, xi_mod, mu, opt.c_beta));
    res.max_divergence_residual =
        std::max(res.max_divergence_residual, divergence_residual(s, ell, xi_mod));
  };
  sample(state);
  const double e0 = res.energy.values.front();

  const int total_steps = static_cast<int>(std::ceil(T / dt - 1e-9));
  const int half = std::min(std::max(opt.startup_half_steps, 0) / 2 * 2, 2 * total_steps);
  std::unique_ptr<Stepper> be, cn;
  if (half > 0) be = std::make_unique<Stepper>(op, 0.5 * dt, 1.0, mu);
  if (total_steps * 2 > half) cn = std::make_unique<Stepper>(op, dt, 0.5, mu);

  RealState re, im;
  split(state, L, re, im);
  const bool has_imag = im.u.cwiseAbs().maxCoeff() > 0.0 || im.h != 0.0;
  auto current = [&]() {
    ModeState s;
    merge(re, im, L, s);
    return s;
  };

  int done_half = 0;
  int step_index = 0;
  double t = state.t;
  ModeState prev = state;
  while (done_half < 2 * total_steps) {
    const Stepper& st = (done_half < half) ? *be : *cn;
    st.step(re);
    if (has_imag) st.step(im);
    done_half += (done_half < half) ? 1 : 2;
    t = initial.t + 0.5 * dt * done_half;
    ++step_index;
    ModeState now = current();
    now.t = t;
    // dissipation at the time-centred state of the step
    ModeState centred = now;
    if (st.theta() == 0.5) {
      for (int j = 0; j <= n; ++j) {
        centred.w[j] = 0.5 * (now.w[j] + prev.w[j]);
        centred.v[j] = 0.5 * (now.v[j] + prev.v[j]);
      }
    }
    res.dissipation_mid.push_back(dissipation_xi(centred, ell, xi_mod));
    const bool last = done_half >= 2 * total_steps;
    bool stop = false;
    if (opt.stop_ratio > 0.0 && energy_xi(now, ell, mu) < opt.stop_ratio * e0) stop = true;
    if (step_index % std::max(1, opt.sample_every) == 0 || last || stop) sample(now);
    prev = std::move(now);
    res.steps = step_index;
    if (stop) break;
  }
  res.final_state = prev;
  return res;
}

EnergyCurve evolve_transverse(double ell, double xi_mod, const std::vector<cplx>& w0, double T,
                              double dt, int startup_half_steps) {
  const int n = static_cast<int>(w0.size()) - 1;
  if (n < 8) throw Error(ErrorKind::parameter, "grid needs at least 8 cells");
  if (!(dt > 0.0)) throw Error(ErrorKind::parameter, "dt must be positive");
  if (w0[0] != 0.0) throw Error(ErrorKind::parameter, "w(0) must vanish");
  const double dy = ell / n;
  const double a1 = two_pi * xi_mod;
  std::vector<Triplet> tk;
  VecD m(n);
  for (int j = 1; j <= n; ++j) m(j - 1) = lumped(j, n, dy);
  for (int c = 0; c < n; ++c) {
    const double ke[2][2] = {{a1 * a1 * dy / 3.0 + 1.0 / dy, a1 * a1 * dy / 6.0 - 1.0 / dy},
                             {a1 * a1 * dy / 6.0 - 1.0 / dy, a1 * a1 * dy / 3.0 + 1.0 / dy}};
    const int idx[2] = {c - 1, c};  // node c -> unknown c-1
    for (int r = 0; r < 2; ++r)
      for (int s = 0; s < 2; ++s)
        if (idx[r] >= 0 && idx[s] >= 0) tk.emplace_back(idx[r], idx[s], ke[r][s]);
  }
  SpMat K(n, n);
  K.setFromTriplets(tk.begin(), tk.end());
  auto make = [&](double tau, double theta) {
    SpMat A = theta * K;
    for (int i = 0; i < n; ++i) A.coeffRef(i, i) += m(i) / tau;
    A.makeCompressed();
    return A;
  };
  Eigen::SparseLU<SpMat> lu_be, lu_cn;
  SpMat Abe = make(0.5 * dt, 1.0), Acn = make(dt, 0.5);
  lu_be.compute(Abe);
  lu_cn.compute(Acn);
  if (lu_be.info() != Eigen::Success || lu_cn.info() != Eigen::Success) {
    throw Error(ErrorKind::singular_system, "transverse factorization failed");
  }
  VecD re(n), im(n);
  for (int j = 1; j <= n; ++j) {
    re(j - 1) = w0[j].real();
    im(j - 1) = w0[j].imag();
  }
  EnergyCurve curve;
  curve.kind = "transverse_energy";
  curve.xi_mod = xi_mod;
  curve.dt = dt;
  curve.n_cells = n;
  auto energy = [&]() { return 0.5 * (m.dot(re.cwiseAbs2()) + m.dot(im.cwiseAbs2())); };
  curve.times.push_back(0.0);
  curve.values.push_back(energy());
  const int total = static_cast<int>(std::ceil(T / dt - 1e-9));
  const int half = std::min(std::max(startup_half_steps, 0) / 2 * 2, 2 * total);
  int done = 0;
  while (done < 2 * total) {
    const bool startup = done < half;
    const double tau = startup ? 0.5 * dt : dt;
    const double theta = startup ? 1.0 : 0.5;
    auto& lu = startup ? lu_be : lu_cn;
    for (VecD* x : {&re, &im}) {
      VecD rhs = m.cwiseProduct(*x) / tau - (1.0 - theta) * (K * *x);
      *x = lu.solve(rhs);
    }
    done += startup ? 1 : 2;
    curve.times.push_back(0.5 * dt * done);
    curve.values.push_back(energy());
  }
  return curve;
}

RateFit fit_decay_rate(const EnergyCurve& curve, double t0, double t1) {
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    double t = curve.times[i];
    if (t < t0 || t > t1) continue;
    if (!(curve.values[i] > 0.0)) {
      throw Error(ErrorKind::fit_domain, "nonpositive energy inside the fit window");
    }
    ts.push_back(t);
    ys.push_back(std::log(curve.values[i]));
  }
  if (ts.size() < 2) throw Error(ErrorKind::fit_domain, "fewer than two samples in the fit window");
  const double nn = static_cast<double>(ts.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    my += ys[i];
  }
  mt /= nn;
  my /= nn;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    sty += (ts[i] - mt) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (stt == 0.0) throw Error(ErrorKind::fit_domain, "degenerate fit window");
  RateFit fit;
  const double slope = sty / stt;
  fit.rate = -slope;
  double sse = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double r = ys[i] - (my + slope * (ts[i] - mt));
    sse += r * r;
  }
  fit.quality = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  fit.samples = static_cast<int>(ts.size());
  return fit;
}

InequalityReport discrete_inequality_suite(const Grid1D& grid, double xi_mod, int trials,
                                           std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorKind::parameter, "trials must be positive");
  const int n = grid.n_cells;
  const double ell = grid.ell;
  const double dy = grid.dy();
  const double a1 = two_pi * xi_mod;
  InequalityReport rep;
  rep.trials = trials;
  rep.xi_mod = xi_mod;
  {
    // sup over x >= 0 of (1+x)/sqrt(q^2 + 4 pi^2 x^2), attained at x = q^2/(4 pi^2)
    const double q = pi / (2.0 * ell);
    const double xs = q * q / (4.0 * pi * pi);
    rep.poincare_constant = (1.0 + xs) / std::sqrt(q * q + 4.0 * pi * pi * xs * xs);
  }
  auto norms = [&](const std::vector<double>& f, double& l2, double& d2) {
    l2 = 0.0;
    d2 = 0.0;
    for (int c = 0; c < n; ++c) {
      l2 += dy / 3.0 * (f[c] * f[c] + f[c] * f[c + 1] + f[c + 1] * f[c + 1]);
      double d = (f[c + 1] - f[c]) / dy;
      d2 += d * d * dy;
    }
  };
  auto check_profile = [&](const std::vector<double>& f, bool count) {
    double l2, d2;
    norms(f, l2, d2);
    const double h2 = d2 + a1 * a1 * l2;
    if (h2 == 0.0) return;
    const double trace = f[n] * f[n] * (1.0 + xi_mod) / ((1.0 + ell) * h2);
    const double poinc = (1.0 + xi_mod) * std::sqrt(l2 / h2);
    if (count) {
      rep.trace_worst_ratio = std::max(rep.trace_worst_ratio, trace);
      if (trace > 1.0 + 1e-12) ++rep.trace_violations;
      rep.poincare_worst = std::max(rep.poincare_worst, poinc);
      if (poinc > rep.poincare_constant * (1.0 + 1e-12)) ++rep.poincare_violations;
    }
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> kind(0, 2);
  auto random_profile = [&]() {
    std::vector<double> f(n + 1, 0.0);
    switch (kind(rng)) {
      case 0:  // white nodal noise
        for (int j = 1; j <= n; ++j) f[j] = normal(rng);
        break;
      case 1:  // random walk
        for (int j = 1; j <= n; ++j) f[j] = f[j - 1] + normal(rng) * std::sqrt(dy);
        break;
      default: {  // few smooth modes
        for (int m = 0; m < 6; ++m) {
          double c = normal(rng) / (1.0 + m);
          for (int j = 1; j <= n; ++j) f[j] += c * std::sin((m + 0.5) * pi * grid.node(j) / ell);
        }
      }
    }
    return f;
  };
  for (int k = 0; k < trials; ++k) check_profile(random_profile(), true);

  // linear profile: ratio bound / actual
  {
    std::vector<double> f(n + 1);
    for (int j = 0; j <= n; ++j) f[j] = grid.node(j);
    double l2, d2;
    norms(f, l2, d2);
    const double h2 = d2 + a1 * a1 * l2;
    rep.linear_trace_factor = ((1.0 + ell) / (1.0 + xi_mod) * h2) / (f[n] * f[n]);
  }

  // Korn-type ratio on random longitudinal fields
  for (int k = 0; k < trials; ++k) {
    ModeState s = ModeState::zero(grid);
    auto fw = random_profile();
    auto fv = random_profile();
    for (int j = 0; j <= n; ++j) {
      s.w[j] = fw[j];
      s.v[j] = fv[j];
    }
    double lw, dw, lv, dv;
    norms(fw, lw, dw);
    norms(fv, lv, dv);
    const double grad2 = a1 * a1 * (lw + lv) + dw + dv;
    const double sym2 = 2.0 * dissipation_xi(s, ell, xi_mod);
    if (sym2 > 0.0) rep.korn_constant = std::max(rep.korn_constant, grad2 / sym2);
  }
  return rep;
}

std::string state_to_json(const ModeState& s, double ell, double xi_mod, double mu) {
  nlohmann::ordered_json j;
  j["kind"] = "mode_state";
  j["grid"] = {{"n_cells", s.n_cells()}, {"ell", ell}, {"velocity_at", "nodes"},
               {"pressure_at", "midpoints"}};
  j["xi_mod"] = xi_mod;
  j["mu"] = mu;
  j["t"] = s.t;
  auto pairs = [](const std::vector<cplx>& f) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& z : f) a.push_back({z.real(), z.imag()});
    return a;
  };
  j["w"] = pairs(s.w);
  j["v"] = pairs(s.v);
  j["p"] = pairs(s.p);
  j["h"] = {s.h.real(), s.h.imag()};
  j["energy"] = energy_xi(s, ell, mu);
  return j.dump(1);
}

std::string evolve_to_csv(const EvolveResult& r) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "t,E,D,Lyapunov\n";
  for (std::size_t i = 0; i < r.energy.times.size(); ++i) {
    out << r.energy.times[i] << ',' << r.energy.values[i] << ',' << r.dissipation[i] << ',';
    if (i < r.lyapunov.size()) out << r.lyapunov[i];
    out << '\n';
  }
  return out.str();
}

}  // namespace slabdecay
