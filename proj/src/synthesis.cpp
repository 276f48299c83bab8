#include "slabdecay/synthesis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "slabdecay/errors.hpp"

namespace slabdecay {

namespace {

constexpr double pi = std::numbers::pi;

double sphere_area(int d) {
  // surface of the unit sphere in R^d
  return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d);
}

std::vector<double> geometric_nodes(double a, double b, int per_decade) {
  if (!(b > a)) return {a};
  const int n = std::max(1, static_cast<int>(std::ceil(std::log10(b / a) * per_decade)));
  std::vector<double> x(n + 1);
  for (int i = 0; i <= n; ++i) x[i] = a * std::pow(b / a, static_cast<double>(i) / n);
  x[n] = b;
  return x;
}

template <class F>
void run_pool(std::size_t count, int jobs, F&& work) {
  jobs = std::max(1, jobs);
  std::vector<std::exception_ptr> errors(count);
  auto guarded = [&](std::size_t i) {
    try {
      work(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) guarded(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// value of a run at time t: log-linear between stored samples
double interpolate(const EnergyCurve& c, double t) {
  const auto& ts = c.times;
  const auto& es = c.values;
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  if (it == ts.begin()) return es.front();
  if (it == ts.end()) return es.back();
  const std::size_t k = static_cast<std::size_t>(it - ts.begin());
  const double t0 = ts[k - 1], t1 = ts[k], e0 = es[k - 1], e1 = es[k];
  const double s = (t - t0) / (t1 - t0);
  if (e0 > 0.0 && e1 > 0.0) return e0 * std::pow(e1 / e0, s);
  return e0 + s * (e1 - e0);
}

int grid_for(double xi_mod, double ell, int max_cells) {
  // resolve the 1/(2 pi |xi|) boundary layers; low frequencies need few cells
  int n = 64;
  const double want = 16.0 * (1.0 + 2.0 * pi * xi_mod * ell);
  while (n < want && n < max_cells) n *= 2;
  return std::min(std::max(n, 8), std::max(max_cells, 8));
}

struct RootInfo {
  bool found = false;
  DispersionResult result;
};

RootInfo try_root(const SlabParams& slab, double xi_mod, double mu, const DispersionOptions& opt) {
  RootInfo info;
  if (xi_mod <= 0.0) return info;
  try {
    if (xi_mod < opt.crossover) {
      info.result = find_low_freq_root(xi_mod, slab, opt);
    } else if (high_freq_precondition(xi_mod, mu)) {
      info.result = find_high_freq_root(xi_mod, mu, slab.ell, opt);
    } else {
      info.result = find_scan_root(xi_mod, mu, slab.ell, opt);
    }
    const cplx rho = info.result.rho;
    info.found = std::abs(rho.imag()) <= 1e-10 * std::abs(rho) && rho.real() > 0.0;
  } catch (const Error&) {
    info.found = false;
  }
  return info;
}

ModeState matched_state(const Grid1D& grid, const DispersionResult& root, double xi_mod,
                        double mu, double h0) {
  ModeState s = ModeState::zero(grid);
  const cplx hphi = mode_surface_height(root, xi_mod, mu, grid.ell);
  const cplx scale = h0 / hphi;
  for (int j = 0; j <= grid.n_cells; ++j) {
    ModePoint pt = eval_mode(root, xi_mod, mu, grid.ell, grid.node(j));
    s.w[j] = scale * pt.w;
    s.v[j] = scale * pt.v;
  }
  for (int j = 0; j < grid.n_cells; ++j) {
    s.p[j] = scale * eval_mode(root, xi_mod, mu, grid.ell, grid.mid(j)).p;
  }
  s.h = h0;
  return s;
}

double tail_integral(const SlabParams& slab, const InitialDataSpec& data, double from, int d) {
  if (!(from > 0.0)) return 0.0;
  auto f = [&](double x) {
    const double h = initial_height(data, x, slab.dim);
    return 0.5 * eval_symbol_radial(slab.symbol, x) * h * h * std::pow(x, d);  // x^{d-1} dx = x^d dlog x
  };
  // open at 'from': that modulus is already summed
  const auto x = geometric_nodes(from * (1.0 + 1e-9), from * 1e12, 24);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    sum += 0.5 * (f(x[i]) + f(x[i + 1])) * std::log(x[i + 1] / x[i]);
  }
  return sphere_area(d) * sum;
}

struct Node {
  double xi_mod = 0.0;
  double weight = 0.0;
};

SynthesisResult assemble(const SlabParams& slab, const InitialDataSpec& data,
                         const std::vector<Node>& nodes, const SynthesisOptions& opt,
                         double pde_cap) {
  const auto times = sample_times(opt);
  SynthesisResult res;
  res.modes.resize(nodes.size());
  run_pool(nodes.size(), opt.jobs, [&](std::size_t i) {
    res.modes[i] = mode_energy(slab, data, nodes[i].xi_mod, times, opt, pde_cap);
    res.modes[i].weight = nodes[i].weight;
  });
  // fixed ascending order for the reduction
  std::stable_sort(res.modes.begin(), res.modes.end(),
                   [](const ModeCurve& a, const ModeCurve& b) { return a.xi_mod < b.xi_mod; });
  res.curve.times = times;
  res.curve.values.assign(times.size(), 0.0);
  res.curve.kind = "total_energy";
  res.curve.symbol = to_string(slab.symbol.family);
  res.split_c0 = opt.c0;
  for (const auto& m : res.modes) {
    for (std::size_t k = 0; k < times.size(); ++k) res.curve.values[k] += m.weight * m.curve.values[k];
    const double e0 = m.weight * m.curve.values[0];
    (m.xi_mod < opt.c0 ? res.low_energy : res.high_energy) += e0;
    if (m.engine == Engine::pde) ++res.pde_modes;
    if (m.engine == Engine::dispersion) ++res.dispersion_modes;
    if (m.engine == Engine::asymptotic) ++res.asymptotic_modes;
    if (m.curve.extrapolated_from >= 0.0) {
      res.curve.extrapolated_from = std::max(res.curve.extrapolated_from, m.curve.extrapolated_from);
    }
  }
  // default fit: best law over the positive part of the sampled range
  double t1 = opt.T;
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(res.curve.values[k] > 0.0)) {
      t1 = times[k - 1];
      break;
    }
  }
  try {
    res.fit = fit_decay_law(res.curve, Law::auto_select, 1.0, opt.t_min, t1);
  } catch (const Error&) {
    res.fit.law = "none";
  }
  return res;
}

void check_options(const SynthesisOptions& opt) {
  if (!(opt.T > opt.t_min) || !(opt.t_min > 0.0)) {
    throw Error(ErrorKind::parameter, "need 0 < t_min < T");
  }
  if (opt.samples_per_decade < 1 || opt.nodes_per_decade < 1) {
    throw Error(ErrorKind::parameter, "sample and node densities must be positive");
  }
  if (opt.grid < 8) throw Error(ErrorKind::parameter, "grid must have at least 8 cells");
  if (!(opt.dt_factor > 0.0)) throw Error(ErrorKind::parameter, "dt_factor must be positive");
  if (!(opt.c0 > 0.0)) throw Error(ErrorKind::parameter, "c0 must be positive");
}

}  // namespace

const char* to_string(DataFamily f) {
  switch (f) {
    case DataFamily::sobolev_h: return "sobolev_h";
    case DataFamily::riesz_weighted: return "riesz_weighted";
    case DataFamily::flat_spectrum: return "flat_spectrum";
  }
  return "?";
}

DataFamily data_family_from_string(const std::string& name) {
  if (name == "sobolev_h") return DataFamily::sobolev_h;
  if (name == "riesz_weighted") return DataFamily::riesz_weighted;
  if (name == "flat_spectrum") return DataFamily::flat_spectrum;
  throw Error(ErrorKind::config, "unknown data family '" + name + "'");
}

const char* to_string(VelocityMode v) {
  return v == VelocityMode::zero ? "zero" : "surface_matched";
}

VelocityMode velocity_mode_from_string(const std::string& name) {
  if (name == "zero") return VelocityMode::zero;
  if (name == "surface_matched") return VelocityMode::surface_matched;
  throw Error(ErrorKind::config, "unknown velocity mode '" + name + "'");
}

const char* to_string(Engine e) {
  switch (e) {
    case Engine::pde: return "pde";
    case Engine::dispersion: return "dispersion";
    case Engine::asymptotic: return "asymptotic";
  }
  return "?";
}

double initial_height(const InitialDataSpec& data, double xi_mod, int dim) {
  if (xi_mod > data.cutoff || xi_mod < data.inner_cutoff) return 0.0;
  const double sob =
      std::pow(1.0 + xi_mod * xi_mod, -(2.0 * data.s + dim - 1 + data.epsilon) / 4.0);
  switch (data.family) {
    case DataFamily::sobolev_h: return sob;
    case DataFamily::riesz_weighted: {
      const double p = data.lambda - 0.5 * (dim - 1) + data.riesz_margin;
      if (xi_mod == 0.0) return p > 0.0 ? 0.0 : sob;
      return std::pow(xi_mod, p) * sob;
    }
    case DataFamily::flat_spectrum: return 1.0;
  }
  return 0.0;
}

std::vector<double> sample_times(const SynthesisOptions& opt) {
  std::vector<double> t{0.0};
  const auto g = geometric_nodes(opt.t_min, opt.T, opt.samples_per_decade);
  t.insert(t.end(), g.begin(), g.end());
  return t;
}

std::vector<long long> lattice_shell_counts(int d, int radius) {
  if (d < 1 || radius < 0) throw Error(ErrorKind::parameter, "bad lattice dimension or radius");
  const std::size_t qmax = static_cast<std::size_t>(radius) * radius;
  std::vector<long long> one(qmax + 1, 0);
  for (long long k = 0; static_cast<std::size_t>(k * k) <= qmax; ++k) one[k * k] += k == 0 ? 1 : 2;
  std::vector<long long> acc = one;
  for (int dim = 1; dim < d; ++dim) {
    std::vector<long long> next(qmax + 1, 0);
    for (std::size_t a = 0; a <= qmax; ++a) {
      if (!acc[a]) continue;
      for (std::size_t b = 0; a + b <= qmax; ++b) next[a + b] += acc[a] * one[b];
    }
    acc.swap(next);
  }
  return acc;
}

double theoretical_envelope(const SlabParams& slab, double xi_mod) {
  if (xi_mod == 0.0) return 1.0;
  const double mu = eval_symbol_radial(slab.symbol, xi_mod);
  return xi_mod * xi_mod * mu / std::pow(1.0 + xi_mod, 3);
}

ModeCurve mode_energy(const SlabParams& slab, const InitialDataSpec& data, double xi_mod,
                      const std::vector<double>& times, const SynthesisOptions& opt,
                      double pde_cap) {
  if (times.empty() || times.front() != 0.0) throw Error(ErrorKind::parameter, "times must start at 0");
  const double ell = slab.ell;
  ModeCurve mc;
  mc.xi_mod = xi_mod;
  mc.mu = eval_symbol_radial(slab.symbol, xi_mod);
  mc.envelope = theoretical_envelope(slab, xi_mod);
  mc.curve.times = times;
  mc.curve.xi_mod = xi_mod;
  mc.curve.mu = mc.mu;
  mc.curve.symbol = to_string(slab.symbol.family);
  // zero-average convention: the mean of h is not part of the torus energy
  const double h0 = xi_mod == 0.0 ? 0.0 : initial_height(data, xi_mod, slab.dim);
  const double mu = mc.mu;

  const RootInfo root = try_root(slab, xi_mod, mu, opt.dispersion);
  const bool use_pde = xi_mod == 0.0 || xi_mod <= pde_cap || (!root.found && !high_freq_precondition(xi_mod, mu));

  if (!use_pde && root.found) {
    mc.engine = Engine::dispersion;
    const double rate = 2.0 * root.result.rho.real();
    mc.rate = rate;
    const ModeNorms nm = mode_norms(root.result, xi_mod, mu, ell);
    const double phi_energy = 0.5 * (nm.l2 + mu * std::norm(nm.h));
    double amp2;
    if (data.velocity_mode == VelocityMode::surface_matched) {
      amp2 = std::norm(h0 / nm.h);
    } else {
      // slow-mode component of (u, h) = (0, h0) in the form that makes the modes orthogonal
      amp2 = std::norm(mu * h0 * nm.h / (nm.bilinear - mu * nm.h * nm.h));
    }
    const double e_init = data.velocity_mode == VelocityMode::surface_matched
                              ? amp2 * phi_energy
                              : 0.5 * mu * h0 * h0;
    mc.curve.values.resize(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double slow = amp2 * phi_energy * std::exp(-rate * times[k]);
      // the fast modes are dropped; E never exceeds its initial value
      mc.curve.values[k] = k == 0 ? e_init : std::min(slow, e_init);
    }
    mc.note = "slow mode only";
    return mc;
  }
  if (!use_pde) {
    mc.engine = Engine::asymptotic;
    mc.rate = 2.0 * mu / (4.0 * pi * xi_mod);
    mc.curve.values.resize(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
      mc.curve.values[k] = 0.5 * mu * h0 * h0 * std::exp(-mc.rate * times[k]);
    }
    mc.note = "root not resolved; rho = mu/(4 pi |xi|)";
    return mc;
  }

  mc.engine = Engine::pde;
  const Grid1D grid(grid_for(xi_mod, ell, opt.grid), ell);
  ModeState init = ModeState::surface(grid, h0);
  if (xi_mod == 0.0) {
    init = ModeState::zero(grid);
    for (int j = 0; j <= grid.n_cells; ++j) {
      init.w[j] = data.mean_flow * std::sin(0.5 * pi * grid.node(j) / ell);
    }
  } else if (data.velocity_mode == VelocityMode::surface_matched && root.found) {
    init = matched_state(grid, root.result, xi_mod, mu, h0);
  }
  double rho_est = xi_mod == 0.0 ? pi * pi / (4.0 * ell * ell)
                                 : (root.found ? root.result.rho.real() : mu / (4.0 * pi * xi_mod));
  const double dt = opt.dt_factor / std::max(std::abs(rho_est), 1.0);
  const double T = times.back();
  EvolveOptions eo;
  eo.record_lyapunov = false;
  eo.stop_ratio = opt.stop_ratio;
  EvolveResult run = evolve(slab, xi_mod, init, T, dt, eo);
  const EnergyCurve& ec = run.energy;
  mc.curve.dt = dt;
  mc.curve.n_cells = grid.n_cells;

  const double t_last = ec.times.back();
  double tail_rate = 0.0;
  if (ec.values.back() > 0.0 && ec.times.size() >= 3) {
    try {
      tail_rate = fit_decay_rate(ec, (1.0 - opt.tail_fraction) * t_last, t_last).rate;
    } catch (const Error&) {
      const std::size_t k = ec.times.size() - 1;
      tail_rate = std::log(ec.values[k - 1] / ec.values[k]) / (ec.times[k] - ec.times[k - 1]);
    }
  }
  mc.rate = tail_rate;
  mc.curve.values.resize(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    if (t <= t_last) {
      mc.curve.values[k] = interpolate(ec, t);
    } else {
      mc.curve.values[k] = ec.values.back() * std::exp(-std::max(tail_rate, 0.0) * (t - t_last));
    }
  }
  if (t_last < T) {
    mc.curve.extrapolated_from = t_last;
    mc.note = "exponential extension";
  }
  return mc;
}

SynthesisResult synthesize_torus(const SlabParams& slab, const InitialDataSpec& data,
                                 int lattice_radius, const SynthesisOptions& opt) {
  if (lattice_radius < 1) throw Error(ErrorKind::parameter, "lattice radius must be at least 1");
  check_slab(slab);
  check_options(opt);
  if (!slab.symbol.is_radial()) {
    throw Error(ErrorKind::parameter, "synthesis needs a radial symbol");
  }
  const int d = slab.dim - 1;
  const auto counts = lattice_shell_counts(d, lattice_radius);
  std::vector<Node> nodes{{0.0, 1.0}};
  int points = 1;
  for (std::size_t q = 1; q < counts.size(); ++q) {
    if (!counts[q]) continue;
    points += static_cast<int>(counts[q]);
    const double x = std::sqrt(static_cast<double>(q));
    if (opt.group_moduli) {
      nodes.push_back({x, static_cast<double>(counts[q])});
    } else {
      for (long long k = 0; k < counts[q]; ++k) nodes.push_back({x, 1.0});
    }
  }
  double beyond = lattice_radius;
  if (opt.tail_radius > lattice_radius) {
    // lattice points per unit volume is 1: sum -> int sphere_area r^{d-1} dr
    const auto x = geometric_nodes(lattice_radius, opt.tail_radius, opt.nodes_per_decade);
    const double area = sphere_area(d);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double left = i > 0 ? x[i] - x[i - 1] : 0.0;
      const double right = i + 1 < x.size() ? x[i + 1] - x[i] : 0.0;
      nodes.push_back({x[i], 0.5 * (left + right) * area * std::pow(x[i], d - 1)});
    }
    beyond = opt.tail_radius;
  }
  const double cap = opt.pde_cap < 0.0 ? lattice_radius : opt.pde_cap;
  SynthesisResult res = assemble(slab, data, nodes, opt, cap);
  res.domain = "torus";
  res.lattice_points = points;
  res.tail_bound = tail_integral(slab, data, beyond, d);
  return res;
}

SynthesisResult synthesize_plane(const SlabParams& slab, const InitialDataSpec& data,
                                 const SynthesisOptions& opt) {
  check_slab(slab);
  check_options(opt);
  if (!slab.symbol.is_radial()) {
    throw Error(ErrorKind::parameter, "synthesis needs a radial symbol");
  }
  const int d = slab.dim - 1;
  const double lo = std::max(opt.plane_min_factor * opt.c0, data.inner_cutoff);
  const double hi = std::isfinite(data.cutoff) && data.cutoff < 1e300 ? data.cutoff : 1e3 * opt.c0;
  if (!(hi > lo)) throw Error(ErrorKind::parameter, "empty quadrature range");
  const auto x = geometric_nodes(lo, hi, opt.nodes_per_decade);
  const double area = sphere_area(d);
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double left = i > 0 ? x[i] - x[i - 1] : 0.0;
    // panel from 0 when the data reach down there: integrand vanishes at 0 for N >= 3,
    // and is held constant for N = 2
    if (i == 0 && data.inner_cutoff <= 0.0) left = d >= 2 ? x[0] : 2.0 * x[0];
    const double right = i + 1 < x.size() ? x[i + 1] - x[i] : 0.0;
    nodes.push_back({x[i], 0.5 * (left + right) * area * std::pow(x[i], d - 1)});
  }
  const double cap = opt.pde_cap < 0.0 ? opt.c0 : opt.pde_cap;
  SynthesisResult res = assemble(slab, data, nodes, opt, cap);
  res.domain = "plane";
  res.tail_bound = tail_integral(slab, data, hi, d);
  return res;
}

Law law_from_string(const std::string& name) {
  if (name == "exponential") return Law::exponential;
  if (name == "algebraic") return Law::algebraic;
  if (name == "stretched_exp") return Law::stretched_exp;
  if (name == "log_corrected_exp") return Law::log_corrected_exp;
  if (name == "auto") return Law::auto_select;
  throw Error(ErrorKind::config, "unknown decay law '" + name + "'");
}

namespace {

FitRecord linear_fit(const EnergyCurve& curve, double t0, double t1, double min_t,
                     const auto& transform) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    const double t = curve.times[i];
    if (t < t0 || t > t1 || !(t > min_t)) continue;
    if (!(curve.values[i] > 0.0)) {
      throw Error(ErrorKind::fit_domain, "nonpositive energy inside the fit window");
    }
    xs.push_back(transform(t));
    ys.push_back(std::log(curve.values[i]));
  }
  if (xs.size() < 10) throw Error(ErrorKind::fit_domain, "fewer than 10 samples in the fit window");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::fit_domain, "degenerate fit window");
  const double slope = sxy / sxx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (my + slope * (xs[i] - mx));
    sse += r * r;
  }
  FitRecord f;
  f.rate = -slope;
  f.quality = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.samples = static_cast<int>(xs.size());
  f.t0 = t0;
  f.t1 = t1;
  return f;
}

}  // namespace

FitRecord fit_decay_law(const EnergyCurve& curve, Law law, double alpha, double t0, double t1) {
  FitRecord f;
  switch (law) {
    case Law::exponential:
      f = linear_fit(curve, t0, t1, -1.0, [](double t) { return t; });
      f.law = "exponential";
      f.exponent = 1.0;
      return f;
    case Law::algebraic:
      f = linear_fit(curve, t0, t1, -1.0, [](double t) { return std::log1p(t); });
      f.law = "algebraic";
      f.exponent = f.rate;
      return f;
    case Law::stretched_exp: {
      const double g = 1.0 / (1.0 + alpha);
      f = linear_fit(curve, t0, t1, -1.0, [g](double t) { return std::pow(t, g); });
      f.law = "stretched_exp";
      f.alpha = alpha;
      f.exponent = g;
      return f;
    }
    case Law::log_corrected_exp:
      f = linear_fit(curve, t0, t1, 1.0,
                     [alpha](double t) { return t / std::pow(std::log(t), alpha); });
      f.law = "log_corrected_exp";
      f.alpha = alpha;
      f.exponent = 1.0;
      return f;
    case Law::auto_select: {
      FitRecord best;
      bool any = false;
      for (Law l : {Law::exponential, Law::algebraic, Law::stretched_exp, Law::log_corrected_exp}) {
        try {
          FitRecord c = fit_decay_law(curve, l, alpha, t0, t1);
          if (!any || c.quality > best.quality) best = c;
          any = true;
        } catch (const Error&) {
        }
      }
      if (!any) throw Error(ErrorKind::fit_domain, "no law could be fitted on the window");
      return best;
    }
  }
  return f;
}

FitRecord fit_stretched_free(const EnergyCurve& curve, double t0, double t1) {
  auto at = [&](double g) {
    return linear_fit(curve, t0, t1, -1.0, [g](double t) { return std::pow(t, g); });
  };
  double best_g = 0.05;
  FitRecord best = at(best_g);
  for (double g = 0.055; g <= 1.5 + 1e-12; g += 0.005) {
    FitRecord c = at(g);
    if (c.quality > best.quality) {
      best = c;
      best_g = g;
    }
  }
  // golden-section refinement around the grid optimum
  double a = std::max(0.05, best_g - 0.005), b = std::min(1.5, best_g + 0.005);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60 && b - a > 1e-9; ++it) {
    const double c = b - phi * (b - a), e = a + phi * (b - a);
    if (at(c).quality > at(e).quality) b = e; else a = c;
  }
  const double g = 0.5 * (a + b);
  FitRecord f = at(g);
  if (f.quality < best.quality) {
    f = best;
  } else {
    best_g = g;
  }
  f.law = "stretched_free";
  f.exponent = best_g;
  f.alpha = 1.0 / best_g - 1.0;
  return f;
}

std::string synthesis_to_csv(const SynthesisResult& r) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "t,E\n";
  for (std::size_t k = 0; k < r.curve.times.size(); ++k) {
    out << r.curve.times[k] << ',' << r.curve.values[k] << '\n';
  }
  return out.str();
}

std::string modes_to_csv(const SynthesisResult& r) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "xi_mod,mu,weight,engine,rate,envelope,E0,extrapolated_from\n";
  for (const auto& m : r.modes) {
    out << m.xi_mod << ',' << m.mu << ',' << m.weight << ',' << to_string(m.engine) << ','
        << m.rate << ',' << m.envelope << ',' << m.curve.values.front() << ','
        << m.curve.extrapolated_from << '\n';
  }
  return out.str();
}

}  // namespace slabdecay
