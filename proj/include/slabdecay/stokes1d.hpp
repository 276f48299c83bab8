#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "slabdecay/symbols.hpp"

namespace slabdecay {

using cplx = std::complex<double>;

struct Grid1D {
  int n_cells = 256;
  double ell = 1.0;

  Grid1D() = default;
  Grid1D(int n, double l);
  double dy() const { return ell / n_cells; }
  double node(int j) const { return ell * j / n_cells; }
  double mid(int j) const { return ell * (j + 0.5) / n_cells; }
};

// Longitudinal mode: w, v at nodes 0..n, p at cell midpoints 0..n-1.
struct ModeState {
  std::vector<cplx> w, v, p;
  cplx h = 0.0;
  double t = 0.0;

  static ModeState zero(const Grid1D& grid);
  // default rate-measurement data: u = 0, h = 1
  static ModeState surface(const Grid1D& grid, cplx h0 = 1.0);
  int n_cells() const { return static_cast<int>(p.size()); }
};

struct EnergyCurve {
  std::vector<double> times;
  std::vector<double> values;
  double xi_mod = 0.0;
  double mu = 0.0;
  double dt = 0.0;
  int n_cells = 0;
  std::string symbol;
  std::string kind = "energy";
  double extrapolated_from = -1.0;  // first time taken from an exponential tail, or -1
};

struct EvolveOptions {
  int startup_half_steps = 4;  // backward-Euler half steps replacing the first CN steps
  double c_beta = 1e-2;
  bool record_lyapunov = true;
  double stop_ratio = 0.0;  // stop once E < stop_ratio * E(0); 0 disables
  int sample_every = 1;
};

struct EvolveResult {
  EnergyCurve energy;
  std::vector<double> dissipation;      // D at each sampled state
  std::vector<double> dissipation_mid;  // D at the step-averaged state, one per step
  std::vector<double> lyapunov;
  ModeState final_state;
  double max_divergence_residual = 0.0;
  bool projected = false;
  double projection_change = 0.0;
  int steps = 0;
};

// Trapezoid (lumped) energy 1/2 int |w|^2 + |v|^2 + mu/2 |h|^2.
double energy_xi(const ModeState& s, double ell, double mu);
// 1/2 int 16 pi^2|xi|^2 |w|^2 + 4|v'|^2 + 2|2 pi |xi| v + w'|^2, exact for P1 fields.
double dissipation_xi(const ModeState& s, double ell, double xi_mod);
double lyapunov_xi(const ModeState& s, double ell, double xi_mod, double mu, double c_beta);
// Test profile (w component, v component) of the Lyapunov cross term.
std::pair<double, double> lyapunov_profile(double y, double ell, double xi_mod);

// max over cells of |discrete divergence| relative to the cell's term sizes
double divergence_residual(const ModeState& s, double ell, double xi_mod);

// L2-orthogonal (lumped) projection of u onto discretely divergence-free fields.
ModeState project_divergence_free(const ModeState& s, double ell, double xi_mod,
                                  double* change = nullptr);

EvolveResult evolve(const SlabParams& slab, double xi_mod, const ModeState& initial, double T,
                    double dt, const EvolveOptions& opt = {});

// Decoupled transverse component: w_t + 4 pi^2|xi|^2 w - w'' = 0, w(0)=0, w'(l)=0.
EnergyCurve evolve_transverse(double ell, double xi_mod, const std::vector<cplx>& w0, double T,
                              double dt, int startup_half_steps = 4);

struct RateFit {
  double rate = 0.0;
  double quality = 0.0;
  int samples = 0;
};

// Least-squares slope of -log E against t on [t0, t1].
RateFit fit_decay_rate(const EnergyCurve& curve, double t0, double t1);

struct InequalityReport {
  int trials = 0;
  double xi_mod = 0.0;
  int trace_violations = 0;
  double trace_worst_ratio = 0.0;  // phi(l)^2 (1+|xi|) / ((1+l) ||phi||_H^2)
  int poincare_violations = 0;
  double poincare_worst = 0.0;     // (1+|xi|) ||phi|| / ||phi||_H
  double poincare_constant = 0.0;  // sup_x (1+x)/sqrt((pi/2l)^2 + 4 pi^2 x^2)
  double korn_constant = 0.0;      // max ||grad u||^2 / ||D u||^2 seen
  double linear_trace_factor = 0.0;  // bound / actual for phi = y
};

InequalityReport discrete_inequality_suite(const Grid1D& grid, double xi_mod, int trials,
                                           std::uint64_t seed);

// Stable-decay snapshots
std::string state_to_json(const ModeState& s, double ell, double xi_mod, double mu);
std::string evolve_to_csv(const EvolveResult& r);

}  // namespace slabdecay
