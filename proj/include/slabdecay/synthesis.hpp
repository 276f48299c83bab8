#pragma once

#include <string>
#include <vector>

#include "slabdecay/dispersion.hpp"
#include "slabdecay/stokes1d.hpp"
#include "slabdecay/symbols.hpp"

namespace slabdecay {

enum class DataFamily { sobolev_h, riesz_weighted, flat_spectrum };
enum class VelocityMode { zero, surface_matched };

const char* to_string(DataFamily f);
DataFamily data_family_from_string(const std::string& name);
const char* to_string(VelocityMode v);
VelocityMode velocity_mode_from_string(const std::string& name);

struct InitialDataSpec {
  DataFamily family = DataFamily::sobolev_h;
  double s = 2.0;
  double lambda = 2.0;
  double cutoff = 1e300;      // h_hat = 0 above this modulus
  double inner_cutoff = 0.0;  // and below this one (annulus data)
  VelocityMode velocity_mode = VelocityMode::zero;
  double epsilon = 0.5;        // Sobolev margin in (1+|xi|^2)^{-(2s+N-1+eps)/4}
  double riesz_margin = 0.05;  // |xi|^{lambda-(N-1)/2+margin} keeps I_lambda h finite
  double mean_flow = 0.0;      // torus xi = 0: w(y) = mean_flow sin(pi y / 2l)
};

// Surface-height transform at modulus |xi| in dimension N.
double initial_height(const InitialDataSpec& data, double xi_mod, int dim);

enum class Engine { pde, dispersion, asymptotic };
const char* to_string(Engine e);

struct SynthesisOptions {
  double T = 1e3;
  double t_min = 1.0;          // first nonzero sample time
  int samples_per_decade = 40;  // log-spaced samples on [t_min, T]
  int grid = 192;
  double dt_factor = 0.05;     // dt = dt_factor / max(|rho_est|, 1)
  double stop_ratio = 1e-14;
  double tail_fraction = 0.25;  // share of the run used for the exponential extension
  double pde_cap = -1.0;       // pde engine for moduli <= cap; < 0: lattice radius (torus), c0 (plane)
  double tail_radius = 0.0;    // torus: radial Weyl integral from the lattice radius up to here
  int nodes_per_decade = 24;
  double c0 = 1.0;
  double plane_min_factor = 1e-3;
  bool group_moduli = true;
  int jobs = 1;
  DispersionOptions dispersion;
};

struct ModeCurve {
  double xi_mod = 0.0;
  double mu = 0.0;
  double weight = 0.0;  // lattice multiplicity or quadrature weight (incl. the sphere measure)
  Engine engine = Engine::pde;
  EnergyCurve curve;    // on the common sample times
  double rate = 0.0;    // 2 Re rho (dispersion) or fitted rate of the run tail (pde)
  double envelope = 0.0;
  std::string note;
};

struct FitRecord {
  std::string law;     // exponential, algebraic, stretched_exp, log_corrected_exp, stretched_free
  double alpha = 0.0;  // law parameter
  double exponent = 0.0;  // algebraic power, stretched exponent, or 1 for the exponential laws
  double rate = 0.0;      // coefficient of the transformed time
  double quality = 0.0;   // R^2 of log E against the transformed time
  int samples = 0;
  double t0 = 0.0, t1 = 0.0;
};

struct SynthesisResult {
  std::string domain;  // torus or plane
  EnergyCurve curve;
  std::vector<ModeCurve> modes;  // ascending modulus
  FitRecord fit;
  double tail_bound = 0.0;   // initial energy outside the summed range
  double split_c0 = 0.0;
  double low_energy = 0.0;   // E(0) contributions below / above c0
  double high_energy = 0.0;
  int lattice_points = 0;
  int pde_modes = 0, dispersion_modes = 0, asymptotic_modes = 0;
};

std::vector<double> sample_times(const SynthesisOptions& opt);

// Number of lattice points of Z^d on each sphere |xi|^2 = q, q = 0..radius^2.
std::vector<long long> lattice_shell_counts(int d, int radius);

SynthesisResult synthesize_torus(const SlabParams& slab, const InitialDataSpec& data,
                                 int lattice_radius, const SynthesisOptions& opt = {});
SynthesisResult synthesize_plane(const SlabParams& slab, const InitialDataSpec& data,
                                 const SynthesisOptions& opt = {});

// Energy curve of one modulus on the given sample times (times[0] must be 0).
ModeCurve mode_energy(const SlabParams& slab, const InitialDataSpec& data, double xi_mod,
                      const std::vector<double>& times, const SynthesisOptions& opt,
                      double pde_cap);

enum class Law { exponential, algebraic, stretched_exp, log_corrected_exp, auto_select };
Law law_from_string(const std::string& name);

FitRecord fit_decay_law(const EnergyCurve& curve, Law law, double alpha, double t0, double t1);
// Stretched exponential with the exponent fitted too (best R^2 over gamma in [0.05, 1.5]).
FitRecord fit_stretched_free(const EnergyCurve& curve, double t0, double t1);

double theoretical_envelope(const SlabParams& slab, double xi_mod);

std::string synthesis_to_csv(const SynthesisResult& r);
std::string modes_to_csv(const SynthesisResult& r);

}  // namespace slabdecay
