#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slabdecay/dispersion.hpp"
#include "slabdecay/symbols.hpp"
#include "slabdecay/synthesis.hpp"

namespace slabdecay {

using ojson = nlohmann::ordered_json;

struct DispersionBlock {
  std::vector<double> moduli{0.001, 0.01, 0.1, 1.0, 8.0, 64.0};
};

struct SweepBlock {
  double xi_min = 1e-3;
  double xi_max = 1e3;
  int count = 25;
};

struct EvolveBlock {
  double xi_mod = 8.0;
  double T = 10.0;
  double dt = 0.0;  // 0 ("auto" in JSON): 0.05 / max(|rho_est|, 1)
  int grid = 256;
  double h0 = 1.0;
  double w_amplitude = 0.0;  // adds w(y) = a sin(pi y / 2l); the only source at xi = 0
  int startup_half_steps = 4;
  double c_beta = 1e-2;
  double fit_t0 = 1.0;
  double fit_t1 = 0.0;  // 0: T
};

struct FitBlock {
  std::string law = "auto";
  double alpha = 1.0;
  double t0 = 1.0;
  double t1 = 1e3;
};

struct SynthesisBlock {
  std::string domain = "torus";
  int lattice_radius = 12;
  InitialDataSpec data;
  SynthesisOptions options;
  FitBlock fit;
};

struct VerifyBlock {
  bool flip_gamma43 = false;
  double truncate_T = 0.0;  // > 0: run the long-time criteria only up to this time
  std::vector<int> only;    // empty: all criteria
};

struct RunConfig {
  SlabParams slab;
  std::string table_file;
  DispersionOptions tolerances;
  DispersionBlock dispersion;
  SweepBlock sweep;
  EvolveBlock evolve;
  SynthesisBlock synthesis;
  VerifyBlock verify;
  std::uint64_t seed = 12345;
  std::string output_dir = "out";
  int jobs = 1;
};

// Parses a JSON document; unknown keys and ill-typed values raise config errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// Fully resolved configuration, every default included.
ojson config_to_json(const RunConfig& cfg);

}  // namespace slabdecay
