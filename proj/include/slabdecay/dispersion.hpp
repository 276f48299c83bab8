#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "slabdecay/symbols.hpp"

namespace slabdecay {

using cplx = std::complex<double>;
using Vec4c = Eigen::Vector4cd;
using Mat4c = Eigen::Matrix4cd;

// Column-scaled 4x4 solvability matrix of the separable ansatz e^{-rho t}.
// Column j carries the factor scaling[j] = exp(-max(0, Re a_j) ell).
struct DispersionMatrix {
  Mat4c entries;
  std::array<double, 4> scaling{};
  std::array<cplx, 4> a{};  // exponents a1..a4
  cplx rho;
  double xi_mod = 0.0;
  double mu = 0.0;
  double ell = 0.0;
};

struct DispersionOptions {
  double bisect_rel_tol = 1e-12;
  int bisect_max_iter = 200;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  double crossover = 1.0;        // low-frequency continuation below this |xi|
  double low_freq_max_xi = 1.0;  // Newton-from-seed radius
  int scan_points = 512;
  double null_tol = 1e-6;        // sigma_min/sigma_max above this: not a root
};

struct DispersionResult {
  cplx rho;
  cplx kappa;  // rho = 4 pi^2 kappa |xi|^2 for low-frequency roots, rho |xi|/mu otherwise
  std::optional<std::pair<double, double>> bracket;
  double det_residual = 0.0;  // |det| / Hadamard bound of the column-differenced matrix
  Vec4c null_vector = Vec4c::Zero();     // in scaled-column coordinates, unit norm
  Vec4c reduced_vector = Vec4c::Zero();  // same direction in differenced coordinates
  double null_residual = 0.0;            // ||A v|| / ||A|| for the scaled matrix
  int iterations = 0;
  std::string method;
};

std::array<cplx, 4> dispersion_exponents(cplx rho, double xi_mod);

DispersionMatrix build_matrix(cplx rho, double xi_mod, double mu, double ell);

// Determinant of the scaled matrix, evaluated through the column-differenced
// form C3-C1, C4-C2 so that nearly equal columns do not cancel.
cplx det_dispersion(cplx rho, double xi_mod, double mu, double ell);

// Same determinant with the columns differenced, returned unscaled by the
// phase factor; Hadamard bound of that matrix in *scale.
cplx det_reduced(cplx rho, double xi_mod, double mu, double ell, double* scale);

// Unscaled determinant det(entries) / prod(scaling); overflows for large |xi|.
cplx det_unscaled(cplx rho, double xi_mod, double mu, double ell);

DispersionResult find_high_freq_root(double xi_mod, double mu, double ell,
                                     const DispersionOptions& opt = {});
DispersionResult find_low_freq_root(double xi_mod, const SlabParams& slab,
                                    const DispersionOptions& opt = {});
// Sign-change search on a rho grid in (0, 4 pi^2 |xi|^2), then bisection.
DispersionResult find_scan_root(double xi_mod, double mu, double ell,
                                const DispersionOptions& opt = {});

// Smallest right singular vector of a generic 4x4 matrix (columns equilibrated).
Vec4c null_vector(const Mat4c& m, double tol = 1e-6);
Vec4c null_vector(const DispersionMatrix& mat, double tol = 1e-6);

struct ModeProfile {
  std::vector<double> y;
  std::vector<cplx> v, w, p;
  cplx h;
  std::array<cplx, 4> a{};
  std::array<cplx, 4> coeff_v{}, coeff_w{}, coeff_p{};  // scaled: term j is coeff * e^{a_j y - max(0,Re a_j) ell}
  double bulk_residual = 0.0;                // relative to the profile scale
  std::array<double, 5> boundary_residual{};  // v(0), w(0), tangential, normal, kinematic
  double profile_scale = 0.0;
};

ModeProfile reconstruct_mode(const DispersionResult& result, double xi_mod, double mu,
                             double ell, int grid_size);

// Stable point evaluation of the mode velocity (w, v) and pressure at depth y.
struct ModePoint {
  cplx w, v, p;
};
ModePoint eval_mode(const DispersionResult& result, double xi_mod, double mu, double ell,
                    double y);
cplx mode_surface_height(const DispersionResult& result, double xi_mod, double mu,
                         double ell);

// Integrals of the mode velocity over (0, l): int |w|^2+|v|^2 and the bilinear
// int w^2+v^2, by Gauss-Legendre panels graded toward both boundary layers.
struct ModeNorms {
  double l2 = 0.0;
  cplx bilinear;
  cplx h;
};
ModeNorms mode_norms(const DispersionResult& result, double xi_mod, double mu, double ell);

struct SweepRow {
  double xi_mod = 0.0;
  double mu = 0.0;
  std::string method;
  DispersionResult result;
  std::string error;
};

std::vector<SweepRow> sweep_dispersion(const SlabParams& slab, const std::vector<double>& xi_list,
                                       const DispersionOptions& opt = {}, int jobs = 1);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

// Largeness condition for the high-frequency bracket.
bool high_freq_precondition(double xi_mod, double mu);
std::pair<double, double> high_freq_bracket(double xi_mod, double mu);

namespace testing {
// Mutation hook: flips the sign of the rho-term in Gamma43 when set.
void set_flip_gamma43(bool on);
bool flip_gamma43();
}  // namespace testing

}  // namespace slabdecay
