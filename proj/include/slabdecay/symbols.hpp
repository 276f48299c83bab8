#pragma once

#include <span>
#include <string>
#include <vector>

namespace slabdecay {

enum class Family { fractional, log_corrected, loglog_corrected, tabulated };

const char* to_string(Family family);
Family family_from_string(const std::string& name);

struct TableEntry {
  std::vector<double> freq;  // one entry: |xi|; otherwise a frequency vector
  double value = 0.0;
};

// Surface operator multiplier mu(xi). Radial for the built-in families.
struct Symbol {
  Family family = Family::fractional;
  double g = 1.0;
  double sigma = 1.0;
  double r = 0.0;
  double alpha = 1.0;
  double theta = 0.5;
  std::vector<TableEntry> table;

  bool is_radial() const;
  // |xi| below which the corrected families use g + 2 pi sigma |xi|.
  double stitch_radius() const;
};

struct SlabParams {
  double ell = 1.0;
  int dim = 3;
  Symbol symbol;
};

void check_symbol(const Symbol& sym);
void check_slab(const SlabParams& slab);

double eval_symbol(const Symbol& sym, std::span<const double> xi);
double eval_symbol_radial(const Symbol& sym, double xi_mod);

// Two-column (|xi|, mu) or (N-1)+1 column (xi..., mu) CSV, '#' comments and
// a non-numeric header line are skipped.
std::vector<TableEntry> load_table_csv(const std::string& path);

struct SymbolViolation {
  double xi_mod = 0.0;
  double mu = 0.0;
  bool lower = true;
};

struct ValidationReport {
  int evaluated = 0;
  int unavailable = 0;
  int lower_violations = 0;
  int upper_violations = 0;
  std::vector<SymbolViolation> first_violations;  // at most 16
  bool subcubic = false;
  double cubic_ratio_at_max = 0.0;
  bool passed() const { return lower_violations == 0 && upper_violations == 0; }
};

ValidationReport validate_symbol(const Symbol& sym, double xi_max, int samples);

}  // namespace slabdecay
