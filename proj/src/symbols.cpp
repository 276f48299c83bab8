#include "slabdecay/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "slabdecay/errors.hpp"

namespace slabdecay {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double norm(std::span<const double> xi) {
  double s = 0.0;
  for (double x : xi) s += x * x;
  return std::sqrt(s);
}

bool table_is_radial(const std::vector<TableEntry>& table) {
  return std::all_of(table.begin(), table.end(),
                     [](const TableEntry& e) { return e.freq.size() == 1; });
}

double radial_table_lookup(const std::vector<TableEntry>& table, double xi_mod) {
  // table is kept sorted by check_symbol callers; sort a copy of indices here
  // to stay independent of construction order.
  std::vector<std::pair<double, double>> pts;
  pts.reserve(table.size());
  for (const auto& e : table) pts.emplace_back(e.freq[0], e.value);
  std::sort(pts.begin(), pts.end());
  if (pts.empty() || xi_mod < pts.front().first || xi_mod > pts.back().first) {
    std::ostringstream msg;
    msg << "|xi| = " << xi_mod << " outside tabulated range";
    throw Error(ErrorKind::interpolation_unavailable, msg.str());
  }
  auto hi = std::lower_bound(pts.begin(), pts.end(), std::make_pair(xi_mod, -std::numeric_limits<double>::infinity()));
  if (hi->first == xi_mod) return hi->second;
  auto lo = hi - 1;
  double s = (xi_mod - lo->first) / (hi->first - lo->first);
  return lo->second + s * (hi->second - lo->second);
}

double vector_table_lookup(const std::vector<TableEntry>& table, std::span<const double> xi) {
  const std::size_t d = table.front().freq.size();
  if (xi.size() != d) {
    throw Error(ErrorKind::interpolation_unavailable,
                "frequency dimension does not match the table");
  }
  for (std::size_t k = 0; k < d; ++k) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& e : table) {
      lo = std::min(lo, e.freq[k]);
      hi = std::max(hi, e.freq[k]);
    }
    if (xi[k] < lo || xi[k] > hi) {
      throw Error(ErrorKind::interpolation_unavailable,
                  "frequency outside the table bounding box");
    }
  }
  // nearest neighbour, first entry wins ties
  double best = INFINITY;
  double value = 0.0;
  for (const auto& e : table) {
    double dist = 0.0;
    for (std::size_t k = 0; k < d; ++k) dist += (e.freq[k] - xi[k]) * (e.freq[k] - xi[k]);
    if (dist < best) {
      best = dist;
      value = e.value;
    }
  }
  return value;
}

}  // namespace

const char* to_string(Family family) {
  switch (family) {
    case Family::fractional: return "fractional";
    case Family::log_corrected: return "log_corrected";
    case Family::loglog_corrected: return "loglog_corrected";
    case Family::tabulated: return "tabulated";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  if (name == "fractional") return Family::fractional;
  if (name == "log_corrected") return Family::log_corrected;
  if (name == "loglog_corrected") return Family::loglog_corrected;
  if (name == "tabulated") return Family::tabulated;
  throw Error(ErrorKind::config, "unknown symbol family '" + name + "'");
}

bool Symbol::is_radial() const {
  return family != Family::tabulated || table_is_radial(table);
}

double Symbol::stitch_radius() const {
  switch (family) {
    case Family::log_corrected: return std::numbers::e;
    case Family::loglog_corrected: return std::exp(std::numbers::e);
    default: return 0.0;
  }
}

void check_symbol(const Symbol& sym) {
  if (!(sym.theta > 0.0)) throw Error(ErrorKind::parameter, "theta must be positive");
  if (sym.family == Family::tabulated) {
    if (sym.table.empty()) throw Error(ErrorKind::parameter, "tabulated symbol needs a table");
    const std::size_t d = sym.table.front().freq.size();
    for (const auto& e : sym.table) {
      if (e.freq.size() != d || d == 0) {
        throw Error(ErrorKind::parameter, "table rows must share one frequency dimension");
      }
    }
    return;
  }
  if (!(sym.g > 0.0)) throw Error(ErrorKind::parameter, "g must be positive");
  if (!(sym.sigma >= 0.0)) throw Error(ErrorKind::parameter, "sigma must be nonnegative");
  if (sym.family == Family::fractional && !(sym.r >= 0.0 && sym.r <= 1.0)) {
    throw Error(ErrorKind::parameter, "r must lie in [0,1]");
  }
  if (sym.family != Family::fractional && !(sym.alpha > 0.0)) {
    throw Error(ErrorKind::parameter, "alpha must be positive");
  }
}

void check_slab(const SlabParams& slab) {
  if (!(slab.ell > 0.0)) throw Error(ErrorKind::parameter, "ell must be positive");
  if (slab.dim < 2) throw Error(ErrorKind::parameter, "dim must be at least 2");
  check_symbol(slab.symbol);
}

double eval_symbol_radial(const Symbol& sym, double xi_mod) {
  if (!std::isfinite(xi_mod) || xi_mod < 0.0) {
    throw Error(ErrorKind::parameter, "|xi| must be finite and nonnegative");
  }
  switch (sym.family) {
    case Family::fractional:
      return sym.g + sym.sigma * std::pow(two_pi * xi_mod, 2.0 * sym.r);
    case Family::log_corrected:
      if (xi_mod <= std::numbers::e) return sym.g + two_pi * sym.sigma * xi_mod;
      return sym.g + two_pi * sym.sigma * xi_mod / std::pow(std::log(xi_mod), sym.alpha);
    case Family::loglog_corrected:
      if (xi_mod <= std::exp(std::numbers::e)) return sym.g + two_pi * sym.sigma * xi_mod;
      return sym.g +
             two_pi * sym.sigma * xi_mod / std::pow(std::log(std::log(xi_mod)), sym.alpha);
    case Family::tabulated:
      if (!table_is_radial(sym.table)) {
        throw Error(ErrorKind::interpolation_unavailable,
                    "vector-valued table needs a frequency vector");
      }
      return radial_table_lookup(sym.table, xi_mod);
  }
  return 0.0;
}

double eval_symbol(const Symbol& sym, std::span<const double> xi) {
  for (double x : xi) {
    if (!std::isfinite(x)) throw Error(ErrorKind::parameter, "xi must be finite");
  }
  if (sym.family == Family::tabulated && !table_is_radial(sym.table)) {
    return vector_table_lookup(sym.table, xi);
  }
  return eval_symbol_radial(sym, norm(xi));
}

std::vector<TableEntry> load_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot open symbol table '" + path + "'");
  std::vector<TableEntry> table;
  std::string line;
  std::size_t cols = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::vector<double> row;
    std::string tok;
    bool numeric = true;
    while (ss >> tok) {
      try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) numeric = false;
        row.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (table.empty()) continue;  // header
      throw Error(ErrorKind::config, "non-numeric row in '" + path + "'");
    }
    if (row.size() < 2) throw Error(ErrorKind::config, "table rows need at least two columns");
    if (cols == 0) cols = row.size();
    if (row.size() != cols) throw Error(ErrorKind::config, "ragged table '" + path + "'");
    TableEntry e;
    e.value = row.back();
    e.freq.assign(row.begin(), row.end() - 1);
    table.push_back(std::move(e));
  }
  if (table.empty()) throw Error(ErrorKind::config, "empty symbol table '" + path + "'");
  return table;
}

ValidationReport validate_symbol(const Symbol& sym, double xi_max, int samples) {
  ValidationReport rep;
  samples = std::max(samples, 1);
  auto record = [&](double xi_mod, double mu) {
    ++rep.evaluated;
    double upper = std::pow(1.0 + xi_mod, 3) / sym.theta;
    bool low = !(mu >= sym.theta);
    bool up = !(mu <= upper);
    if (low) ++rep.lower_violations;
    if (up) ++rep.upper_violations;
    if ((low || up) && rep.first_violations.size() < 16) {
      rep.first_violations.push_back({xi_mod, mu, low});
    }
  };

  if (sym.family == Family::tabulated && !table_is_radial(sym.table)) {
    for (const auto& e : sym.table) {
      double s = 0.0;
      for (double x : e.freq) s += x * x;
      double xi_mod = std::sqrt(s);
      if (xi_mod <= xi_max) record(xi_mod, eval_symbol(sym, e.freq));
    }
    return rep;
  }

  std::vector<double> radii;
  for (int k = 0; k <= samples; ++k) radii.push_back(xi_max * k / samples);
  double lo = std::min(1e-3, xi_max);
  for (int k = 0; k < samples; ++k) {
    radii.push_back(lo * std::pow(xi_max / lo, static_cast<double>(k) / samples));
  }
  if (sym.family == Family::tabulated) {
    for (const auto& e : sym.table) {
      if (e.freq[0] <= xi_max) radii.push_back(e.freq[0]);
    }
  }
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

  for (double x : radii) {
    try {
      record(x, eval_symbol_radial(sym, x));
    } catch (const Error&) {
      ++rep.unavailable;
    }
  }

  // sub-cubic growth: mu/|xi|^3 must drop by at least half across the top decade
  try {
    double q_top = eval_symbol_radial(sym, xi_max) / std::pow(xi_max, 3);
    double q_low = eval_symbol_radial(sym, 0.1 * xi_max) / std::pow(0.1 * xi_max, 3);
    rep.cubic_ratio_at_max = q_top;
    rep.subcubic = xi_max > 0.0 && q_top <= 0.5 * q_low;
  } catch (const Error&) {
    rep.subcubic = false;
  }
  return rep;
}

}  // namespace slabdecay
