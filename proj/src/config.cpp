#include "slabdecay/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "slabdecay/errors.hpp"

namespace slabdecay {

namespace {

using json = nlohmann::json;
using Setter = std::function<void(const json&, const std::string&)>;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::config, path + ": " + what);
}

void read_object(const json& j, const std::string& path, const std::map<std::string, Setter>& keys) {
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto k = keys.find(it.key());
    const std::string sub = path.empty() ? it.key() : path + "." + it.key();
    if (k == keys.end()) fail(sub, "unknown key");
    k->second(it.value(), sub);
  }
}

Setter number(double& out) {
  return [&out](const json& v, const std::string& p) {
    if (!v.is_number()) fail(p, "expected a number");
    out = v.get<double>();
  };
}

Setter integer(int& out) {
  return [&out](const json& v, const std::string& p) {
    if (!v.is_number_integer()) fail(p, "expected an integer");
    out = v.get<int>();
  };
}

Setter boolean(bool& out) {
  return [&out](const json& v, const std::string& p) {
    if (!v.is_boolean()) fail(p, "expected true or false");
    out = v.get<bool>();
  };
}

Setter text(std::string& out) {
  return [&out](const json& v, const std::string& p) {
    if (!v.is_string()) fail(p, "expected a string");
    out = v.get<std::string>();
  };
}

template <class T, class Parse>
Setter named(T& out, Parse parse) {
  return [&out, parse](const json& v, const std::string& p) {
    if (!v.is_string()) fail(p, "expected a string");
    try {
      out = parse(v.get<std::string>());
    } catch (const Error& e) {
      fail(p, e.what());
    }
  };
}

void read_symbol(const json& j, const std::string& path, RunConfig& cfg) {
  Symbol& s = cfg.slab.symbol;
  read_object(j, path,
              {{"family", named(s.family, family_from_string)},
               {"g", number(s.g)},
               {"sigma", number(s.sigma)},
               {"r", number(s.r)},
               {"alpha", number(s.alpha)},
               {"theta", number(s.theta)},
               {"table_file", text(cfg.table_file)}});
}

void read_data(const json& j, const std::string& path, InitialDataSpec& d) {
  read_object(j, path,
              {{"family", named(d.family, data_family_from_string)},
               {"s", number(d.s)},
               {"lambda", number(d.lambda)},
               {"cutoff", number(d.cutoff)},
               {"inner_cutoff", number(d.inner_cutoff)},
               {"velocity_mode", named(d.velocity_mode, velocity_mode_from_string)},
               {"epsilon", number(d.epsilon)},
               {"riesz_margin", number(d.riesz_margin)},
               {"mean_flow", number(d.mean_flow)}});
}

void read_synthesis(const json& j, const std::string& path, SynthesisBlock& b) {
  SynthesisOptions& o = b.options;
  read_object(
      j, path,
      {{"domain", text(b.domain)},
       {"lattice_radius", integer(b.lattice_radius)},
       {"data", [&b](const json& v, const std::string& p) { read_data(v, p, b.data); }},
       {"T", number(o.T)},
       {"t_min", number(o.t_min)},
       {"samples_per_decade", integer(o.samples_per_decade)},
       {"grid", integer(o.grid)},
       {"dt_factor", number(o.dt_factor)},
       {"stop_ratio", number(o.stop_ratio)},
       {"tail_fraction", number(o.tail_fraction)},
       {"pde_cap", number(o.pde_cap)},
       {"tail_radius", number(o.tail_radius)},
       {"nodes_per_decade", integer(o.nodes_per_decade)},
       {"c0", number(o.c0)},
       {"plane_min_factor", number(o.plane_min_factor)},
       {"group_moduli", boolean(o.group_moduli)},
       {"fit", [&b](const json& v, const std::string& p) {
          read_object(v, p,
                      {{"law", text(b.fit.law)},
                       {"alpha", number(b.fit.alpha)},
                       {"t0", number(b.fit.t0)},
                       {"t1", number(b.fit.t1)}});
        }}});
  if (b.domain != "torus" && b.domain != "plane") fail(path + ".domain", "expected torus or plane");
  (void)law_from_string(b.fit.law);
}

void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& p, const std::string& what) {
    if (!ok) fail(p, what);
  };
  need(c.slab.ell > 0.0, "slab.ell", "must be positive");
  need(c.slab.dim >= 2, "slab.dim", "must be at least 2");
  need(c.evolve.T >= 0.0, "evolve.T", "must be nonnegative");
  need(c.evolve.grid >= 8, "evolve.grid", "must be at least 8");
  need(c.evolve.xi_mod >= 0.0, "evolve.xi_mod", "must be nonnegative");
  need(c.sweep.count >= 1, "sweep.count", "must be positive");
  need(c.sweep.xi_min > 0.0 && c.sweep.xi_max >= c.sweep.xi_min, "sweep", "need 0 < xi_min <= xi_max");
  need(!c.dispersion.moduli.empty(), "dispersion.moduli", "must not be empty");
  for (double x : c.dispersion.moduli) need(x > 0.0, "dispersion.moduli", "must be positive");
  need(c.synthesis.lattice_radius >= 1, "synthesis.lattice_radius", "must be at least 1");
  need(c.jobs >= 1, "jobs", "must be positive");
  for (int id : c.verify.only) need(id >= 1 && id <= 12, "verify.only", "criteria are numbered 1..12");
}

}  // namespace

RunConfig parse_config(const std::string& text_in) {
  json j;
  try {
    j = json::parse(text_in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, std::string("invalid JSON: ") + e.what());
  }
  RunConfig cfg;
  std::uint64_t seed = cfg.seed;
  read_object(
      j, "",
      {{"slab", [&cfg](const json& v, const std::string& p) {
          read_object(v, p, {{"ell", number(cfg.slab.ell)}, {"dim", integer(cfg.slab.dim)}});
        }},
       {"symbol", [&cfg](const json& v, const std::string& p) { read_symbol(v, p, cfg); }},
       {"tolerances", [&cfg](const json& v, const std::string& p) {
          DispersionOptions& t = cfg.tolerances;
          read_object(v, p,
                      {{"bisect_rel_tol", number(t.bisect_rel_tol)},
                       {"bisect_max_iter", integer(t.bisect_max_iter)},
                       {"newton_tol", number(t.newton_tol)},
                       {"newton_max_iter", integer(t.newton_max_iter)},
                       {"crossover", number(t.crossover)},
                       {"low_freq_max_xi", number(t.low_freq_max_xi)},
                       {"scan_points", integer(t.scan_points)},
                       {"null_tol", number(t.null_tol)}});
        }},
       {"dispersion", [&cfg](const json& v, const std::string& p) {
          read_object(v, p, {{"moduli", [&cfg](const json& a, const std::string& q) {
                                if (!a.is_array()) fail(q, "expected an array of numbers");
                                cfg.dispersion.moduli.clear();
                                for (const auto& x : a) {
                                  if (!x.is_number()) fail(q, "expected an array of numbers");
                                  cfg.dispersion.moduli.push_back(x.get<double>());
                                }
                              }}});
        }},
       {"sweep", [&cfg](const json& v, const std::string& p) {
          read_object(v, p,
                      {{"xi_min", number(cfg.sweep.xi_min)},
                       {"xi_max", number(cfg.sweep.xi_max)},
                       {"count", integer(cfg.sweep.count)}});
        }},
       {"evolve", [&cfg](const json& v, const std::string& p) {
          EvolveBlock& e = cfg.evolve;
          read_object(v, p,
                      {{"xi_mod", number(e.xi_mod)},
                       {"T", number(e.T)},
                       {"dt", [&e](const json& d, const std::string& q) {
                          if (d.is_string() && d.get<std::string>() == "auto") {
                            e.dt = 0.0;
                            return;
                          }
                          if (!d.is_number() || !(d.get<double>() > 0.0)) fail(q, "expected a positive number or \"auto\"");
                          e.dt = d.get<double>();
                        }},
                       {"grid", integer(e.grid)},
                       {"h0", number(e.h0)},
                       {"w_amplitude", number(e.w_amplitude)},
                       {"startup_half_steps", integer(e.startup_half_steps)},
                       {"c_beta", number(e.c_beta)},
                       {"fit_t0", number(e.fit_t0)},
                       {"fit_t1", number(e.fit_t1)}});
        }},
       {"synthesis", [&cfg](const json& v, const std::string& p) { read_synthesis(v, p, cfg.synthesis); }},
       {"verify", [&cfg](const json& v, const std::string& p) {
          read_object(v, p,
                      {{"flip_gamma43", boolean(cfg.verify.flip_gamma43)},
                       {"truncate_T", number(cfg.verify.truncate_T)},
                       {"only", [&cfg](const json& a, const std::string& q) {
                          if (!a.is_array()) fail(q, "expected an array of integers");
                          for (const auto& x : a) {
                            if (!x.is_number_integer()) fail(q, "expected an array of integers");
                            cfg.verify.only.push_back(x.get<int>());
                          }
                        }}});
        }},
       {"seed", [&seed](const json& v, const std::string& p) {
          if (!v.is_number_unsigned()) fail(p, "expected a nonnegative integer");
          seed = v.get<std::uint64_t>();
        }},
       {"output_dir", text(cfg.output_dir)},
       {"jobs", integer(cfg.jobs)}});
  cfg.seed = seed;
  validate(cfg);
  if (!cfg.table_file.empty()) {
    try {
      cfg.slab.symbol.table = load_table_csv(cfg.table_file);
    } catch (const Error& e) {
      fail("symbol.table_file", e.what());
    }
  }
  try {
    check_slab(cfg.slab);
  } catch (const Error& e) {
    fail("symbol", e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::config, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ojson config_to_json(const RunConfig& c) {
  const Symbol& s = c.slab.symbol;
  const SynthesisOptions& o = c.synthesis.options;
  const InitialDataSpec& d = c.synthesis.data;
  ojson j;
  j["slab"] = {{"ell", c.slab.ell}, {"dim", c.slab.dim}};
  j["symbol"] = {{"family", to_string(s.family)}, {"g", s.g},         {"sigma", s.sigma},
                 {"r", s.r},                      {"alpha", s.alpha}, {"theta", s.theta},
                 {"table_file", c.table_file}};
  const DispersionOptions& t = c.tolerances;
  j["tolerances"] = {{"bisect_rel_tol", t.bisect_rel_tol},   {"bisect_max_iter", t.bisect_max_iter},
                     {"newton_tol", t.newton_tol},           {"newton_max_iter", t.newton_max_iter},
                     {"crossover", t.crossover},             {"low_freq_max_xi", t.low_freq_max_xi},
                     {"scan_points", t.scan_points},         {"null_tol", t.null_tol}};
  j["dispersion"] = {{"moduli", c.dispersion.moduli}};
  j["sweep"] = {{"xi_min", c.sweep.xi_min}, {"xi_max", c.sweep.xi_max}, {"count", c.sweep.count}};
  const EvolveBlock& e = c.evolve;
  j["evolve"] = {{"xi_mod", e.xi_mod},
                 {"T", e.T},
                 {"dt", e.dt > 0.0 ? ojson(e.dt) : ojson("auto")},
                 {"grid", e.grid},
                 {"h0", e.h0},
                 {"w_amplitude", e.w_amplitude},
                 {"startup_half_steps", e.startup_half_steps},
                 {"c_beta", e.c_beta},
                 {"fit_t0", e.fit_t0},
                 {"fit_t1", e.fit_t1}};
  ojson data = {{"family", to_string(d.family)},
                {"s", d.s},
                {"lambda", d.lambda},
                {"cutoff", d.cutoff},
                {"inner_cutoff", d.inner_cutoff},
                {"velocity_mode", to_string(d.velocity_mode)},
                {"epsilon", d.epsilon},
                {"riesz_margin", d.riesz_margin},
                {"mean_flow", d.mean_flow}};
  j["synthesis"] = {{"domain", c.synthesis.domain},
                    {"lattice_radius", c.synthesis.lattice_radius},
                    {"data", data},
                    {"T", o.T},
                    {"t_min", o.t_min},
                    {"samples_per_decade", o.samples_per_decade},
                    {"grid", o.grid},
                    {"dt_factor", o.dt_factor},
                    {"stop_ratio", o.stop_ratio},
                    {"tail_fraction", o.tail_fraction},
                    {"pde_cap", o.pde_cap},
                    {"tail_radius", o.tail_radius},
                    {"nodes_per_decade", o.nodes_per_decade},
                    {"c0", o.c0},
                    {"plane_min_factor", o.plane_min_factor},
                    {"group_moduli", o.group_moduli},
                    {"fit",
                     {{"law", c.synthesis.fit.law},
                      {"alpha", c.synthesis.fit.alpha},
                      {"t0", c.synthesis.fit.t0},
                      {"t1", c.synthesis.fit.t1}}}};
  j["verify"] = {{"flip_gamma43", c.verify.flip_gamma43},
                 {"truncate_T", c.verify.truncate_T},
                 {"only", c.verify.only}};
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["jobs"] = c.jobs;
  return j;
}

}  // namespace slabdecay
