#include "slabdecay/report.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "slabdecay/errors.hpp"

namespace slabdecay {

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::parameter, "sha256 failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return out.str();
}

std::string stamp_csv(const ojson& config, const std::string& body) {
  return "# config: " + config.dump() + "\n# content_sha256: " + sha256_hex(body) + "\n" + body;
}

std::string stamp_json(const ojson& config, const ojson& result) {
  ojson j;
  j["config"] = config;
  j["content_sha256"] = sha256_hex(result.dump());
  j["result"] = result;
  return j.dump(2) + "\n";
}

void write_output(const std::string& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::config, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorKind::config, "write failed for '" + path.string() + "'");
}

ojson to_json(const FitRecord& f) {
  return {{"law", f.law},         {"alpha", f.alpha},     {"exponent", f.exponent},
          {"rate", f.rate},       {"quality", f.quality}, {"samples", f.samples},
          {"t0", f.t0},           {"t1", f.t1}};
}

ojson to_json(const RateFit& f) {
  return {{"rate", f.rate}, {"quality", f.quality}, {"samples", f.samples}};
}

ojson to_json(const DispersionResult& r) {
  ojson j = {{"method", r.method},
             {"rho_re", r.rho.real()},
             {"rho_im", r.rho.imag()},
             {"kappa_re", r.kappa.real()},
             {"kappa_im", r.kappa.imag()},
             {"det_residual", r.det_residual},
             {"null_residual", r.null_residual},
             {"iterations", r.iterations}};
  if (r.bracket) j["bracket"] = {r.bracket->first, r.bracket->second};
  return j;
}

ojson to_json(const SynthesisResult& r) {
  ojson modes = ojson::array();
  for (const auto& m : r.modes) {
    modes.push_back({{"xi_mod", m.xi_mod},
                     {"mu", m.mu},
                     {"weight", m.weight},
                     {"engine", to_string(m.engine)},
                     {"rate", m.rate},
                     {"envelope", m.envelope},
                     {"E0", m.curve.values.front()},
                     {"extrapolated_from", m.curve.extrapolated_from},
                     {"note", m.note}});
  }
  return {{"domain", r.domain},
          {"fit", to_json(r.fit)},
          {"tail_bound", r.tail_bound},
          {"split_c0", r.split_c0},
          {"low_energy", r.low_energy},
          {"high_energy", r.high_energy},
          {"lattice_points", r.lattice_points},
          {"engines",
           {{"pde", r.pde_modes}, {"dispersion", r.dispersion_modes}, {"asymptotic", r.asymptotic_modes}}},
          {"extrapolated_from", r.curve.extrapolated_from},
          {"modes", modes}};
}

}  // namespace slabdecay
