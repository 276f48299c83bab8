#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const fs::path p = fs::temp_directory_path() / "slabdecay_cli_test";
  fs::create_directories(p);
  return p;
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << body;
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(SLABDECAY_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  int rows = -1;  // header
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') ++rows;
  }
  return rows;
}

}  // namespace

TEST_CASE("dispersion run writes one row per modulus and is reproducible") {
  const fs::path cfg = write_config(
      "disp.json", R"({"symbol": {"r": 0.5}, "dispersion": {"moduli": [0.001, 0.01, 0.1, 0.5, 1, 4, 8, 64]}})");
  const fs::path out = scratch() / "disp_out";
  fs::remove_all(out);
  REQUIRE(run("dispersion --config " + cfg.string() + " --out " + out.string()) == 0);
  const std::string first = slurp(out / "dispersion.csv");
  CHECK(data_rows(first) == 8);
  CHECK(first.find("# content_sha256: ") != std::string::npos);
  const std::string summary = slurp(out / "dispersion_summary.json");
  REQUIRE(run("dispersion --config " + cfg.string() + " --out " + out.string()) == 0);
  CHECK(slurp(out / "dispersion.csv") == first);
  CHECK(slurp(out / "dispersion_summary.json") == summary);
}

TEST_CASE("configuration errors exit with 2") {
  const fs::path bad_key = write_config("bad_key.json", R"({"slab": {"ell": 1, "bogus": 3}})");
  CHECK(run("dispersion --config " + bad_key.string()) == 2);
  const fs::path zero_dt = write_config("zero_dt.json", R"({"evolve": {"dt": 0}})");
  CHECK(run("evolve --config " + zero_dt.string()) == 2);
  const fs::path bad_json = write_config("bad_json.json", R"({"slab": )");
  CHECK(run("dispersion --config " + bad_json.string()) == 2);
  const fs::path bad_r = write_config("bad_r.json", R"({"symbol": {"r": 2}})");
  CHECK(run("dispersion --config " + bad_r.string()) == 2);
  CHECK(run("dispersion --config " + (scratch() / "missing.json").string()) == 2);
  CHECK(run("no_such_command") == 2);
}

TEST_CASE("verify reports failures with exit 1") {
  const fs::path out = scratch() / "verify_out";
  const fs::path ok = write_config("verify_ok.json", R"({"verify": {"only": [1, 12]}})");
  CHECK(run("verify --config " + ok.string() + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "acceptance.json"));
  const fs::path flipped =
      write_config("verify_flip.json", R"({"verify": {"only": [1], "flip_gamma43": true}})");
  CHECK(run("verify --config " + flipped.string() + " --out " + out.string()) == 1);
}

TEST_CASE("evolve writes the trajectory and summary") {
  const fs::path cfg = write_config(
      "evolve.json", R"({"symbol": {"r": 0}, "evolve": {"xi_mod": 1, "T": 2, "grid": 32, "fit_t0": 0.5}})");
  const fs::path out = scratch() / "evolve_out";
  fs::remove_all(out);
  REQUIRE(run("evolve --config " + cfg.string() + " --out " + out.string()) == 0);
  CHECK(data_rows(slurp(out / "evolve.csv")) > 10);
  CHECK(slurp(out / "evolve_summary.json").find("\"dispersion_check\"") != std::string::npos);
}
