// CLI contract checks: exit statuses and diagnostics. The full pipeline runs
// in the acceptance suite; these stay cheap.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "bdss/raster.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int status = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const fs::path dir = fs::temp_directory_path() / "bdss_cli_tests";
  fs::create_directories(dir);
  const fs::path log = dir / "out.log";
  const std::string cmd = std::string(BDSS_BIN) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.status = WEXITSTATUS(raw);
  std::ifstream in(log);
  r.output.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return r;
}

fs::path fixture_dir() {
  const fs::path dir = fs::temp_directory_path() / "bdss_cli_fixture";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("cli: no subcommand and unknown flags are usage errors") {
  CHECK(run_cli("").status == 2);
  CHECK(run_cli("--definitely-not-a-flag").status == 2);
  CHECK(run_cli("--help").status == 0);
}

TEST_CASE("cli: train mode flag is validated") {
  const auto r = run_cli("train --manifest nowhere.txt --out /tmp/bdss_cli_x --mode sideways");
  CHECK(r.status == 2);
  CHECK(r.output.find("sideways") != std::string::npos);
}

TEST_CASE("cli: missing manifest path names the path with status 2") {
  const auto dir = fixture_dir();
  const auto r = run_cli("train --manifest " + (dir / "missing_manifest.txt").string() +
                         " --out " + (dir / "out").string());
  CHECK(r.status == 2);
  CHECK(r.output.find("missing_manifest.txt") != std::string::npos);
}

TEST_CASE("cli: corrupt checkpoint magic is reported with status 2") {
  const auto dir = fixture_dir();
  const fs::path bad = dir / "bad.bdsm";
  {
    std::ofstream out(bad, std::ios::binary);
    out << "JUNKJUNKJUNK";
  }
  bdss::write_bdsr(oracle::synth_scene(16, 16, 1), (dir / "img.bdsr").string());
  const auto r = run_cli("despeckle --checkpoint " + bad.string() + " --in " +
                         (dir / "img.bdsr").string() + " --out " + (dir / "out2").string());
  CHECK(r.status == 2);
  CHECK(r.output.find("bad magic") != std::string::npos);
}

TEST_CASE("cli: simulate writes rasters, sidecar and config echo") {
  const auto dir = fixture_dir();
  const fs::path clean = dir / "clean";
  fs::create_directories(clean);
  bdss::write_pgm(oracle::synth_scene(32, 32, 2), (clean / "one.pgm").string());
  const fs::path out = dir / "sim_out";
  const auto r = run_cli("simulate --in " + clean.string() + " --out " + out.string() +
                         " --looks 4 --seed 11");
  REQUIRE(r.status == 0);
  CHECK(fs::exists(out / "one.bdsr"));
  CHECK(fs::exists(out / "resolved.cfg"));
  std::ifstream side(out / "speckle_sidecar.csv");
  std::string header, row;
  std::getline(side, header);
  std::getline(side, row);
  CHECK(header == "file,looks,seed");
  CHECK(row.find("one.bdsr,4,11") == 0);
}

TEST_CASE("cli: evaluate requires inputs for requested indexes") {
  const auto dir = fixture_dir();
  bdss::write_bdsr(oracle::synth_scene(24, 24, 3), (dir / "d.bdsr").string());
  const auto r = run_cli("evaluate --despeckled " + (dir / "d.bdsr").string() + " --out " +
                         (dir / "m.csv").string() + " --indexes enl");
  CHECK(r.status == 2);
  CHECK(r.output.find("enl") != std::string::npos);
  const auto r2 = run_cli("evaluate --despeckled " + (dir / "d.bdsr").string() + " --out " +
                          (dir / "m.csv").string());
  CHECK(r2.status == 2);  // nothing computable without --clean/--regions
}
