#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

// Smoke tests driving the installed binary end to end.

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(FRBCSEL_BIN) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::filesystem::path tmp(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("generate writes a loadable csv") {
  const auto out = tmp("frbc_cli_gen.csv");
  std::filesystem::remove(out);
  CHECK(run("generate synthetic1 --seed 3 --out " + out.string()) == 0);
  CHECK(std::filesystem::exists(out));
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x1,x2,x3,x4,x5,x6,y");
  std::filesystem::remove(out);
}

TEST_CASE("train runs on a generated csv and writes a report") {
  const auto data = tmp("frbc_cli_data.csv");
  const auto report = tmp("frbc_cli_report.json");
  std::filesystem::remove(report);
  REQUIRE(run("generate synthetic1 --seed 4 --out " + data.string()) == 0);
  CHECK(run("train --data " + data.string() +
            " --granularity class --c1 4 --spread-floor 0.16 --sigma-init 0.05 --iters 300"
            " --seed 4 --out-report " + report.string()) == 0);
  CHECK(std::filesystem::exists(report));
  std::filesystem::remove(data);
  std::filesystem::remove(report);
}

TEST_CASE("rule-specific redundancy is refused") {
  CHECK(run("train --data synthetic3 --granularity rule --c2 1.0 --seed 2") != 0);
}

TEST_CASE("unknown dataset and bad flags fail") {
  CHECK(run("generate nope --seed 1") != 0);
  CHECK(run("train --granularity class") != 0);  // --data missing
  CHECK(run("bogus-subcommand") != 0);
}

TEST_CASE("gradcheck passes at the 1e-4 gate") {
  CHECK(run("gradcheck --seed 5 --trials 6") == 0);
}

TEST_CASE("experiment writes summary files") {
  const auto dir = tmp("frbc_cli_exp");
  std::filesystem::remove_all(dir);
  CHECK(run("experiment exp1 --runs 1 --seed 9 --out-dir " + dir.string()) == 0);
  CHECK(std::filesystem::exists(dir / "summary.md"));
  CHECK(std::filesystem::exists(dir / "run1_class_specific.json"));
  std::filesystem::remove_all(dir);
}
