// End-to-end checks of the installed command surface: run with a preset,
// run twice for bit-identical output, ingest a synthetic CSV fixture, and
// the machine-readable error path. The binary path comes from CMake.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifdef LUPTS_CLI_PATH

namespace {

namespace fs = std::filesystem;

int run_command(const std::string& args, const fs::path& stderr_file = {}) {
  std::string command = std::string(LUPTS_CLI_PATH) + " " + args + " > /dev/null";
  if (!stderr_file.empty()) {
    command += " 2> " + stderr_file.string();
  } else {
    command += " 2> /dev/null";
  }
  return std::system(command.c_str());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "lupts_cli_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("list-presets exits cleanly") {
  CHECK(run_command("list-presets") == 0);
}

TEST_CASE("preset run writes deterministic outputs") {
  const fs::path dir = temp_dir();
  const std::string out_a = (dir / "runA").string();
  const std::string out_b = (dir / "runB").string();
  const std::string flags = "run --preset fig2a_samples --replicates 2 --seed 11 ";
  REQUIRE(run_command(flags + "--out " + out_a) == 0);
  REQUIRE(run_command(flags + "--out " + out_b) == 0);
  CHECK(fs::exists(out_a + ".rows.csv"));
  CHECK(fs::exists(out_a + ".agg.csv"));
  CHECK(fs::exists(out_a + ".config.json"));
  CHECK(slurp(out_a + ".rows.csv") == slurp(out_b + ".rows.csv"));
}

TEST_CASE("ingest runs on a CSV fixture end to end") {
  const fs::path dir = temp_dir();
  const fs::path csv = dir / "fixture.csv";
  {
    std::ofstream out(csv);
    out << "x1_1,x2_1,y\n";
    // y = 3 * x2, x2 = 2 * x1 + small wiggle; one missing cell.
    for (int i = 1; i <= 60; ++i) {
      const double x1 = 0.1 * i;
      const double x2 = 2.0 * x1 + 0.01 * (i % 5);
      if (i == 30) {
        out << x1 << ",NA," << 3.0 * x2 << "\n";
      } else {
        out << x1 << ',' << x2 << ',' << 3.0 * x2 << "\n";
      }
    }
  }
  const fs::path schema = dir / "schema.json";
  {
    std::ofstream out(schema);
    out << R"({"T": 2, "d": 1, "outcome_column": "y", "missing_marker": "NA"})";
  }
  const std::string out_prefix = (dir / "ingest_out").string();
  REQUIRE(run_command("ingest --csv " + csv.string() + " --schema " + schema.string() +
                      " --estimators baseline,lupts --train-sizes 20,40 --replicates 3 --out " +
                      out_prefix) == 0);
  CHECK(fs::exists(out_prefix + ".rows.csv"));
  CHECK(fs::exists(out_prefix + ".agg.csv"));
  CHECK(fs::exists(out_prefix + ".schema.json"));
  const std::string rows = slurp(out_prefix + ".rows.csv");
  CHECK(rows.find("lupts") != std::string::npos);
}

TEST_CASE("errors surface as JSON on stderr with a nonzero exit") {
  const fs::path dir = temp_dir();
  const fs::path err = dir / "stderr.json";
  CHECK(run_command("run --preset not_a_preset", err) != 0);
  const std::string captured = slurp(err);
  CHECK(captured.find("\"error\"") != std::string::npos);
  CHECK(captured.find("unknown_preset") != std::string::npos);

  CHECK(run_command("run", err) != 0);
  CHECK(slurp(err).find("\"error\"") != std::string::npos);
}

}  // TEST_SUITE

#endif  // LUPTS_CLI_PATH
