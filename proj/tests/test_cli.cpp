#include <doctest.h>

#include "synthetic_dataset.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

fs::path make_temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("equihar_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("cli exit codes: usage, naturality pass/fail, data error") {
  CHECK(run_cli("definitely-not-a-subcommand") == 1);
  CHECK(run_cli("naturality-test --no-such-flag") == 1);

  CHECK(run_cli("naturality-test -n 30") == 0);
  CHECK(run_cli("naturality-test -n 0") == 0);  // vacuous pass with warning
  CHECK(run_cli("naturality-test -n 30 --inject-fault") == 3);

  const fs::path empty = make_temp_dir("cli_empty");
  CHECK(run_cli("eval --model /nonexistent/model.txt --data-root " +
                empty.string()) == 2);
  CHECK(run_cli("fetch --data-root " + empty.string() +
                " --url http://127.0.0.1:1/x.zip --attempts 1 --backoff-ms 1") ==
        2);
  fs::remove_all(empty);
}

TEST_CASE("cli pipeline on a synthetic dataset root") {
  const fs::path root = make_temp_dir("cli_data");
  equihar::testing::write_uci_dataset(root, 8, 4);
  const std::string data = " --data-root " + root.string();

  const fs::path features = root / "features.csv";
  CHECK(run_cli("extract --kind group_poset --split test --out " +
                features.string() + data) == 0);
  CHECK(fs::is_regular_file(features));

  const fs::path model = root / "model.txt";
  CHECK(run_cli("train --kind group_poset --out " + model.string() + data) == 0);
  CHECK(fs::is_regular_file(model));

  CHECK(run_cli("eval --model " + model.string() + " --split test" + data) == 0);

  const fs::path draws = root / "draws.csv";
  CHECK(run_cli("ood-eval --model " + model.string() + " --seed 1 --draws-csv " +
                draws.string() + data) == 0);
  CHECK(fs::is_regular_file(draws));

  const fs::path results = root / "results";
  CHECK(run_cli("ablate --seeds 0,1 --kinds poset_only,group_poset --out-dir " +
                results.string() + data) == 0);
  CHECK(fs::is_regular_file(results / "summary.csv"));
  CHECK(fs::is_regular_file(results / "per_seed.csv"));
  CHECK(fs::is_regular_file(results / "summary.json"));

  CHECK(run_cli("displacement --kinds group_poset --n-draws 20 --split test "
                "--out-dir " +
                results.string() + data) == 0);
  CHECK(fs::is_regular_file(results / "displacement.csv"));
  CHECK(fs::is_regular_file(results / "displacement.json"));

  // The HAR_DATA_ROOT environment variable substitutes for --data-root.
  {
    const std::string cmd = "HAR_DATA_ROOT=" + root.string() + " " +
                            std::string(CLI_PATH) + " eval --model " +
                            model.string() + " --split test > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    CHECK(WEXITSTATUS(status) == 0);
  }

  // Config file with flag override: the config points at a bogus root, the
  // flag wins and the command succeeds.
  const fs::path cfg_file = root / "equihar.ini";
  {
    std::ofstream cfg(cfg_file);
    cfg << "[eval]\n";
    cfg << "data-root=/nonexistent\n";
    cfg << "split=test\n";
    cfg << "model=" << model.string() << "\n";
  }
  CHECK(run_cli("--config " + cfg_file.string() + " eval" + data) == 0);
  CHECK(run_cli("--config " + cfg_file.string() + " eval") == 2);

  fs::remove_all(root);
}
