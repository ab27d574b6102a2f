#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "poolscope/events.hpp"
#include "test_support.hpp"

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("poolscope-cli-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args, const fs::path& cwd, std::string* output = nullptr) {
  const fs::path capture = cwd / "cli-output.txt";
  const std::string cmd =
      "cd '" + cwd.string() + "' && '" + POOLSCOPE_CLI_PATH + "' " + args + " > '" + capture.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(capture);
    std::ostringstream buf;
    buf << in.rdbuf();
    *output = buf.str();
  }
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path write_fixture(const TempDir& dir, unsigned seed = 601, std::size_t n = 120) {
  std::mt19937_64 rng(seed);
  auto events = testsupport::well_formed_events(rng, n, 10);
  for (auto& e : events) e.liquidity *= 1000;
  const fs::path p = dir.path / "events.jsonl";
  std::ofstream out(p);
  for (const auto& e : events) out << poolscope::event_to_jsonl(e) << "\n";
  return p;
}

}  // namespace

TEST_CASE("version flag") {
  TempDir dir;
  std::string output;
  CHECK(run_cli("--version", dir.path, &output) == 0);
  CHECK(output.find("poolscope 0.1.0") != std::string::npos);
}

TEST_CASE("validation failures exit with code 1 and name the problem") {
  TempDir dir;
  const auto input = write_fixture(dir);
  std::string output;

  CHECK(run_cli("rank --input '" + input.string() + "' --k 0", dir.path, &output) == 1);
  CHECK(output.find("--k must be >= 1") != std::string::npos);

  CHECK(run_cli("rank --input '" + input.string() + "' --no-such-flag", dir.path, &output) == 1);
  CHECK(run_cli("rank", dir.path, &output) == 1);  // --input is required
  CHECK(run_cli("rank --input '" + (dir.path / "missing.jsonl").string() + "'", dir.path) == 1);
  CHECK(run_cli("analyze --input '" + input.string() + "' --grid 1,2", dir.path, &output) == 1);
  CHECK(output.find("grid") != std::string::npos);
  CHECK(run_cli("analyze --input '" + input.string() + "' --format yaml", dir.path, &output) == 1);
  CHECK(run_cli("", dir.path) == 1);  // a subcommand is required

  // conflicting sources
  CHECK(run_cli("ingest --input '" + input.string() + "' --rpc-url http://127.0.0.1:1", dir.path, &output) == 1);
  CHECK(output.find("exactly one of --input and --rpc-url") != std::string::npos);
  CHECK(run_cli("ingest", dir.path, &output) == 1);
}

TEST_CASE("ingest normalizes, reports stats, and can persist to a store") {
  TempDir dir;
  const auto input = write_fixture(dir);
  // append one malformed and one zero-liquidity line
  {
    std::ofstream out(input, std::ios::app);
    out << "garbage line\n";
    out << R"({"type":"Mint","owner":")" << testsupport::addr(1) << R"(","sender":")" << testsupport::addr(1)
        << R"(","tickLower":-10,"tickUpper":10,"liquidity":"0","amount0":"0","amount1":"0","blockNumber":99999,)"
        << R"("logIndex":0,"txHash":")" << testsupport::tx_hash(12345) << R"("})" << "\n";
  }
  std::string output;
  const int rc = run_cli("ingest --input '" + input.string() + "' --out out --store kv --key fixture", dir.path,
                         &output);
  REQUIRE(rc == 0);
  CHECK(output.find("malformed=1") != std::string::npos);
  CHECK(output.find("zero_liquidity=1") != std::string::npos);
  CHECK(fs::exists(dir.path / "out" / "events.jsonl"));
  CHECK(fs::exists(dir.path / "out" / "run-manifest.json"));
  CHECK(fs::exists(dir.path / "kv" / "fixture"));

  // normalized output re-ingests to the same dataset
  const auto first = poolscope::ingest_jsonl((dir.path / "out" / "events.jsonl").string(), testsupport::addr(0xdead));
  CHECK(first.events.size() > 0);

  // strict mode rejects the malformed line
  CHECK(run_cli("ingest --input '" + input.string() + "' --strict --out strict-out", dir.path, &output) == 1);
}

TEST_CASE("analyze writes a report and a reproducible manifest") {
  TempDir dir;
  const auto input = write_fixture(dir);
  std::string output;
  const std::string base_args = "analyze --input '" + input.string() + "' --k 10 --lambda -1.5 "
                                "--grid 0.0001,0.01,0.001 --seed 42";
  REQUIRE(run_cli(base_args + " --out run1", dir.path, &output) == 0);
  CHECK(output.find("baseline_pi=") != std::string::npos);
  REQUIRE(fs::exists(dir.path / "run1" / "lsis-report.csv"));
  REQUIRE(fs::exists(dir.path / "run1" / "run-manifest.json"));

  const auto manifest = nlohmann::json::parse(slurp(dir.path / "run1" / "run-manifest.json"));
  CHECK(manifest.at("tool") == "poolscope");
  CHECK(manifest.at("version") == "0.1.0");
  CHECK(manifest.at("subcommand") == "analyze");
  CHECK(manifest.at("config").at("k") == 10);
  CHECK(manifest.at("config").at("seed") == 42);
  CHECK(manifest.at("dataset_hash").get<std::string>().rfind("0x", 0) == 0);
  CHECK(manifest.at("outputs")[0] == "lsis-report.csv");

  const std::string csv = slurp(dir.path / "run1" / "lsis-report.csv");
  CHECK(csv.rfind("owner,etwl_rank,pi_baseline,pi_excluded,lsis,skipped_swaps,b1,b2,b3,label\n", 0) == 0);

  SECTION("identical configs give byte-identical outputs") {
    REQUIRE(run_cli(base_args + " --out run2", dir.path) == 0);
    CHECK(slurp(dir.path / "run2" / "lsis-report.csv") == csv);
    CHECK(slurp(dir.path / "run2" / "run-manifest.json") != "");
  }

  SECTION("thread count does not change the bytes") {
    REQUIRE(run_cli(base_args + " --threads 1 --out t1", dir.path) == 0);
    REQUIRE(run_cli(base_args + " --threads 4 --out t4", dir.path) == 0);
    REQUIRE(run_cli(base_args + " --threads 8 --out t8", dir.path) == 0);
    CHECK(slurp(dir.path / "t1" / "lsis-report.csv") == csv);
    CHECK(slurp(dir.path / "t4" / "lsis-report.csv") == csv);
    CHECK(slurp(dir.path / "t8" / "lsis-report.csv") == csv);
  }

  SECTION("json format carries run metadata") {
    REQUIRE(run_cli(base_args + " --format json --out json-run", dir.path) == 0);
    const auto report = nlohmann::json::parse(slurp(dir.path / "json-run" / "lsis-report.json"));
    CHECK(report.at("meta").at("k") == 10);
    CHECK(report.at("meta").at("dataset_hash") == manifest.at("dataset_hash"));
    CHECK(report.at("reports").is_array());
  }

  SECTION("the baseline profile exports on request") {
    REQUIRE(run_cli(base_args + " --profile-csv --out with-profile", dir.path) == 0);
    const std::string profile = slurp(dir.path / "with-profile" / "baseline-profile.csv");
    CHECK(profile.rfind("tick,cumulative_liquidity\n", 0) == 0);
    CHECK(std::count(profile.begin(), profile.end(), '\n') > 1);
  }
}

TEST_CASE("classify relabels an existing report") {
  TempDir dir;
  const auto input = write_fixture(dir);
  REQUIRE(run_cli("analyze --input '" + input.string() + "' --k 10 --format json --out analysis", dir.path) == 0);
  const int rc = run_cli("classify --report analysis/lsis-report.json --lsis-significant 0.5 --out labels", dir.path);
  REQUIRE(rc == 0);
  const std::string csv = slurp(dir.path / "labels" / "labeled-report.csv");
  CHECK(csv.rfind("owner,", 0) == 0);
  CHECK(fs::exists(dir.path / "labels" / "run-manifest.json"));
}

TEST_CASE("sweep-lambda covers the requested range") {
  TempDir dir;
  const auto input = write_fixture(dir);
  std::string output;
  const int rc = run_cli("sweep-lambda --input '" + input.string() + "' --from -0.5 --to -5.0 --step 0.5 --k 5 "
                         "--out sweep",
                         dir.path, &output);
  REQUIRE(rc == 0);
  const std::string csv = slurp(dir.path / "sweep" / "lambda-sweep.csv");
  CHECK(csv.rfind("lambda,spearman,top_k_overlap_vs_default\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);  // header + 10 lambdas
  CHECK(csv.find("-0.5,") != std::string::npos);
  CHECK(csv.find("-5,") != std::string::npos);
}

TEST_CASE("export-swaps emits a replayable swap set") {
  TempDir dir;
  const auto input = write_fixture(dir);
  REQUIRE(run_cli("export-swaps --input '" + input.string() + "' --seed 42 --out swaps", dir.path) == 0);
  const fs::path swaps = dir.path / "swaps" / "swaps.jsonl";
  REQUIRE(fs::exists(swaps));
  CHECK(slurp(swaps).find("\"sqrtPriceX96\":") != std::string::npos);

  // the exported set replays through analyze
  REQUIRE(run_cli("analyze --input '" + input.string() + "' --k 5 --swaps '" + swaps.string() + "' --out replay",
                  dir.path) == 0);
  // replaying the generated set matches generating it in-process
  REQUIRE(run_cli("analyze --input '" + input.string() + "' --k 5 --seed 42 --out direct", dir.path) == 0);
  CHECK(slurp(dir.path / "replay" / "lsis-report.csv") == slurp(dir.path / "direct" / "lsis-report.csv"));
}

TEST_CASE("serve rejects out-of-range ports before doing any work") {
  TempDir dir;
  const auto input = write_fixture(dir, 601, 40);
  std::string output;
  CHECK(run_cli("serve --input '" + input.string() + "' --port 99999", dir.path, &output) == 1);
  CHECK(output.find("--port must be in [1, 65535]") != std::string::npos);
}
