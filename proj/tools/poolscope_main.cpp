// poolscope: analytics for concentrated-liquidity pools.
//
// Subcommands: ingest, rank, analyze, classify, sweep-lambda, export-swaps,
// serve. Every run that writes outputs also writes a run-manifest.json
// (effective config + dataset fingerprint + tool version) beside them, and
// identical manifests reproduce byte-identical outputs.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "poolscope/counterfactual.hpp"
#include "poolscope/etwl.hpp"
#include "poolscope/events.hpp"
#include "poolscope/gatekeeper.hpp"
#include "poolscope/liquidity.hpp"
#include "poolscope/rpc_source.hpp"
#include "poolscope/storage.hpp"
#include "poolscope/swap_math.hpp"
#include "poolscope/version.hpp"

namespace {

namespace fs = std::filesystem;
using poolscope::BigInt;
using poolscope::Decimal;

constexpr const char* kZeroAddress = "0x0000000000000000000000000000000000000000";

std::string env_name(const std::string& flag) {
  std::string out = "POOLSCOPE_";
  for (char c : flag) out.push_back(c == '-' ? '_' : std::toupper(static_cast<unsigned char>(c)));
  return out;
}

CLI::Option* opt(CLI::App* cmd, const std::string& flag, std::string& var, const std::string& help) {
  return cmd->add_option("--" + flag, var, help)->envname(env_name(flag));
}

Decimal parse_decimal_flag(const std::string& text, const std::string& flag) {
  try {
    return Decimal(text);
  } catch (const std::exception&) {
    throw poolscope::ValidationError("flag --" + flag + " is not a decimal: " + text);
  }
}

poolscope::SwapGrid parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) parts.push_back(item);
  if (parts.size() != 3) throw poolscope::ValidationError("--grid expects start,end,step");
  poolscope::SwapGrid grid;
  grid.start = parse_decimal_flag(parts[0], "grid");
  grid.end = parse_decimal_flag(parts[1], "grid");
  grid.step = parse_decimal_flag(parts[2], "grid");
  if (!(grid.start > 0) || grid.start > grid.end || !(grid.step > 0))
    throw poolscope::ValidationError("--grid needs 0 < start <= end and step > 0");
  return grid;
}

void check_lambda(const Decimal& lambda) {
  if (lambda >= 0) std::cerr << "warning: lambda should be negative; proceeding with " << lambda << "\n";
}

struct ManifestWriter {
  std::string subcommand;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::string dataset_hash;
  std::vector<std::string> outputs;

  void write(const fs::path& dir) const {
    nlohmann::ordered_json j;
    j["tool"] = "poolscope";
    j["version"] = poolscope::kVersion;
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["dataset_hash"] = dataset_hash;
    j["outputs"] = outputs;
    std::ofstream out(dir / "run-manifest.json", std::ios::trunc);
    if (!out) throw poolscope::RuntimeError("cannot write run manifest in " + dir.string());
    out << j.dump(2) << "\n";
  }
};

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw poolscope::RuntimeError("cannot write " + path.string());
  out << content;
}

struct DatasetFlags {
  std::string input;
  std::string pool = kZeroAddress;

  void attach(CLI::App* cmd, bool require_input = true) {
    auto* o = opt(cmd, "input", input, "JSONL event file")->check(CLI::ExistingFile);
    if (require_input) o->required();
    opt(cmd, "pool", pool, "pool address (0x-hex)");
  }

  poolscope::EventDataset load(poolscope::IngestStats* stats = nullptr, bool strict = false) const {
    return poolscope::ingest_jsonl(input, pool, {strict}, stats);
  }
};

struct ClassifierFlags {
  std::string epsilon = "0.001";
  std::string significant = "0.01";
  std::string linchpin = "10.0";
  std::size_t active_rank_max = 500;

  void attach(CLI::App* cmd) {
    opt(cmd, "lsis-epsilon", epsilon, "LSIS below this is treated as zero");
    opt(cmd, "lsis-significant", significant, "LSIS significance threshold");
    opt(cmd, "lsis-linchpin", linchpin, "LSIS linchpin threshold");
    cmd->add_option("--active-rank-max", active_rank_max, "ETWL ranks at or below this count as active")
        ->envname(env_name("active-rank-max"));
  }

  poolscope::ClassifierConfig build() const {
    poolscope::ClassifierConfig c;
    c.lsis_epsilon = parse_decimal_flag(epsilon, "lsis-epsilon");
    c.lsis_significant = parse_decimal_flag(significant, "lsis-significant");
    c.lsis_linchpin = parse_decimal_flag(linchpin, "lsis-linchpin");
    c.active_rank_max = active_rank_max;
    c.validate();
    return c;
  }

  void describe(nlohmann::ordered_json& j) const {
    j["lsis_epsilon"] = epsilon;
    j["lsis_significant"] = significant;
    j["lsis_linchpin"] = linchpin;
    j["active_rank_max"] = active_rank_max;
  }
};

int run_ingest(const DatasetFlags& data, const std::string& rpc_url, std::uint64_t from_block,
               std::uint64_t to_block, bool strict, const std::string& out_dir, const std::string& store_dir,
               const std::string& store_key) {
  if (data.input.empty() == rpc_url.empty())
    throw poolscope::ValidationError("exactly one of --input and --rpc-url must be given");
  poolscope::IngestStats stats;
  poolscope::EventDataset dataset = [&] {
    if (!rpc_url.empty()) {
      if (from_block > to_block) throw poolscope::ValidationError("--from-block must be <= --to-block");
      poolscope::JsonRpcEventSource source(rpc_url);
      return poolscope::fetch_and_preprocess(source, data.pool, from_block, to_block, {}, &stats);
    }
    return data.load(&stats, strict);
  }();
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_text_file(dir / "events.jsonl", poolscope::serialize_dataset(dataset));
  if (!store_dir.empty()) {
    poolscope::DirectoryKvStore store{fs::path(store_dir)};
    poolscope::persist_dataset(dataset, store, store_key);
  }
  ManifestWriter manifest;
  manifest.subcommand = "ingest";
  if (!rpc_url.empty()) {
    manifest.config["rpc_url"] = rpc_url;
    manifest.config["from_block"] = from_block;
    manifest.config["to_block"] = to_block;
  } else {
    manifest.config["input"] = data.input;
  }
  manifest.config["pool"] = dataset.pool_address;
  manifest.config["strict"] = strict;
  manifest.dataset_hash = dataset.fingerprint();
  manifest.outputs = {"events.jsonl"};
  manifest.write(dir);
  std::cout << "accepted=" << stats.accepted << " malformed=" << stats.malformed
            << " zero_liquidity=" << stats.zero_liquidity << " duplicates=" << stats.duplicates
            << " blocks=[" << dataset.min_block << "," << dataset.max_block << "]\n";
  return 0;
}

int run_rank(const DatasetFlags& data, std::size_t k, const std::string& lambda_text, bool close_at_end,
             const std::string& out_dir) {
  if (k == 0) throw poolscope::ValidationError("--k must be >= 1");
  const Decimal lambda = parse_decimal_flag(lambda_text, "lambda");
  check_lambda(lambda);
  const auto dataset = data.load();
  std::set<std::string> negative;
  const auto ranking = poolscope::rank_lps(poolscope::compute_etwl(dataset, lambda, close_at_end), k, &negative);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  std::ostringstream csv;
  poolscope::write_ranking_csv(ranking, csv);
  write_text_file(dir / "ranking.csv", csv.str());
  ManifestWriter manifest;
  manifest.subcommand = "rank";
  manifest.config["input"] = data.input;
  manifest.config["pool"] = dataset.pool_address;
  manifest.config["k"] = k;
  manifest.config["lambda"] = lambda_text;
  manifest.config["close_at_end"] = close_at_end;
  manifest.dataset_hash = dataset.fingerprint();
  manifest.outputs = {"ranking.csv"};
  manifest.write(dir);
  if (!negative.empty())
    std::cerr << "warning: " << negative.size() << " owner(s) had negative raw scores floored to 0\n";
  std::cout << "ranked " << ranking.size() << " owners\n";
  return 0;
}

int run_analyze(const DatasetFlags& data, std::size_t k, const std::string& lambda_text, bool close_at_end,
                const std::string& grid_text, std::uint64_t seed, std::size_t threads,
                const ClassifierFlags& classifier, bool canonical_math, const std::string& swaps_path,
                double top_percentile, const std::string& format, bool profile_csv, const std::string& out_dir) {
  if (k == 0) throw poolscope::ValidationError("--k must be >= 1");
  if (format != "csv" && format != "json") throw poolscope::ValidationError("--format must be csv or json");
  poolscope::AnalysisConfig config;
  config.k = k;
  config.lambda = parse_decimal_flag(lambda_text, "lambda");
  check_lambda(config.lambda);
  config.close_at_end = close_at_end;
  config.grid = parse_grid(grid_text);
  config.seed = seed;
  config.threads = threads;
  config.classifier = classifier.build();
  config.math = canonical_math ? poolscope::ImpactMath::Canonical : poolscope::ImpactMath::Subtractive;
  if (top_percentile > 0) config.top_percentile = top_percentile;
  if (!swaps_path.empty()) {
    std::ifstream in(swaps_path);
    if (!in) throw poolscope::RuntimeError("cannot open swap set: " + swaps_path);
    config.swaps_override = poolscope::read_swaps_jsonl(in);
  }

  const auto dataset = data.load();
  const auto result = poolscope::run_analysis(dataset, config);

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  ManifestWriter manifest;
  manifest.subcommand = "analyze";
  manifest.config["input"] = data.input;
  manifest.config["pool"] = dataset.pool_address;
  manifest.config["k"] = k;
  manifest.config["lambda"] = lambda_text;
  manifest.config["close_at_end"] = close_at_end;
  manifest.config["grid"] = grid_text;
  manifest.config["seed"] = seed;
  manifest.config["canonical_math"] = canonical_math;
  classifier.describe(manifest.config);
  if (top_percentile > 0) manifest.config["top_percentile"] = top_percentile;
  if (!swaps_path.empty()) manifest.config["swaps"] = swaps_path;
  manifest.dataset_hash = dataset.fingerprint();

  std::ostringstream csv;
  poolscope::write_reports_csv(result.reports, csv);
  if (format == "csv") {
    write_text_file(dir / "lsis-report.csv", csv.str());
    manifest.outputs.push_back("lsis-report.csv");
  } else {
    nlohmann::ordered_json j;
    j["meta"] = nlohmann::ordered_json::object();
    j["meta"]["lambda"] = lambda_text;
    j["meta"]["k"] = k;
    j["meta"]["seed"] = seed;
    j["meta"]["grid"] = grid_text;
    classifier.describe(j["meta"]);
    j["meta"]["dataset_hash"] = dataset.fingerprint();
    j["meta"]["tool_version"] = poolscope::kVersion;
    j["meta"]["baseline_pi"] = poolscope::format_decimal(result.baseline_pi);
    j["meta"]["swap_count"] = result.swap_count;
    j["reports"] = nlohmann::ordered_json::array();
    for (const auto& r : result.reports) j["reports"].push_back(poolscope::report_to_json(r));
    write_text_file(dir / "lsis-report.json", j.dump(2) + "\n");
    manifest.outputs.push_back("lsis-report.json");
  }
  if (profile_csv) {
    std::ostringstream profile_out;
    poolscope::write_profile_csv(poolscope::build_liquidity_profile(dataset), profile_out);
    write_text_file(dir / "baseline-profile.csv", profile_out.str());
    manifest.outputs.push_back("baseline-profile.csv");
  }
  manifest.write(dir);
  std::cout << "baseline_pi=" << poolscope::format_decimal(result.baseline_pi) << " swaps=" << result.swap_count
            << " analyzed=" << result.reports.size() << "\n";
  return 0;
}

int run_classify(const std::string& report_path, const ClassifierFlags& classifier, const std::string& out_dir) {
  std::ifstream in(report_path);
  if (!in) throw poolscope::RuntimeError("cannot open report: " + report_path);
  nlohmann::json j = nlohmann::json::parse(in);
  const auto& rows = j.contains("reports") ? j.at("reports") : j;
  std::vector<poolscope::LsisReport> reports;
  for (const auto& row : rows) reports.push_back(poolscope::report_from_json(row));
  poolscope::classify(reports, classifier.build());
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  std::ostringstream csv;
  poolscope::write_reports_csv(reports, csv);
  write_text_file(dir / "labeled-report.csv", csv.str());
  ManifestWriter manifest;
  manifest.subcommand = "classify";
  manifest.config["report"] = report_path;
  classifier.describe(manifest.config);
  manifest.dataset_hash =
      j.contains("meta") && j["meta"].contains("dataset_hash") ? j["meta"]["dataset_hash"].get<std::string>() : "";
  manifest.outputs = {"labeled-report.csv"};
  manifest.write(dir);
  std::cout << "labeled " << reports.size() << " reports\n";
  return 0;
}

int run_sweep(const DatasetFlags& data, const std::string& from_text, const std::string& to_text,
              const std::string& step_text, std::size_t k, const std::string& out_dir) {
  if (k == 0) throw poolscope::ValidationError("--k must be >= 1");
  const Decimal from = parse_decimal_flag(from_text, "from");
  const Decimal to = parse_decimal_flag(to_text, "to");
  Decimal step = parse_decimal_flag(step_text, "step");
  if (step == 0) throw poolscope::ValidationError("--step must be nonzero");
  step = abs(step);
  std::vector<Decimal> lambdas;
  if (from <= to) {
    for (Decimal v = from; v <= to; v += step) lambdas.push_back(v);
  } else {
    for (Decimal v = from; v >= to; v -= step) lambdas.push_back(v);
  }
  if (lambdas.size() < 2) throw poolscope::ValidationError("lambda sweep needs at least 2 values");
  const auto dataset = data.load();
  const auto rows = poolscope::lambda_sweep(dataset, lambdas, k);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  std::ostringstream csv;
  poolscope::write_sweep_csv(rows, csv);
  write_text_file(dir / "lambda-sweep.csv", csv.str());
  ManifestWriter manifest;
  manifest.subcommand = "sweep-lambda";
  manifest.config["input"] = data.input;
  manifest.config["pool"] = dataset.pool_address;
  manifest.config["from"] = from_text;
  manifest.config["to"] = to_text;
  manifest.config["step"] = step_text;
  manifest.config["k"] = k;
  manifest.dataset_hash = dataset.fingerprint();
  manifest.outputs = {"lambda-sweep.csv"};
  manifest.write(dir);
  std::cout << "swept " << rows.size() << " lambda values\n";
  return 0;
}

int run_export_swaps(const DatasetFlags& data, const std::string& grid_text, std::uint64_t seed,
                     const std::string& out_dir) {
  const auto grid = parse_grid(grid_text);
  const auto dataset = data.load();
  const auto profile = poolscope::build_liquidity_profile(dataset);
  const auto swaps = poolscope::generate_synthetic_swaps(profile, grid.start, grid.end, grid.step, seed);
  if (swaps.empty()) std::cerr << "warning: profile has no active liquidity; swap set is empty\n";
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  std::ostringstream body;
  poolscope::write_swaps_jsonl(swaps, seed, body);
  write_text_file(dir / "swaps.jsonl", body.str());
  ManifestWriter manifest;
  manifest.subcommand = "export-swaps";
  manifest.config["input"] = data.input;
  manifest.config["pool"] = dataset.pool_address;
  manifest.config["grid"] = grid_text;
  manifest.config["seed"] = seed;
  manifest.dataset_hash = dataset.fingerprint();
  manifest.outputs = {"swaps.jsonl"};
  manifest.write(dir);
  std::cout << "exported " << swaps.size() << " swaps\n";
  return 0;
}

int run_serve(const DatasetFlags& data, const std::string& host, int port, const std::string& grid_text,
              std::uint64_t seed, const std::string& report_path, const std::string& allow_text,
              const std::string& deny_text, const std::string& min_depth_text, std::int32_t depth_window) {
  if (port < 1 || port > 65535) throw poolscope::ValidationError("--port must be in [1, 65535]");
  const auto grid = parse_grid(grid_text);
  const auto dataset = data.load();
  poolscope::GateThresholds thresholds;
  thresholds.allow_threshold = parse_decimal_flag(allow_text, "allow-threshold");
  thresholds.deny_threshold = parse_decimal_flag(deny_text, "deny-threshold");
  thresholds.min_depth = BigInt(min_depth_text);
  thresholds.depth_window = depth_window;
  thresholds.validate();

  std::vector<poolscope::LsisReport> rankings;
  if (!report_path.empty()) {
    std::ifstream in(report_path);
    if (!in) throw poolscope::RuntimeError("cannot open report: " + report_path);
    nlohmann::json j = nlohmann::json::parse(in);
    const auto& rows = j.contains("reports") ? j.at("reports") : j;
    for (const auto& row : rows) rankings.push_back(poolscope::report_from_json(row));
  }

  auto state = poolscope::GateState::build(dataset, grid, seed);
  poolscope::GateService service(std::move(state), thresholds, std::move(rankings));
  std::cout << "listening on " << host << ":" << port << "\n";
  if (!service.listen(host, port)) throw poolscope::RuntimeError("cannot bind " + host + ":" + std::to_string(port));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concentrated-liquidity pool analytics: liquidity reconstruction, time-weighted LP ranking, "
               "counterfactual impact scoring, and a burn-request gate service."};
  app.set_version_flag("--version", std::string("poolscope ") + poolscope::kVersion);
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Acquire and normalize pool events from a file or a node endpoint");
  DatasetFlags ingest_data;
  ingest_data.attach(ingest, /*require_input=*/false);
  bool strict = false;
  ingest->add_flag("--strict", strict, "fail on any malformed line")->envname(env_name("strict"));
  std::string rpc_url;
  std::uint64_t from_block = 0, to_block = 0;
  opt(ingest, "rpc-url", rpc_url, "fetch events over JSON-RPC instead of reading --input");
  ingest->add_option("--from-block", from_block, "first block for --rpc-url")->envname(env_name("from-block"));
  ingest->add_option("--to-block", to_block, "last block for --rpc-url")->envname(env_name("to-block"));
  std::string ingest_out = ".", store_dir, store_key = "dataset";
  opt(ingest, "out", ingest_out, "output directory");
  opt(ingest, "store", store_dir, "also persist into this key-value store directory");
  opt(ingest, "key", store_key, "store key for --store");

  // rank
  auto* rank = app.add_subcommand("rank", "Rank owners by exponentially time-weighted liquidity");
  DatasetFlags rank_data;
  rank_data.attach(rank);
  std::size_t rank_k = 100;
  std::string rank_lambda = "-1.5", rank_out = ".";
  bool rank_close = false;
  rank->add_option("--k", rank_k, "number of owners to keep")->envname(env_name("k"));
  opt(rank, "lambda", rank_lambda, "decay factor (negative)");
  rank->add_flag("--close-at,--close-at-end", rank_close,
                 "accrue standing liquidity up to the last dataset block")
      ->envname(env_name("close-at-end"));
  opt(rank, "out", rank_out, "output directory");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Counterfactual impact analysis of the top-k owners");
  DatasetFlags analyze_data;
  analyze_data.attach(analyze);
  std::size_t analyze_k = 100, analyze_threads = 0;
  std::string analyze_lambda = "-1.5", analyze_grid = "0.0001,0.01,0.001", analyze_out = ".", analyze_swaps;
  std::string analyze_format = "csv";
  std::uint64_t analyze_seed = 42;
  bool analyze_close = false, analyze_canonical = false;
  double analyze_top_percentile = 0;
  ClassifierFlags analyze_classifier;
  analyze->add_option("--k", analyze_k, "number of owners to analyze")->envname(env_name("k"));
  opt(analyze, "lambda", analyze_lambda, "decay factor (negative)");
  analyze->add_flag("--close-at,--close-at-end", analyze_close,
                    "accrue standing liquidity up to the last dataset block")
      ->envname(env_name("close-at-end"));
  opt(analyze, "grid", analyze_grid, "swap grid start,end,step");
  analyze->add_option("--seed", analyze_seed, "swap generation seed")->envname(env_name("seed"));
  analyze->add_option("--threads", analyze_threads, "worker pool size (0 = hardware)")->envname(env_name("threads"));
  analyze->add_flag("--canonical-math", analyze_canonical,
                    "use the canonical single-tick token0 update instead of the subtractive form")
      ->envname(env_name("canonical-math"));
  opt(analyze, "swaps", analyze_swaps, "replay a previously exported swap set instead of generating one");
  analyze->add_option("--top-percentile", analyze_top_percentile, "keep only the top percentile of reports by LSIS")
      ->envname(env_name("top-percentile"));
  opt(analyze, "format", analyze_format, "report format: csv or json");
  bool analyze_profile_csv = false;
  analyze->add_flag("--profile-csv", analyze_profile_csv, "also export the baseline liquidity profile as CSV")
      ->envname(env_name("profile-csv"));
  analyze_classifier.attach(analyze);
  opt(analyze, "out", analyze_out, "output directory");

  // classify
  auto* classify = app.add_subcommand("classify", "Relabel an analysis report with different thresholds");
  std::string classify_report, classify_out = ".";
  opt(classify, "report", classify_report, "lsis-report.json produced by analyze")->required()->check(CLI::ExistingFile);
  ClassifierFlags classify_classifier;
  classify_classifier.attach(classify);
  opt(classify, "out", classify_out, "output directory");

  // sweep-lambda
  auto* sweep = app.add_subcommand("sweep-lambda", "Sensitivity of the ranking to the decay factor");
  DatasetFlags sweep_data;
  sweep_data.attach(sweep);
  std::string sweep_from = "-0.5", sweep_to = "-5.0", sweep_step = "0.5", sweep_out = ".";
  std::size_t sweep_k = 100;
  opt(sweep, "from", sweep_from, "first lambda");
  opt(sweep, "to", sweep_to, "last lambda");
  opt(sweep, "step", sweep_step, "lambda increment (sign ignored)");
  sweep->add_option("--k", sweep_k, "top-k for the overlap column")->envname(env_name("k"));
  opt(sweep, "out", sweep_out, "output directory");

  // export-swaps
  auto* export_swaps = app.add_subcommand("export-swaps", "Write the deterministic synthetic swap set");
  DatasetFlags export_data;
  export_data.attach(export_swaps);
  std::string export_grid = "0.0001,0.01,0.001", export_out = ".";
  std::uint64_t export_seed = 42;
  opt(export_swaps, "grid", export_grid, "swap grid start,end,step");
  export_swaps->add_option("--seed", export_seed, "swap generation seed")->envname(env_name("seed"));
  opt(export_swaps, "out", export_out, "output directory");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the burn-request gate service");
  DatasetFlags serve_data;
  serve_data.attach(serve);
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  std::string serve_grid = "0.0001,0.01,0.001", serve_report;
  std::uint64_t serve_seed = 42;
  std::string serve_allow = "0.005", serve_deny = "0.05", serve_min_depth = "0";
  std::int32_t serve_window = 100;
  opt(serve, "host", serve_host, "bind address");
  serve->add_option("--port", serve_port, "bind port")->envname(env_name("port"));
  opt(serve, "grid", serve_grid, "swap grid start,end,step");
  serve->add_option("--seed", serve_seed, "swap generation seed")->envname(env_name("seed"));
  opt(serve, "report", serve_report, "analysis report to serve under /v1/rankings");
  opt(serve, "allow-threshold", serve_allow, "max degradation for Allow");
  opt(serve, "deny-threshold", serve_deny, "degradation above this is denied");
  opt(serve, "min-depth", serve_min_depth, "minimum post-burn window depth");
  serve->add_option("--depth-window", serve_window, "ticks either side of the reference tick")
      ->envname(env_name("depth-window"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (ingest->parsed())
      return run_ingest(ingest_data, rpc_url, from_block, to_block, strict, ingest_out, store_dir, store_key);
    if (rank->parsed()) return run_rank(rank_data, rank_k, rank_lambda, rank_close, rank_out);
    if (analyze->parsed())
      return run_analyze(analyze_data, analyze_k, analyze_lambda, analyze_close, analyze_grid, analyze_seed,
                         analyze_threads, analyze_classifier, analyze_canonical, analyze_swaps,
                         analyze_top_percentile, analyze_format, analyze_profile_csv, analyze_out);
    if (classify->parsed()) return run_classify(classify_report, classify_classifier, classify_out);
    if (sweep->parsed()) return run_sweep(sweep_data, sweep_from, sweep_to, sweep_step, sweep_k, sweep_out);
    if (export_swaps->parsed()) return run_export_swaps(export_data, export_grid, export_seed, export_out);
    if (serve->parsed())
      return run_serve(serve_data, serve_host, serve_port, serve_grid, serve_seed, serve_report, serve_allow,
                       serve_deny, serve_min_depth, serve_window);
  } catch (const poolscope::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
