#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "poolscope/counterfactual.hpp"
#include "test_support.hpp"

using namespace poolscope;
using testsupport::addr;
using testsupport::burn;
using testsupport::mint;

namespace {

AnalysisConfig small_config(std::size_t k = 10) {
  AnalysisConfig cfg;
  cfg.k = k;
  cfg.seed = 7;
  cfg.threads = 1;
  return cfg;
}

// Straight-line sequential re-implementation of the orchestration: one loop,
// no worker pool, baseline impacts recomputed inline. Means use the same
// pairwise reduction because that is part of the mean's definition.
std::vector<LsisReport> naive_analysis(const EventDataset& dataset, const AnalysisConfig& cfg) {
  const auto scores = compute_etwl(dataset, cfg.lambda, cfg.close_at_end);
  const auto top = rank_lps(scores, cfg.k);
  const auto baseline = build_liquidity_profile(dataset);
  const auto swaps = generate_synthetic_swaps(baseline, cfg.grid.start, cfg.grid.end, cfg.grid.step, cfg.seed);
  const auto b1 = baseline_b1(dataset);
  const auto b2 = baseline_b2(dataset);
  const auto b3 = baseline_b3(dataset);

  std::vector<std::optional<Decimal>> base_mags;
  for (const auto& s : swaps) {
    const auto res = price_impact(s, active_liquidity_at(baseline, s.tick));
    base_mags.push_back(res.ok() ? std::optional<Decimal>(res.impact.magnitude) : std::nullopt);
  }
  std::vector<Decimal> base_ok;
  for (const auto& m : base_mags)
    if (m) base_ok.push_back(*m);
  const Decimal global_pi = pairwise_sum(base_ok) / Decimal(base_ok.size());

  std::vector<LsisReport> reports;
  for (const auto& entry : top) {
    LsisReport r;
    r.owner = entry.owner;
    r.etwl_rank = entry.rank;
    r.flags = {b1.count(entry.owner) > 0, b2.count(entry.owner) > 0, b3.count(entry.owner) > 0};
    const auto excluded = build_liquidity_profile(dataset, entry.owner);
    LiquidityLookupStats stats;
    std::vector<Decimal> cb, cx;
    for (std::size_t i = 0; i < swaps.size(); ++i) {
      const auto res = price_impact(swaps[i], active_liquidity_at(excluded, swaps[i].tick, &stats));
      if (base_mags[i] && res.ok()) {
        cb.push_back(*base_mags[i]);
        cx.push_back(res.impact.magnitude);
      }
    }
    r.negative_clamps = stats.negative_clamps;
    r.skipped_swaps = swaps.size() - cb.size();
    if (cb.empty()) {
      r.lsis_infinite = true;
      r.pi_baseline = global_pi;
    } else {
      r.pi_baseline = pairwise_sum(cb) / Decimal(cb.size());
      r.pi_excluded = pairwise_sum(cx) / Decimal(cx.size());
      r.lsis = r.pi_baseline > 0 ? (r.pi_excluded - r.pi_baseline) / r.pi_baseline : Decimal(0);
    }
    reports.push_back(std::move(r));
  }
  std::sort(reports.begin(), reports.end(), [](const LsisReport& a, const LsisReport& b) {
    if (a.lsis_infinite != b.lsis_infinite) return a.lsis_infinite;
    if (a.lsis != b.lsis) return a.lsis > b.lsis;
    return a.owner < b.owner;
  });
  classify(reports, cfg.classifier);
  return reports;
}

void require_reports_equal(const std::vector<LsisReport>& a, const std::vector<LsisReport>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].owner == b[i].owner);
    REQUIRE(a[i].etwl_rank == b[i].etwl_rank);
    REQUIRE(a[i].pi_baseline.str() == b[i].pi_baseline.str());
    REQUIRE(a[i].pi_excluded.str() == b[i].pi_excluded.str());
    REQUIRE(a[i].lsis.str() == b[i].lsis.str());
    REQUIRE(a[i].lsis_infinite == b[i].lsis_infinite);
    REQUIRE(a[i].skipped_swaps == b[i].skipped_swaps);
    REQUIRE(a[i].negative_clamps == b[i].negative_clamps);
    REQUIRE(a[i].flags == b[i].flags);
    REQUIRE(a[i].label == b[i].label);
  }
}

}  // namespace

TEST_CASE("a fully cancelled LP has LSIS exactly zero") {
  auto d = testsupport::dataset({
      mint(addr(1), -100, 100, 500000, 1, 0),
      mint(addr(2), 0, 20, 30000, 2, 0),
      burn(addr(2), 0, 20, 30000, 3, 0),
      mint(addr(1), -50, 50, 100000, 4, 0),
  });
  const auto out = run_analysis(d, small_config());
  bool found = false;
  for (const auto& r : out.reports) {
    if (r.owner != addr(2)) continue;
    found = true;
    CHECK(!r.lsis_infinite);
    CHECK(r.lsis == 0);
    CHECK(r.pi_excluded == r.pi_baseline);
    CHECK(r.skipped_swaps == 0);
  }
  REQUIRE(found);
}

TEST_CASE("LSIS matches its defining ratio on every report") {
  std::mt19937_64 rng(401);
  auto events = testsupport::well_formed_events(rng, 150, 12);
  for (auto& e : events) e.liquidity *= 1000;
  const auto d = testsupport::dataset(std::move(events));
  const auto out = run_analysis(d, small_config(12));
  REQUIRE(!out.reports.empty());
  for (const auto& r : out.reports) {
    if (r.lsis_infinite || r.pi_baseline == 0) continue;
    const Decimal want = (r.pi_excluded - r.pi_baseline) / r.pi_baseline;
    REQUIRE(r.lsis.str() == want.str());
  }
}

TEST_CASE("sole provider exclusion hits the no-measurable-impact path") {
  auto d = testsupport::dataset({mint(addr(1), -100, 100, 700000, 1, 0), burn(addr(1), -100, 100, 100000, 5, 0)});
  const auto out = run_analysis(d, small_config(1));
  REQUIRE(out.reports.size() == 1);
  CHECK(out.reports[0].owner == addr(1));
  CHECK(out.reports[0].lsis_infinite);
  CHECK(out.reports[0].skipped_swaps == out.swap_count);
  CHECK(out.reports[0].label == LpLabel::LinchpinWhale);  // rank 1 is active
}

TEST_CASE("zero baseline impact trips the zero guard") {
  auto d = testsupport::dataset({
      mint(addr(1), -100, 100, 500000, 1, 0),
      mint(addr(2), -100, 100, 400000, 2, 0),
      mint(addr(3), -50, 50, 300000, 3, 0),
      burn(addr(3), -50, 50, 300000, 4, 0),
  });
  // a single null swap prices to zero impact under every profile; excluding
  // any one owner still leaves liquidity at its tick
  SyntheticSwap null_swap;
  null_swap.tick = -100;
  null_swap.sqrt_price_x96 = sqrtp_to_sqrtx96(Decimal(1));
  auto cfg = small_config(3);
  cfg.swaps_override = std::vector<SyntheticSwap>{null_swap};
  const auto out = run_analysis(d, cfg);
  CHECK(out.baseline_pi == 0);
  for (const auto& r : out.reports) {
    CHECK(!r.lsis_infinite);
    CHECK(r.lsis == 0);
  }
}

TEST_CASE("LSIS is non-negative on well-formed histories") {
  std::mt19937_64 rng(409);
  for (int round = 0; round < 20; ++round) {
    auto events = testsupport::well_formed_events(rng, 120, 10);
    for (auto& e : events) e.liquidity *= 1000;
    const auto d = testsupport::dataset(std::move(events));
    const auto out = run_analysis(d, small_config(10));
    for (const auto& r : out.reports) {
      if (r.lsis_infinite) continue;
      REQUIRE(r.lsis >= 0);
    }
  }
}

TEST_CASE("reports come out sorted by LSIS descending") {
  std::mt19937_64 rng(419);
  auto events = testsupport::well_formed_events(rng, 200, 15);
  for (auto& e : events) e.liquidity *= 1000;
  const auto d = testsupport::dataset(std::move(events));
  const auto out = run_analysis(d, small_config(15));
  for (std::size_t i = 1; i < out.reports.size(); ++i) {
    const auto& prev = out.reports[i - 1];
    const auto& cur = out.reports[i];
    if (prev.lsis_infinite) continue;
    REQUIRE(!cur.lsis_infinite);
    REQUIRE(prev.lsis >= cur.lsis);
  }
}

TEST_CASE("baseline detector B1") {
  SECTION("uniform sizes flag everyone at the threshold") {
    std::vector<PoolEvent> events;
    for (unsigned i = 1; i <= 100; ++i) events.push_back(mint(addr(i), -10, 10, 50, i, 0));
    const auto d = testsupport::dataset(std::move(events));
    CHECK(baseline_b1(d).size() == 100);
  }
  SECTION("distinct sizes flag only the top percentile") {
    std::vector<PoolEvent> events;
    for (unsigned i = 1; i <= 10; ++i) events.push_back(mint(addr(i), -10, 10, 10 * i, i, 0));
    const auto d = testsupport::dataset(std::move(events));
    const auto flagged = baseline_b1(d);
    REQUIRE(flagged == std::set<std::string>{addr(10)});
  }
}

TEST_CASE("baseline detector B2") {
  SECTION("a sole provider is always flagged") {
    const auto d = testsupport::dataset({mint(addr(1), -10, 10, 1000, 1, 0)});
    CHECK(baseline_b2(d) == std::set<std::string>{addr(1)});
    CHECK(baseline_b2(d, Decimal("0.99")) == std::set<std::string>{addr(1)});
  }
  SECTION("the share comparison is strict") {
    // owner 2 peaks at exactly 1% of the pool peak
    const auto d = testsupport::dataset({mint(addr(1), -10, 10, 990, 1, 0), mint(addr(2), -10, 10, 10, 2, 0)});
    const auto flagged = baseline_b2(d);
    CHECK(flagged.count(addr(1)) == 1);
    CHECK(flagged.count(addr(2)) == 0);
  }
}

TEST_CASE("baseline detector B3 and turnover") {
  SECTION("turnover uses peak outstanding once the position unwinds") {
    detail::OwnerActivity a;
    a.total_minted = 100;
    a.total_burned = 100;
    a.outstanding = 0;
    a.peak_outstanding = 100;
    CHECK(turnover_ratio(a) == 2);
  }
  SECTION("churn plus size flags the churner only") {
    std::vector<PoolEvent> events;
    for (unsigned i = 1; i <= 9; ++i) events.push_back(mint(addr(i), -10, 10, 100, i, 0));
    events.push_back(mint(addr(10), -10, 10, 100, 10, 0));
    events.push_back(burn(addr(10), -10, 10, 100, 11, 0));
    const auto d = testsupport::dataset(std::move(events));
    const auto flagged = baseline_b3(d);
    REQUIRE(flagged == std::set<std::string>{addr(10)});
  }
}

TEST_CASE("baseline detectors are order independent") {
  std::mt19937_64 rng(431);
  auto events = testsupport::well_formed_events(rng, 150, 12);
  auto shuffled = events;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto d1 = testsupport::dataset(std::move(events));
  const auto d2 = testsupport::dataset(std::move(shuffled));
  CHECK(baseline_b1(d1) == baseline_b1(d2));
  CHECK(baseline_b2(d1) == baseline_b2(d2));
  CHECK(baseline_b3(d1) == baseline_b3(d2));
}

TEST_CASE("classifier reproduces the reference quadrants") {
  const ClassifierConfig cfg;
  const BaselineFlags none;
  const BaselineFlags b1b2{true, true, false};
  const BaselineFlags b3only{false, false, true};

  CHECK(classify_one(Decimal("0.084"), false, 5, b1b2, cfg) == LpLabel::ActiveCriticalWhale);
  CHECK(classify_one(Decimal("0.0005"), false, 27, b1b2, cfg) == LpLabel::FalsePositiveWhale);
  CHECK(classify_one(Decimal("27.74"), false, 1283, b3only, cfg) == LpLabel::DormantLinchpin);
  CHECK(classify_one(Decimal("4435716"), false, 338, none, cfg) == LpLabel::LinchpinWhale);
  CHECK(classify_one(Decimal("0.037"), false, 841, b3only, cfg) == LpLabel::DormantCriticalWhale);
  CHECK(classify_one(Decimal(0), false, 1, none, cfg) == LpLabel::NonWhale);
}

TEST_CASE("classifier boundaries and totality") {
  const ClassifierConfig cfg;
  // band edges are inclusive on the upper band
  CHECK(classify_one(cfg.lsis_epsilon, false, 1, {}, cfg) == LpLabel::NonWhale);          // [eps, sig)
  CHECK(classify_one(cfg.lsis_significant, false, 1, {}, cfg) == LpLabel::ActiveCriticalWhale);
  CHECK(classify_one(cfg.lsis_linchpin, false, 1, {}, cfg) == LpLabel::LinchpinWhale);
  CHECK(classify_one(Decimal(0), true, 1000, {}, cfg) == LpLabel::DormantLinchpin);  // infinite
  CHECK(classify_one(Decimal("-0.5"), false, 1, {true, false, false}, cfg) == LpLabel::FalsePositiveWhale);

  std::mt19937_64 rng(433);
  for (int i = 0; i < 1000; ++i) {
    const Decimal lsis = Decimal(static_cast<std::int64_t>(rng() % 2000)) / 100 - 1;
    const BaselineFlags flags{(rng() & 1) != 0, (rng() & 1) != 0, (rng() & 1) != 0};
    const LpLabel label = classify_one(lsis, rng() % 50 == 0, 1 + rng() % 2000, flags, cfg);
    const char* name = lp_label_name(label);
    REQUIRE(lp_label_from_name(name) == label);
  }

  ClassifierConfig bad;
  bad.lsis_significant = bad.lsis_epsilon;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  ClassifierConfig zero_rank;
  zero_rank.active_rank_max = 0;
  CHECK_THROWS_AS(zero_rank.validate(), ValidationError);
}

TEST_CASE("run_analysis equals the naive sequential reference") {
  std::mt19937_64 rng(439);
  for (int round = 0; round < 5; ++round) {
    auto events = testsupport::well_formed_events(rng, 100 + rng() % 400, 5 + rng() % 15);
    for (auto& e : events) e.liquidity *= 1000;
    const auto d = testsupport::dataset(std::move(events));
    auto cfg = small_config(8);
    cfg.threads = 4;
    const auto parallel = run_analysis(d, cfg);
    const auto reference = naive_analysis(d, cfg);
    require_reports_equal(parallel.reports, reference);

    cfg.threads = 1;
    const auto sequential = run_analysis(d, cfg);
    require_reports_equal(parallel.reports, sequential.reports);
  }
}

TEST_CASE("run_analysis validates its inputs") {
  auto d = testsupport::dataset({mint(addr(1), -10, 10, 50, 1, 0)});
  auto cfg = small_config(0);
  CHECK_THROWS_AS(run_analysis(d, cfg), ValidationError);
  EventDataset empty;
  CHECK_THROWS_AS(run_analysis(empty, small_config()), ValidationError);
}

TEST_CASE("top percentile filter trims the report list") {
  std::mt19937_64 rng(443);
  auto events = testsupport::well_formed_events(rng, 150, 10);
  for (auto& e : events) e.liquidity *= 1000;
  const auto d = testsupport::dataset(std::move(events));
  auto cfg = small_config(10);
  const auto full = run_analysis(d, cfg);
  cfg.top_percentile = 20.0;
  const auto trimmed = run_analysis(d, cfg);
  const std::size_t expect = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(full.reports.size()))));
  REQUIRE(trimmed.reports.size() == expect);
  for (std::size_t i = 0; i < trimmed.reports.size(); ++i)
    CHECK(trimmed.reports[i].owner == full.reports[i].owner);
}

TEST_CASE("report CSV and JSON serialization") {
  LsisReport r;
  r.owner = addr(5);
  r.etwl_rank = 3;
  r.pi_baseline = Decimal("0.5");
  r.pi_excluded = Decimal("1.0");
  r.lsis = Decimal("1");
  r.skipped_swaps = 2;
  r.flags = {true, false, true};
  r.label = LpLabel::ActiveCriticalWhale;

  std::ostringstream csv;
  write_reports_csv({r}, csv);
  CHECK(csv.str() ==
        "owner,etwl_rank,pi_baseline,pi_excluded,lsis,skipped_swaps,b1,b2,b3,label\n" + addr(5) +
            ",3,0.5,1,1,2,true,false,true,ActiveCriticalWhale\n");

  const auto round_tripped = report_from_json(report_to_json(r));
  CHECK(round_tripped.owner == r.owner);
  CHECK(round_tripped.etwl_rank == r.etwl_rank);
  CHECK(round_tripped.pi_baseline == r.pi_baseline);
  CHECK(round_tripped.lsis == r.lsis);
  CHECK(round_tripped.flags == r.flags);
  CHECK(round_tripped.label == r.label);

  r.lsis_infinite = true;
  std::ostringstream inf_csv;
  write_reports_csv({r}, inf_csv);
  CHECK(inf_csv.str().find(",inf,") != std::string::npos);
  const auto inf_back = report_from_json(report_to_json(r));
  CHECK(inf_back.lsis_infinite);
}
