#include <gtest/gtest.h>

#include <chrono>
#include <cstring>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "fdisac/errors.hpp"
#include "fdisac/harness.hpp"

using namespace fdisac;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config(const std::string& out) {
  ExperimentConfig c = desk_scale_config();
  c.runs = 3;
  c.tx_power_dbm = {10.0, 30.0};
  c.output_dir = out;
  c.threads = 1;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fdisac_harness_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Harness, ThreadCountDoesNotChangeOutput) {
  const fs::path a = scratch("t1"), b = scratch("t4");
  ExperimentConfig c = tiny_config(a.string());
  run_experiment(c);
  c.threads = 4;
  c.output_dir = b.string();
  run_experiment(c);
  for (const char* f : {"records.csv", "targets.csv", "aggregate.csv"}) {
    const std::string x = slurp(a / f);
    EXPECT_FALSE(x.empty()) << f;
    EXPECT_EQ(x, slurp(b / f)) << f;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Harness, CsvRoundTripReproducesAggregates) {
  const fs::path dir = scratch("csv");
  ExperimentConfig c = tiny_config(dir.string());
  c.dump_spectrum = true;
  c.dump_optimizer = true;
  const ExperimentReport rep = run_experiment(c);

  std::istringstream head(slurp(dir / "records.csv"));
  std::string line;
  std::getline(head, line);
  EXPECT_EQ(line, kRecordsHeader);

  const auto back =
      read_records_csv((dir / "records.csv").string(), (dir / "targets.csv").string());
  ASSERT_EQ(back.size(), rep.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].seed, rep.records[i].seed);
    EXPECT_EQ(back[i].dl_rate_bps_hz, rep.records[i].dl_rate_bps_hz);
    EXPECT_EQ(back[i].matched_count(), rep.records[i].matched_count());
    EXPECT_EQ(back[i].targets.size(), rep.records[i].targets.size());
  }
  const fs::path again = dir / "again.csv";
  write_aggregate_csv(again.string(), aggregate_records(back, c.tx_power_dbm));
  EXPECT_EQ(slurp(again), slurp(dir / "aggregate.csv"));

  EXPECT_TRUE(fs::exists(dir / "config.json"));
  EXPECT_TRUE(fs::exists(dir / "spectra" / "run2_p1.csv"));
  EXPECT_TRUE(fs::exists(dir / "optimizer" / "run0_p0.json"));
  fs::remove_all(dir);
}

TEST(Harness, SingleRunAggregate) {
  ExperimentConfig c = tiny_config("unused");
  c.runs = 1;
  c.tx_power_dbm = {30.0};
  const ExperimentReport rep = run_experiment(c, false);
  ASSERT_EQ(rep.records.size(), 1u);
  ASSERT_EQ(rep.aggregates.size(), 1u);
  const auto& r = rep.records[0];
  const auto& a = rep.aggregates[0];
  EXPECT_EQ(a.runs, 1);
  EXPECT_EQ(a.mean_dl_rate, r.dl_rate_bps_hz);
  EXPECT_EQ(a.all_detected_fraction,
            r.matched_count() == static_cast<int>(r.targets.size()) ? 1.0 : 0.0);
  std::vector<double> range;
  for (const auto& t : r.targets) {
    if (t.matched) range.push_back(t.range_error_m);
  }
  if (range.size() == 1) EXPECT_EQ(a.median_range_error_m, range[0]);
  if (range.empty()) EXPECT_TRUE(std::isnan(a.median_range_error_m));
}

TEST(Harness, AggregateStatistics) {
  std::vector<RunRecord> recs(4);
  const double errs[4] = {1.0, 4.0, 2.0, 3.0};
  for (int i = 0; i < 4; ++i) {
    recs[i].run = i;
    recs[i].dl_rate_bps_hz = i;
    recs[i].ideal_dl_rate_bps_hz = i + 0.5;
    recs[i].feasible = i != 3;
    recs[i].certified = i == 0;
    TargetRecord t;
    t.matched = i != 1;
    t.range_error_m = errs[i];
    t.relative_velocity_error = errs[i] / 10.0;
    recs[i].targets.push_back(t);
  }
  const auto rows = aggregate_records(recs, {0.0, 5.0});
  const auto& a = rows[0];
  EXPECT_EQ(a.runs, 4);
  EXPECT_DOUBLE_EQ(a.all_detected_fraction, 0.75);
  EXPECT_DOUBLE_EQ(a.median_range_error_m, 2.0);
  EXPECT_DOUBLE_EQ(a.rmse_range_m, std::sqrt((1.0 + 4.0 + 9.0) / 3.0));
  EXPECT_NEAR(a.p90_rel_velocity_error, 0.28, 1e-15);
  EXPECT_DOUBLE_EQ(a.mean_rate_gap, 0.5);
  EXPECT_DOUBLE_EQ(a.feasible_fraction, 0.75);
  EXPECT_DOUBLE_EQ(a.certified_fraction, 1.0 / 3.0);
  EXPECT_EQ(rows[1].runs, 0);
}

TEST(Harness, ReplayMatchesOriginalRun) {
  const ExperimentConfig c = tiny_config("unused");
  const std::uint64_t seed = run_seed(c.seed, 2);
  const RunRecord a = run_single(c, 30.0, seed);
  const RunRecord b = run_with_scenario(c, scenario_for_run(c, seed), 30.0, seed);
  EXPECT_EQ(a.dl_rate_bps_hz, b.dl_rate_bps_hz);
  ASSERT_EQ(a.targets.size(), b.targets.size());
  for (std::size_t k = 0; k < a.targets.size(); ++k) {
    // Bitwise, so two NaNs for a missed target compare equal.
    EXPECT_EQ(std::memcmp(&a.targets[k].est_range_m, &b.targets[k].est_range_m, sizeof(double)), 0);
    EXPECT_EQ(a.targets[k].matched, b.targets[k].matched);
  }
}

TEST(Harness, UnwritableOutputFailsBeforeCompute) {
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker) << "x";
  ExperimentConfig c = full_scale_config();
  c.runs = 100000;  // would take hours if anything ran first
  c.output_dir = (blocker / "sub").string();
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_THROW(run_experiment(c), IoError);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(5));
  fs::remove(blocker);
}

TEST(Harness, NoiselessOnGridTargetsRecoveredExactly) {
  ExperimentConfig c = desk_scale_config();
  c.scenario.k_targets = 1;
  c.scenario.l_scatterers = 1;
  c.on_grid = true;
  c.scenario.channel.noise_floor_dbm = -std::numeric_limits<double>::infinity();
  const double range_bin = c.ofdm.range_bin();
  for (int run = 0; run < 8; ++run) {
    const RunRecord r = run_single(c, 30.0, run_seed(7, run));
    ASSERT_EQ(r.targets.size(), 1u);
    const auto& t = r.targets[0];
    ASSERT_TRUE(t.matched) << "run " << run;
    EXPECT_LT(t.doa_error_deg, 0.05);  // half the 0.1 degree MUSIC grid
    EXPECT_LT(t.range_error_m, 1e-3 * range_bin) << "run " << run;
    EXPECT_LT(t.velocity_error_mps, 1e-3 * c.ofdm.doppler_bin() * c.array.wavelength / 2.0);
  }
}
