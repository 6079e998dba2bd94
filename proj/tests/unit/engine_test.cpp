#include <gtest/gtest.h>

#include "mimosim/engine.hpp"
#include "mimosim/results_io.hpp"

using namespace mimosim;

namespace {

SweepConfig small_cf(int M = 16, int K = 4) {
  SweepConfig c;
  c.scenarios = {ScenarioConfig::cell_free(M, K)};
  c.snr_db = {0.0, 10.0, 20.0};
  c.realizations = 4;
  c.frames = 20;
  c.threads = 1;
  c.master_seed = 11;
  return c;
}

MetricRecord synthetic(Topology t, double snr, std::uint64_t errors) {
  MetricRecord r;
  r.key = {t, PrecoderKind::MMSE, AllocatorKind::UPA, snr};
  r.bit_errors = errors;
  r.bits_total = 1000;
  r.ber_moments.add(static_cast<double>(errors) / 1000.0);
  r.rate.add(1.0);
  return r;
}

const MetricRecord& find(const std::vector<MetricRecord>& recs, PrecoderKind p, AllocatorKind a, double snr) {
  for (const auto& r : recs)
    if (r.key.precoder == p && r.key.allocator == a && r.key.snr_db == snr) return r;
  throw std::runtime_error("record not found");
}

}  // namespace

TEST(SnrGrid, Inclusive) {
  EXPECT_EQ(snr_grid(0, 20, 2).size(), 11u);
  EXPECT_EQ(snr_grid(0, 1, 0.1).back(), 1.0);
  EXPECT_EQ(snr_grid(5, 5, 1), std::vector<double>{5.0});
  EXPECT_THROW(snr_grid(1, 0, 1), std::invalid_argument);
}

TEST(Moments, PooledMeanAndVariance) {
  RunningMoments a, b, all;
  for (double x : {1.0, 2.0}) a.add(x), all.add(x);
  for (double x : {3.0, 4.0}) b.add(x), all.add(x);
  RunningMoments ab = a, ba = b;
  ab.merge(b);
  ba.merge(a);
  EXPECT_DOUBLE_EQ(ab.mean, 2.5);
  EXPECT_NEAR(ab.variance(), 5.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(ab.mean, ba.mean);
  EXPECT_DOUBLE_EQ(ab.m2, ba.m2);
  EXPECT_NEAR(ab.m2, all.m2, 1e-14);

  RunningMoments empty, copy = a;
  copy.merge(empty);
  EXPECT_EQ(copy.n, a.n);
  EXPECT_EQ(copy.mean, a.mean);
  empty.merge(a);
  EXPECT_EQ(empty.mean, a.mean);
}

TEST(Records, MergePoolsCounts) {
  const MetricRecord m = merge(synthetic(Topology::CellFree, 0, 10), synthetic(Topology::CellFree, 0, 30));
  EXPECT_EQ(m.bit_errors, 40u);
  EXPECT_EQ(m.bits_total, 2000u);
  EXPECT_DOUBLE_EQ(m.ber(), 0.02);
  EXPECT_EQ(m.realizations(), 2u);
  EXPECT_THROW(merge(synthetic(Topology::CellFree, 0, 1), synthetic(Topology::CellFree, 2, 1)),
               std::invalid_argument);
}

TEST(Keys, OrderByNamesThenSnr) {
  MetricKey a{Topology::CellFree, PrecoderKind::MMSE, AllocatorKind::APA, 10.0};
  MetricKey b = a;
  b.snr_db = 2.0;
  EXPECT_TRUE(b < a);
  MetricKey c = a;
  c.topology = Topology::MultiCell;
  EXPECT_TRUE(a < c);
}

TEST(SweepConfigTest, ValidationNamesKeys) {
  SweepConfig c = small_cf();
  c.realizations = 0;
  try {
    c.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("sweep.realizations"), std::string::npos);
  }
  c = small_cf();
  c.csit.sigma_e_sq = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_cf();
  c.scenarios.push_back(ScenarioConfig::cell_free(8, 2));
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(RunTrial, Deterministic) {
  const SweepConfig c = small_cf();
  const TrialResult a = run_trial(c, 0, 3);
  const TrialResult b = run_trial(c, 0, 3);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].bit_errors, b.records[i].bit_errors);
    EXPECT_EQ(a.records[i].rate.mean, b.records[i].rate.mean);
  }
  const TrialResult other = run_trial(c, 0, 4);
  bool differs = false;
  for (std::size_t i = 0; i < a.records.size(); ++i) differs |= a.records[i].rate.mean != other.records[i].rate.mean;
  EXPECT_TRUE(differs);
}

TEST(RunTrial, ZeroForcingAtHighSnrIsErrorFree) {
  SweepConfig c = small_cf();
  c.scenarios[0].fading_mode = FadingMode::IidUnit;
  c.snr_db = {80.0};
  c.precoders = {PrecoderKind::ZF};
  c.allocators = {AllocatorKind::UPA};
  c.frames = 200;
  for (std::uint64_t t = 0; t < 5; ++t) {
    const TrialResult r = run_trial(c, 0, t);
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.records[0].bit_errors, 0u);
    EXPECT_EQ(r.records[0].bits_total, 2u * 4u * 200u);
  }
}

TEST(RunSweep, MmseNoWorseThanMatchedFilter) {
  SweepConfig c = small_cf();
  c.scenarios[0].fading_mode = FadingMode::IidUnit;
  c.snr_db = {20.0};
  c.precoders = {PrecoderKind::MF, PrecoderKind::MMSE};
  c.allocators = {AllocatorKind::UPA};
  c.realizations = 20;
  const SweepResult r = run_sweep(c);
  EXPECT_LT(find(r.records, PrecoderKind::MMSE, AllocatorKind::UPA, 20).ber(),
            find(r.records, PrecoderKind::MF, AllocatorKind::UPA, 20).ber());
}

TEST(RunSweep, SingleRealizationEqualsTrial) {
  SweepConfig c = small_cf();
  c.realizations = 1;
  const SweepResult s = run_sweep(c);
  TrialResult t = run_trial(c, 0, 0);
  std::stable_sort(t.records.begin(), t.records.end(),
                   [](const MetricRecord& a, const MetricRecord& b) { return a.key < b.key; });
  ASSERT_EQ(s.records.size(), t.records.size());
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    EXPECT_EQ(s.records[i].key, t.records[i].key);
    EXPECT_EQ(s.records[i].bit_errors, t.records[i].bit_errors);
    EXPECT_EQ(s.records[i].rate.mean, t.records[i].rate.mean);
  }
}

TEST(RunSweep, ThreadCountDoesNotChangeResults) {
  SweepConfig c = small_cf();
  c.scenarios.push_back(ScenarioConfig::multi_cell(3, 8, 2));
  c.csit.sigma_e_sq = 0.1;
  c.realizations = 6;
  c.threads = 1;
  const SweepResult one = run_sweep(c);
  c.threads = 8;
  const SweepResult many = run_sweep(c);
  EXPECT_EQ(results_csv(one.records), results_csv(many.records));
  EXPECT_EQ(one.diagnostics.allocation.runs, many.diagnostics.allocation.runs);
  EXPECT_EQ(one.diagnostics.allocation.worst_robust_gap, many.diagnostics.allocation.worst_robust_gap);
}

TEST(RunSweep, AllCellsForDefaultCellFree) {
  SweepConfig c;
  c.snr_db = {0.0, 10.0};
  c.realizations = 1;
  c.frames = 10;
  c.threads = 1;
  const SweepResult r = run_sweep(c);
  EXPECT_EQ(r.records.size(), 2u * 3u * 3u);
  for (const auto& rec : r.records) {
    EXPECT_EQ(rec.realizations(), 1u);
    EXPECT_EQ(rec.bits_total, 2u * 16u * 10u);
  }
  EXPECT_EQ(r.diagnostics.scenarios.size(), 1u);
  EXPECT_EQ(r.diagnostics.scenarios[0].failed, 0u);
}

TEST(RunSweep, AbortsWhenEstimatesCarryNoInformation) {
  SweepConfig c = small_cf();
  c.csit.sigma_e_sq = 1.0;
  c.precoders = {PrecoderKind::ZF};
  c.allocators = {AllocatorKind::UPA};
  try {
    run_sweep(c);
    FAIL() << "expected SweepAborted";
  } catch (const SweepAborted& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("4 of 4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("trial 0"), std::string::npos) << msg;
  }
}

TEST(RunSweep, BerFallsAndRateGrowsWithSnr) {
  SweepConfig c = small_cf();
  c.snr_db = {0.0, 5.0, 10.0, 15.0, 20.0};
  c.precoders = {PrecoderKind::ZF, PrecoderKind::MMSE};
  c.allocators = {AllocatorKind::UPA};
  c.realizations = 30;
  c.frames = 100;
  const SweepResult r = run_sweep(c);
  for (std::size_t i = 0; i + 1 < c.snr_db.size(); ++i) {
    const double lo = c.snr_db[i], hi = c.snr_db[i + 1];
    EXPECT_LE(find(r.records, PrecoderKind::MMSE, AllocatorKind::UPA, hi).ber(),
              find(r.records, PrecoderKind::MMSE, AllocatorKind::UPA, lo).ber());
    EXPECT_GE(find(r.records, PrecoderKind::ZF, AllocatorKind::UPA, hi).sum_rate_mean(),
              find(r.records, PrecoderKind::ZF, AllocatorKind::UPA, lo).sum_rate_mean());
  }
}

TEST(RunSweep, ReportsProgress) {
  SweepConfig c = small_cf();
  c.allocators = {AllocatorKind::UPA};
  std::size_t calls = 0, last = 0;
  run_sweep(c, [&](std::size_t done, std::size_t total) {
    ++calls;
    last = done;
    EXPECT_EQ(total, 4u);
  });
  EXPECT_EQ(calls, 4u);
  EXPECT_EQ(last, 4u);
}

TEST(Crossover, InterpolatesFirstSignChange) {
  std::vector<MetricRecord> recs = {
      synthetic(Topology::CellFree, 0, 100), synthetic(Topology::CellFree, 10, 50),
      synthetic(Topology::CellFree, 20, 10), synthetic(Topology::MultiCell, 0, 200),
      synthetic(Topology::MultiCell, 10, 40), synthetic(Topology::MultiCell, 20, 20),
  };
  const auto x = crossover_snr(recs, PrecoderKind::MMSE, AllocatorKind::UPA);
  ASSERT_TRUE(x.has_value());
  EXPECT_NEAR(*x, 10.0 * 0.1 / 0.11, 1e-12);
  EXPECT_FALSE(crossover_snr(recs, PrecoderKind::ZF, AllocatorKind::UPA).has_value());

  recs[4] = synthetic(Topology::MultiCell, 10, 60);
  recs[5] = synthetic(Topology::MultiCell, 20, 30);
  EXPECT_FALSE(crossover_snr(recs, PrecoderKind::MMSE, AllocatorKind::UPA).has_value());
}
