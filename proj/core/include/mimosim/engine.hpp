#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mimosim/power_allocation.hpp"
#include "mimosim/scenario.hpp"

namespace mimosim {

/// Inclusive grid lo, lo + step, ..., hi (hi kept when it lies within
/// 1e-9 step of the last point).
std::vector<double> snr_grid(double lo, double hi, double step);

struct SweepConfig {
  std::vector<double> snr_db = snr_grid(0.0, 20.0, 2.0);
  int realizations = 200;
  int frames = 100;
  std::vector<PrecoderKind> precoders = {PrecoderKind::MF, PrecoderKind::ZF, PrecoderKind::MMSE};
  std::vector<AllocatorKind> allocators = {AllocatorKind::UPA, AllocatorKind::APA, AllocatorKind::RAPA};
  /// One entry per topology to simulate.
  std::vector<ScenarioConfig> scenarios = {ScenarioConfig::cell_free(64, 16)};
  CsitErrorModel csit;
  ApaParams apa;
  /// Extra rounds of recomputing the MMSE precoder with the current
  /// allocation and re-running the allocator. 0 keeps P fixed.
  int alternations = 0;
  std::uint64_t master_seed = 1;
  /// Worker threads; 0 picks the hardware concurrency.
  int threads = 0;
  double sigma_n_sq = 1.0;

  void validate() const;
};

struct MetricKey {
  Topology topology = Topology::CellFree;
  PrecoderKind precoder = PrecoderKind::MF;
  AllocatorKind allocator = AllocatorKind::UPA;
  double snr_db = 0.0;

  bool operator==(const MetricKey&) const = default;
};

/// Lexicographic on the printed names, then numeric SNR.
bool operator<(const MetricKey& a, const MetricKey& b);

/// Streaming count / mean / sum of squared deviations.
struct RunningMoments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  void merge(const RunningMoments& other);
  double variance() const;  // unbiased; 0 for n < 2
  double sem() const;
};

struct MetricRecord {
  MetricKey key;
  std::uint64_t bit_errors = 0;
  std::uint64_t bits_total = 0;
  /// Per-realization BER, for the standard error of the mean.
  RunningMoments ber_moments;
  RunningMoments rate;

  double ber() const { return bits_total ? static_cast<double>(bit_errors) / static_cast<double>(bits_total) : 0.0; }
  double ber_sem() const { return ber_moments.sem(); }
  double sum_rate_mean() const { return rate.mean; }
  double sum_rate_sem() const { return rate.sem(); }
  std::uint64_t realizations() const { return rate.n; }
};

/// Pools two records of the same key; throws std::invalid_argument on key
/// mismatch.
MetricRecord merge(const MetricRecord& a, const MetricRecord& b);

/// Allocator health gathered across trials.
struct AllocationDiagnostics {
  /// Largest constraint row load after any APA/R-APA iteration, per mode.
  double max_load_per_antenna = 0.0;
  double max_load_total_power = 0.0;
  /// Largest tr(P N N^H P^H) - E_tx seen in total-power mode.
  double max_power_excess = -std::numeric_limits<double>::infinity();
  std::uint64_t runs = 0;
  std::uint64_t non_monotone_runs = 0;
  /// R-APA vs APA robust-cost comparisons on the same precoder.
  std::uint64_t robust_comparisons = 0;
  std::uint64_t robust_violations = 0;
  /// max over comparisons of robust_cost(R-APA) - robust_cost(APA).
  double worst_robust_gap = -std::numeric_limits<double>::infinity();

  void merge(const AllocationDiagnostics& other);
};

struct TrialResult {
  std::vector<MetricRecord> records;
  AllocationDiagnostics allocation;
};

class TrialError : public std::runtime_error {
 public:
  TrialError(std::size_t scenario, std::uint64_t trial, const std::string& what)
      : std::runtime_error(what), scenario_(scenario), trial_(trial) {}
  std::size_t scenario() const { return scenario_; }
  std::uint64_t trial() const { return trial_; }

 private:
  std::size_t scenario_;
  std::uint64_t trial_;
};

/// Thrown by run_sweep when more than 10% of a scenario's trials fail.
class SweepAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One channel realization of scenario `scenario` with every
/// (SNR, precoder, allocator) cell evaluated on common random frames.
/// Throws TrialError when the realization cannot be processed.
TrialResult run_trial(const SweepConfig& config, std::size_t scenario, std::uint64_t trial);

struct ScenarioDiagnostics {
  Topology topology = Topology::CellFree;
  std::uint64_t trials = 0;
  std::uint64_t failed = 0;
  /// First few failure messages, in trial order.
  std::vector<std::string> failures;
};

struct SweepDiagnostics {
  std::vector<ScenarioDiagnostics> scenarios;
  AllocationDiagnostics allocation;
  int threads = 1;
  double seconds = 0.0;
};

struct SweepResult {
  std::vector<MetricRecord> records;  // sorted by key
  SweepDiagnostics diagnostics;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every trial of every scenario, merging in trial order so the result
/// does not depend on the thread count.
SweepResult run_sweep(const SweepConfig& config, const ProgressFn& progress = {});

/// SNR at which the BER curves of two topologies cross for one
/// (precoder, allocator), by linear interpolation of the BER difference
/// between grid points. Empty when the curves do not cross.
std::optional<double> crossover_snr(const std::vector<MetricRecord>& records, PrecoderKind precoder,
                                    AllocatorKind allocator, Topology a = Topology::CellFree,
                                    Topology b = Topology::MultiCell);

}  // namespace mimosim
