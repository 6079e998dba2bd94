#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mimosim/engine.hpp"

namespace mimosim {

inline constexpr const char* kResultsHeader =
    "topology,precoder,allocator,snr_db,ber,ber_ci95,sum_rate,sum_rate_sem,bits_total,realizations";

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// results.csv contents: the header, then one row per record in key order.
/// Reals are printed with 17 significant digits; ber_ci95 is 1.96 times the
/// standard error of the per-realization BER.
std::string results_csv(const std::vector<MetricRecord>& records);

/// One parsed results.csv row.
struct ResultRow {
  std::string topology;
  std::string precoder;
  std::string allocator;
  double snr_db = 0.0;
  double ber = 0.0;
  double ber_ci95 = 0.0;
  double sum_rate = 0.0;
  double sum_rate_sem = 0.0;
  std::uint64_t bits_total = 0;
  std::uint64_t realizations = 0;
};

/// Parses results.csv text; throws OutputError on a wrong header or a
/// malformed row.
std::vector<ResultRow> parse_results_csv(const std::string& text);

struct RunInfo {
  std::string config_path;
  std::string started_utc;
};

/// Run manifest as JSON text: version, seed, the configuration (as an INI
/// echo and structured), per-scenario trial and failure counts, per-cell
/// realization counts, allocator diagnostics, crossover SNRs, duration.
std::string manifest_json(const SweepConfig& config, const SweepResult& result, const RunInfo& info = {});

/// Writes results.csv and manifest.json into `out_dir`, creating it if
/// needed. Throws OutputError when records are empty or the directory is
/// not writable.
void write_results(const SweepConfig& config, const SweepResult& result, const std::string& out_dir,
                   const RunInfo& info = {});

/// Library version string.
const char* version();

}  // namespace mimosim
