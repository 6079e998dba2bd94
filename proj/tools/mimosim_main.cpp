// mimosim: runs a BER / sum-rate sweep described by an INI file and writes
// results.csv plus manifest.json.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>

#include <CLI11.hpp>

#include "mimosim/config.hpp"
#include "mimosim/engine.hpp"
#include "mimosim/results_io.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Massive MIMO downlink BER / sum-rate Monte Carlo sweep"};
  app.set_version_flag("--version", std::string(mimosim::version()));

  std::string config_path;
  std::string out_dir = "results";
  bool quiet = false;
  mimosim::ConfigOverrides ov;
  std::uint64_t seed = 0;
  std::string snr, scenario, precoder, alloc;
  int trials = 0, threads = 0, frames = 0;
  double sigma_e2 = 0.0;

  app.add_option("--config", config_path, "INI configuration file")->required();
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  auto* o_seed = app.add_option("--seed", seed, "Master seed");
  auto* o_snr = app.add_option("--snr", snr, "SNR grid lo:hi:step or a,b,c (dB)");
  auto* o_scn = app.add_option("--scenario", scenario, "cf, mc or cf,mc");
  auto* o_pre = app.add_option("--precoder", precoder, "Comma list of MF, ZF, MMSE");
  auto* o_alloc = app.add_option("--alloc", alloc, "Comma list of UPA, APA, RAPA");
  auto* o_trials = app.add_option("--trials", trials, "Channel realizations per SNR point");
  auto* o_sigma = app.add_option("--sigma-e2", sigma_e2, "CSIT error variance");
  auto* o_threads = app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  auto* o_frames = app.add_option("--frames", frames, "Frames per realization");
  app.add_flag("-q,--quiet", quiet, "No progress line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (*o_seed) ov.seed = seed;
  if (*o_snr) ov.snr = snr;
  if (*o_scn) ov.scenario = scenario;
  if (*o_pre) ov.precoders = precoder;
  if (*o_alloc) ov.allocators = alloc;
  if (*o_trials) ov.trials = trials;
  if (*o_sigma) ov.sigma_e2 = sigma_e2;
  if (*o_threads) ov.threads = threads;
  if (*o_frames) ov.frames = frames;

  mimosim::SweepConfig cfg;
  try {
    cfg = mimosim::parse_config(config_path, ov);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const mimosim::RunInfo info{config_path, utc_now()};
    mimosim::ProgressFn progress;
    if (!quiet) {
      progress = [](std::size_t done, std::size_t total) {
        if (done == total || done % 10 == 0) std::fprintf(stderr, "\rtrials %zu/%zu", done, total);
        if (done == total) std::fputc('\n', stderr);
      };
    }
    const mimosim::SweepResult result = mimosim::run_sweep(cfg, progress);
    mimosim::write_results(cfg, result, out_dir, info);
    for (const auto& s : result.diagnostics.scenarios) {
      if (s.failed)
        std::cerr << mimosim::to_string(s.topology) << ": skipped " << s.failed << " of " << s.trials
                  << " trials\n";
    }
    if (!quiet)
      std::cerr << "wrote " << result.records.size() << " records to " << out_dir << " in "
                << result.diagnostics.seconds << " s\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
