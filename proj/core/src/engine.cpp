#include "mimosim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "mimosim/link.hpp"

namespace mimosim {

namespace {

constexpr std::size_t kMaxReportedFailures = 5;

std::uint64_t topology_label(Topology t) { return static_cast<std::uint64_t>(t) + 1; }

ConstraintMode constraint_for(Topology t) {
  return t == Topology::CellFree ? ConstraintMode::PerAntenna : ConstraintMode::TotalPower;
}

struct CellState {
  Precoder precoder;
  RVector amplitudes;
};

// Runs one allocator on one cell and returns its amplitudes; APA/R-APA
// runs also feed the diagnostics.
RVector allocate(AllocatorKind kind, const ChannelBlock& own, const Precoder& pre, const LinkBudget& budget,
                 const SweepConfig& config, ConstraintMode mode, AllocationDiagnostics& diag) {
  if (kind == AllocatorKind::UPA)
    return upa(AntennaLoad::for_mode(mode, pre.P, budget), mode).amplitudes();

  AllocationResult r = kind == AllocatorKind::APA
                           ? apa_run(own.H_hat, pre.P, pre.f, budget, config.apa, mode)
                           : rapa_run(own.H_hat, config.csit.g_tilde(own.beta), pre.P, pre.f, budget,
                                      config.apa, mode);
  double& worst = mode == ConstraintMode::PerAntenna ? diag.max_load_per_antenna : diag.max_load_total_power;
  worst = std::max(worst, r.max_load);
  if (mode == ConstraintMode::TotalPower)
    diag.max_power_excess = std::max(diag.max_power_excess, (r.max_load - 1.0) * budget.e_tx);
  ++diag.runs;
  if (!r.monotone) ++diag.non_monotone_runs;
  return r.allocation.amplitudes();
}

// Allocation with optional MMSE re-computation rounds.
CellState allocate_cell(PrecoderKind pk, AllocatorKind ak, const ChannelBlock& own, const Precoder& initial,
                        const LinkBudget& budget, const SweepConfig& config, ConstraintMode mode,
                        AllocationDiagnostics& diag) {
  CellState s{initial, allocate(ak, own, initial, budget, config, mode, diag)};
  if (pk != PrecoderKind::MMSE || ak == AllocatorKind::UPA) return s;
  for (int round = 0; round < config.alternations; ++round) {
    // The MMSE solution needs N invertible; floor vanishing streams.
    const double floor = 1e-6 * std::max(s.amplitudes.maxCoeff(), 1e-300);
    const RVector n0 = s.amplitudes.cwiseMax(floor);
    s.precoder = mmse_precoder(own.H_hat, n0, budget);
    s.amplitudes = allocate(ak, own, s.precoder, budget, config, mode, diag);
  }
  return s;
}

}  // namespace

std::vector<double> snr_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
    throw std::invalid_argument("snr grid needs lo <= hi and step > 0");
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  grid.reserve(static_cast<std::size_t>(count) + 1);
  for (long i = 0; i <= count; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  return grid;
}

void SweepConfig::validate() const {
  if (snr_db.empty()) throw std::invalid_argument("sweep.snr_db must not be empty");
  for (double s : snr_db)
    if (!std::isfinite(s)) throw std::invalid_argument("sweep.snr_db entries must be finite");
  if (realizations < 1) throw std::invalid_argument("sweep.realizations must be at least 1");
  if (frames < 1) throw std::invalid_argument("sweep.frames must be at least 1");
  if (precoders.empty()) throw std::invalid_argument("sweep.precoders must not be empty");
  if (allocators.empty()) throw std::invalid_argument("sweep.allocators must not be empty");
  if (scenarios.empty()) throw std::invalid_argument("sweep.topology must name at least one scenario");
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    scenarios[i].validate();
    for (std::size_t j = 0; j < i; ++j)
      if (scenarios[j].topology == scenarios[i].topology)
        throw std::invalid_argument("sweep.topology lists " + to_string(scenarios[i].topology) + " twice");
  }
  if (!(csit.sigma_e_sq >= 0.0 && csit.sigma_e_sq <= 1.0))
    throw std::invalid_argument("csit.sigma_e2 must lie in [0, 1]");
  apa.validate();
  if (alternations < 0) throw std::invalid_argument("apa.alternations must be non-negative");
  if (threads < 0) throw std::invalid_argument("sweep.threads must be non-negative");
  if (!(sigma_n_sq > 0.0)) throw std::invalid_argument("sweep.sigma_n2 must be positive");
}

bool operator<(const MetricKey& a, const MetricKey& b) {
  return std::make_tuple(to_string(a.topology), to_string(a.precoder), to_string(a.allocator), a.snr_db) <
         std::make_tuple(to_string(b.topology), to_string(b.precoder), to_string(b.allocator), b.snr_db);
}

void RunningMoments::add(double x) {
  ++n;
  const double d = x - mean;
  mean += d / static_cast<double>(n);
  m2 += d * (x - mean);
}

void RunningMoments::merge(const RunningMoments& o) {
  if (o.n == 0) return;
  if (n == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n);
  const double nb = static_cast<double>(o.n);
  const double total = na + nb;
  const double d = o.mean - mean;
  mean = (na * mean + nb * o.mean) / total;
  m2 = m2 + o.m2 + d * d * na * nb / total;
  n += o.n;
}

double RunningMoments::variance() const { return n < 2 ? 0.0 : m2 / static_cast<double>(n - 1); }

double RunningMoments::sem() const { return n < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n)); }

MetricRecord merge(const MetricRecord& a, const MetricRecord& b) {
  if (!(a.key == b.key)) throw std::invalid_argument("merge: records have different keys");
  MetricRecord out = a;
  out.bit_errors += b.bit_errors;
  out.bits_total += b.bits_total;
  out.ber_moments.merge(b.ber_moments);
  out.rate.merge(b.rate);
  return out;
}

void AllocationDiagnostics::merge(const AllocationDiagnostics& o) {
  max_load_per_antenna = std::max(max_load_per_antenna, o.max_load_per_antenna);
  max_load_total_power = std::max(max_load_total_power, o.max_load_total_power);
  max_power_excess = std::max(max_power_excess, o.max_power_excess);
  runs += o.runs;
  non_monotone_runs += o.non_monotone_runs;
  robust_comparisons += o.robust_comparisons;
  robust_violations += o.robust_violations;
  worst_robust_gap = std::max(worst_robust_gap, o.worst_robust_gap);
}

TrialResult run_trial(const SweepConfig& config, std::size_t scenario, std::uint64_t trial) {
  const ScenarioConfig& sc = config.scenarios.at(scenario);
  const std::uint64_t label = topology_label(sc.topology);
  const std::uint64_t seed = config.master_seed;
  try {
    RandomStream geo_rng = RandomStream::derive(seed, trial, StreamPurpose::Geometry).child(label);
    RandomStream shadow_rng = RandomStream::derive(seed, trial, StreamPurpose::Shadowing).child(label);
    const Geometry geometry = place_topology(sc, geo_rng);
    LinkGains gains = large_scale_coefficients(geometry, sc, shadow_rng);
    if (sc.fading_mode == FadingMode::LargeScale && sc.normalization == GainNormalization::MeanDb)
      normalize_mean_db(gains);
    const ChannelRealization channel = draw_channels(
        gains, config.csit.sigma_e_sq, RandomStream::derive(seed, trial, StreamPurpose::Channel).child(label));

    const int C = sc.cells();
    const Eigen::Index rx = sc.rx_dim();
    const ConstraintMode mode = constraint_for(sc.topology);
    const RandomStream frame_root = RandomStream::derive(seed, trial, StreamPurpose::Frames).child(label);
    const bool compare_robust = config.alternations == 0 && config.csit.sigma_e_sq > 0.0 &&
                                std::count(config.allocators.begin(), config.allocators.end(), AllocatorKind::APA) &&
                                std::count(config.allocators.begin(), config.allocators.end(), AllocatorKind::RAPA);

    TrialResult out;
    const auto n_bits = static_cast<std::size_t>(2 * rx * config.frames);
    for (std::size_t si = 0; si < config.snr_db.size(); ++si) {
      const double snr = config.snr_db[si];
      const LinkBudget budget = LinkBudget::from_snr_db(snr, sc.tx_dim(), config.sigma_n_sq);

      // Common random numbers: the same bits and noise for every scheme.
      std::vector<Bits> bits(C);
      std::vector<CMatrix> symbols(C);
      for (int c = 0; c < C; ++c) {
        RandomStream r = frame_root.child({si, static_cast<std::uint64_t>(c), 0});
        bits[c] = random_bits(n_bits, r);
        symbols[c] = qpsk_frame(bits[c], rx);
      }

      for (PrecoderKind pk : config.precoders) {
        std::vector<Precoder> initial(C);
        for (int c = 0; c < C; ++c)
          initial[c] = make_precoder(pk, channel.block(c, c).H_hat, RVector::Ones(rx), budget);

        std::vector<RVector> apa_amps(C);
        std::vector<RVector> rapa_amps(C);
        for (AllocatorKind ak : config.allocators) {
          std::vector<CMatrix> P(C);
          std::vector<RVector> amps(C);
          std::vector<double> gain_f(C);
          for (int c = 0; c < C; ++c) {
            CellState s = allocate_cell(pk, ak, channel.block(c, c), initial[c], budget, config, mode, out.allocation);
            P[c] = std::move(s.precoder.P);
            gain_f[c] = s.precoder.f;
            amps[c] = std::move(s.amplitudes);
          }
          if (ak == AllocatorKind::APA) apa_amps = amps;
          if (ak == AllocatorKind::RAPA) rapa_amps = amps;

          std::vector<CMatrix> x(C);
          for (int c = 0; c < C; ++c) x[c] = transmit(symbols[c], P[c], amps[c]);

          BitCount count;
          double rate = 0.0;
          for (int c = 0; c < C; ++c) {
            RandomStream noise = frame_root.child({si, static_cast<std::uint64_t>(c), 1});
            const CMatrix y = receive_cell(channel, c, x, budget.sigma_n_sq, budget.rho_f, noise);
            const CVector g = effective_gains(channel.block(c, c).H, P[c], amps[c], budget.rho_f);
            const BitCount bc = ber_count(bits[c], detect(y, g, gain_f[c] > 0.0 ? gain_f[c] : 1.0));
            count.errors += bc.errors;
            count.total += bc.total;
            rate += sum_rate_cell(channel, c, P, amps, budget.rho_f, budget.sigma_n_sq);
          }

          MetricRecord rec;
          rec.key = {sc.topology, pk, ak, snr};
          rec.bit_errors = count.errors;
          rec.bits_total = count.total;
          rec.ber_moments.add(static_cast<double>(count.errors) / static_cast<double>(count.total));
          rec.rate.add(rate);
          out.records.push_back(rec);
        }

        if (compare_robust) {
          for (int c = 0; c < C; ++c) {
            const ChannelBlock& own = channel.block(c, c);
            const RVector gt = config.csit.g_tilde(own.beta);
            const Precoder& pre = initial[c];
            const double r_rapa = robust_cost(own.H_hat, gt, pre.P, rapa_amps[c], pre.f, budget);
            const double r_apa = robust_cost(own.H_hat, gt, pre.P, apa_amps[c], pre.f, budget);
            const double gap = r_rapa - r_apa;
            auto& d = out.allocation;
            ++d.robust_comparisons;
            d.worst_robust_gap = std::max(d.worst_robust_gap, gap);
            if (gap > 1e-9) ++d.robust_violations;
          }
        }
      }
    }
    return out;
  } catch (const TrialError&) {
    throw;
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg << to_string(sc.topology) << " trial " << trial << ": " << e.what();
    throw TrialError(scenario, trial, msg.str());
  }
}

SweepResult run_sweep(const SweepConfig& config, const ProgressFn& progress) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();

  const std::size_t per_scenario = static_cast<std::size_t>(config.realizations);
  const std::size_t total = per_scenario * config.scenarios.size();
  int threads = config.threads > 0 ? config.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(total, 1)));

  std::vector<std::optional<TrialResult>> results(total);
  std::vector<std::string> errors(total);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      const std::size_t s = job / per_scenario;
      const std::uint64_t trial = job % per_scenario;
      try {
        results[job] = run_trial(config, s, trial);
      } catch (const TrialError& e) {
        errors[job] = e.what();
      }
      const std::size_t finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, total);
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  SweepResult out;
  out.diagnostics.threads = threads;
  std::vector<MetricRecord> merged;
  for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
    ScenarioDiagnostics sd;
    sd.topology = config.scenarios[s].topology;
    sd.trials = per_scenario;
    std::vector<MetricRecord> acc;
    for (std::size_t t = 0; t < per_scenario; ++t) {
      const std::size_t job = s * per_scenario + t;
      if (!results[job]) {
        ++sd.failed;
        if (sd.failures.size() < kMaxReportedFailures) sd.failures.push_back(errors[job]);
        continue;
      }
      const TrialResult& r = *results[job];
      out.diagnostics.allocation.merge(r.allocation);
      if (acc.empty()) {
        acc = r.records;
        continue;
      }
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = merge(acc[i], r.records[i]);
    }
    merged.insert(merged.end(), acc.begin(), acc.end());
    out.diagnostics.scenarios.push_back(sd);
    if (sd.failed * 10 > sd.trials) {
      std::ostringstream msg;
      msg << to_string(sd.topology) << ": " << sd.failed << " of " << sd.trials
          << " trials failed (limit 10%)";
      for (const auto& f : sd.failures) msg << "\n  " << f;
      throw SweepAborted(msg.str());
    }
  }

  std::stable_sort(merged.begin(), merged.end(),
                   [](const MetricRecord& a, const MetricRecord& b) { return a.key < b.key; });
  out.records = std::move(merged);
  out.diagnostics.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

std::optional<double> crossover_snr(const std::vector<MetricRecord>& records, PrecoderKind precoder,
                                    AllocatorKind allocator, Topology a, Topology b) {
  std::vector<std::pair<double, double>> diff;  // (snr, ber_a - ber_b)
  for (const auto& ra : records) {
    if (ra.key.topology != a || ra.key.precoder != precoder || ra.key.allocator != allocator) continue;
    for (const auto& rb : records) {
      if (rb.key.topology == b && rb.key.precoder == precoder && rb.key.allocator == allocator &&
          rb.key.snr_db == ra.key.snr_db)
        diff.emplace_back(ra.key.snr_db, ra.ber() - rb.ber());
    }
  }
  std::sort(diff.begin(), diff.end());
  for (std::size_t i = 0; i + 1 < diff.size(); ++i) {
    const auto [s0, d0] = diff[i];
    const auto [s1, d1] = diff[i + 1];
    if (d0 == 0.0 && d1 == 0.0) continue;
    if (d0 == 0.0) return s0;
    if (d0 * d1 < 0.0) return s0 + (s1 - s0) * d0 / (d0 - d1);
  }
  return std::nullopt;
}

}  // namespace mimosim
