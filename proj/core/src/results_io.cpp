#include "mimosim/results_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mimosim/config.hpp"

namespace mimosim {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_field(const std::string& s, std::size_t line, const char* name) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw OutputError("results.csv line " + std::to_string(line) + ": bad " + name + " '" + s + "'");
  return v;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw OutputError("failed writing " + path.string());
}

nlohmann::json scenario_json(const ScenarioConfig& s) {
  nlohmann::json j;
  j["topology"] = to_string(s.topology);
  if (s.topology == Topology::CellFree) {
    j["M"] = s.M;
    j["K"] = s.K;
    j["area_side_m"] = s.area_side_m;
  } else {
    j["cells"] = s.n_cells;
    j["N_t"] = s.N_t;
    j["N_r"] = s.N_r;
    j["N_k"] = s.N_k;
    j["cell_radius_m"] = s.cell_radius_m;
  }
  j["d_min_m"] = s.d_min_m;
  j["fading_mode"] = s.fading_mode == FadingMode::IidUnit ? "iid" : "large_scale";
  j["path_loss_exponent"] = s.path_loss_exponent;
  j["shadowing_sigma_db"] = s.shadowing_sigma_db;
  j["normalization"] = s.normalization == GainNormalization::None ? "none" : "mean_db";
  return j;
}

}  // namespace

const char* version() { return MIMOSIM_VERSION; }

std::string results_csv(const std::vector<MetricRecord>& records) {
  std::vector<MetricRecord> sorted = records;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const MetricRecord& a, const MetricRecord& b) { return a.key < b.key; });
  std::ostringstream o;
  o << kResultsHeader << "\n";
  for (const auto& r : sorted) {
    o << to_string(r.key.topology) << ',' << to_string(r.key.precoder) << ',' << to_string(r.key.allocator) << ','
      << num(r.key.snr_db) << ',' << num(r.ber()) << ',' << num(1.96 * r.ber_sem()) << ','
      << num(r.sum_rate_mean()) << ',' << num(r.sum_rate_sem()) << ',' << r.bits_total << ','
      << r.realizations() << "\n";
  }
  return o.str();
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader)
    throw OutputError("results.csv: unexpected header '" + line + "'");
  std::vector<ResultRow> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 10)
      throw OutputError("results.csv line " + std::to_string(n) + ": expected 10 fields, got " +
                        std::to_string(f.size()));
    ResultRow r;
    r.topology = f[0];
    r.precoder = f[1];
    r.allocator = f[2];
    r.snr_db = parse_field<double>(f[3], n, "snr_db");
    r.ber = parse_field<double>(f[4], n, "ber");
    r.ber_ci95 = parse_field<double>(f[5], n, "ber_ci95");
    r.sum_rate = parse_field<double>(f[6], n, "sum_rate");
    r.sum_rate_sem = parse_field<double>(f[7], n, "sum_rate_sem");
    r.bits_total = parse_field<std::uint64_t>(f[8], n, "bits_total");
    r.realizations = parse_field<std::uint64_t>(f[9], n, "realizations");
    rows.push_back(r);
  }
  return rows;
}

std::string manifest_json(const SweepConfig& config, const SweepResult& result, const RunInfo& info) {
  using nlohmann::json;
  json m;
  m["artifact"] = "mimosim";
  m["version"] = version();
  m["master_seed"] = config.master_seed;
  if (!info.config_path.empty()) m["config_path"] = info.config_path;
  if (!info.started_utc.empty()) m["started_utc"] = info.started_utc;
  m["config_ini"] = config_to_ini(config);

  json cfg;
  cfg["snr_db"] = config.snr_db;
  cfg["realizations"] = config.realizations;
  cfg["frames"] = config.frames;
  for (auto p : config.precoders) cfg["precoders"].push_back(to_string(p));
  for (auto a : config.allocators) cfg["allocators"].push_back(to_string(a));
  for (const auto& s : config.scenarios) cfg["scenarios"].push_back(scenario_json(s));
  cfg["sigma_e2"] = config.csit.sigma_e_sq;
  cfg["sigma_n2"] = config.sigma_n_sq;
  cfg["apa"] = {{"mu", config.apa.mu},
                {"iterations", config.apa.T},
                {"step", step_name(config.apa.step_rule)},
                {"initial_eta", config.apa.initial_eta},
                {"alternations", config.alternations}};
  m["config"] = cfg;

  const auto& d = result.diagnostics;
  for (const auto& s : d.scenarios) {
    m["trials"].push_back({{"topology", to_string(s.topology)},
                           {"attempted", s.trials},
                           {"failed", s.failed},
                           {"failures", s.failures}});
  }
  for (const auto& r : result.records) {
    m["cells"].push_back({{"topology", to_string(r.key.topology)},
                          {"precoder", to_string(r.key.precoder)},
                          {"allocator", to_string(r.key.allocator)},
                          {"snr_db", r.key.snr_db},
                          {"realizations", r.realizations()},
                          {"bit_errors", r.bit_errors},
                          {"bits_total", r.bits_total}});
  }
  const auto& a = d.allocation;
  json alloc = {{"runs", a.runs},
                {"non_monotone_runs", a.non_monotone_runs},
                {"max_load_per_antenna", a.max_load_per_antenna},
                {"max_load_total_power", a.max_load_total_power},
                {"robust_comparisons", a.robust_comparisons},
                {"robust_violations", a.robust_violations}};
  alloc["max_power_excess"] = std::isfinite(a.max_power_excess) ? json(a.max_power_excess) : json(nullptr);
  alloc["worst_robust_gap"] = std::isfinite(a.worst_robust_gap) ? json(a.worst_robust_gap) : json(nullptr);
  m["allocation"] = alloc;

  const bool both = std::any_of(config.scenarios.begin(), config.scenarios.end(),
                                [](const auto& s) { return s.topology == Topology::CellFree; }) &&
                    std::any_of(config.scenarios.begin(), config.scenarios.end(),
                                [](const auto& s) { return s.topology == Topology::MultiCell; });
  json cross = json::array();
  if (both) {
    for (auto p : config.precoders) {
      for (auto al : config.allocators) {
        const auto x = crossover_snr(result.records, p, al);
        cross.push_back({{"precoder", to_string(p)},
                         {"allocator", to_string(al)},
                         {"snr_db", x ? json(*x) : json(nullptr)}});
      }
    }
  }
  m["crossover_cf_mc"] = cross;
  m["threads"] = d.threads;
  m["duration_s"] = d.seconds;
  return m.dump(2) + "\n";
}

void write_results(const SweepConfig& config, const SweepResult& result, const std::string& out_dir,
                   const RunInfo& info) {
  if (result.records.empty()) throw OutputError("no records to write");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw OutputError("cannot create output directory '" + out_dir + "': " + ec.message());
  write_file(fs::path(out_dir) / "results.csv", results_csv(result.records));
  write_file(fs::path(out_dir) / "manifest.json", manifest_json(config, result, info));
}

}  // namespace mimosim
