#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "mimosim/engine.hpp"

namespace mimosim {

/// Configuration problem; the message starts with the offending key path
/// (for example "apa.mu: ...").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Command-line values that take precedence over the file.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> snr;        // "lo:hi:step" or "a,b,c"
  std::optional<std::string> scenario;   // "cf", "mc" or "cf,mc"
  std::optional<std::string> precoders;  // comma list
  std::optional<std::string> allocators;
  std::optional<int> trials;
  std::optional<double> sigma_e2;
  std::optional<int> threads;
  std::optional<int> frames;
};

/// Parses an INI document. Sections and keys:
///
///   [sweep]  topology, snr_db, realizations, frames, precoders, allocators,
///            seed, threads, sigma_n2
///   [cf]     M, K, area_side_m, d_min_m
///   [mc]     cells, N_t, N_r, N_k, cell_radius_m, d_min_m
///   [fading] mode (iid|large_scale), path_loss_exponent,
///            shadowing_sigma_db, normalization (none|mean_db)
///   [csit]   sigma_e2
///   [apa]    mu, iterations, step (fixed|normalized|scaled), initial_eta,
///            alternations
///
/// Keys before the first section are shorthand for topology (sweep) and
/// M, K (cf). Unknown sections or keys are rejected.
SweepConfig parse_config_text(const std::string& text, const ConfigOverrides& overrides = {});
SweepConfig parse_config(const std::string& path, const ConfigOverrides& overrides = {});

/// Renders `config` as an INI document that parse_config_text reads back to
/// the same configuration.
std::string config_to_ini(const SweepConfig& config);

const char* step_name(StepRule rule);

/// Grid in either "lo:hi:step" or comma-list form.
std::vector<double> parse_snr_spec(const std::string& spec);

}  // namespace mimosim
