#include "mimosim/config.hpp"

#include <algorithm>
#include <cstdio>
#include <type_traits>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace mimosim {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError(key, "expected a number, got '" + v + "'");
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

template <typename T, typename Fn>
std::vector<T> parse_list(const std::string& key, const std::string& v, Fn parse_one) {
  std::vector<T> out;
  for (const auto& item : split(v, ',')) {
    try {
      out.push_back(parse_one(item));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, e.what());
    }
  }
  if (out.empty()) throw ConfigError(key, "list must not be empty");
  return out;
}

// Known keys per section; the root section holds the shorthand keys.
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"", {"topology", "M", "K"}},
      {"sweep",
       {"topology", "snr_db", "realizations", "frames", "precoders", "allocators", "seed", "threads", "sigma_n2"}},
      {"cf", {"M", "K", "area_side_m", "d_min_m"}},
      {"mc", {"cells", "N_t", "N_r", "N_k", "cell_radius_m", "d_min_m"}},
      {"fading", {"mode", "path_loss_exponent", "shadowing_sigma_db", "normalization"}},
      {"csit", {"sigma_e2"}},
      {"apa", {"mu", "iterations", "step", "initial_eta", "alternations"}},
  };
  return s;
}

// Flattens the tree to "section.key" -> value after checking the schema.
std::map<std::string, std::string> flatten(const pt::ptree& tree) {
  std::map<std::string, std::string> out;
  auto put = [&](const std::string& path, const std::string& value) {
    if (!out.emplace(path, value).second) throw ConfigError(path, "given more than once");
  };
  for (const auto& [name, node] : tree) {
    const bool is_section = !node.empty() || node.data().empty();
    if (!is_section) {
      if (!schema().at("").count(name)) throw ConfigError(name, "unknown key");
      put(name == "topology" ? "sweep.topology" : "cf." + name, node.data());
      continue;
    }
    const auto sec = schema().find(name);
    if (sec == schema().end() || name.empty()) throw ConfigError(name, "unknown section");
    for (const auto& [key, leaf] : node) {
      const std::string path = name + "." + key;
      if (!sec->second.count(key)) throw ConfigError(path, "unknown key");
      put(path, leaf.data());
    }
  }
  return out;
}

void apply(SweepConfig& cfg, ScenarioConfig& cf, ScenarioConfig& mc, std::vector<Topology>& topologies,
           const std::string& key, const std::string& v) {
  auto scenario_both = [&](auto fn) {
    fn(cf);
    fn(mc);
  };
  if (key == "sweep.topology") {
    topologies = parse_list<Topology>(key, v, parse_topology);
  } else if (key == "sweep.snr_db") {
    try {
      cfg.snr_db = parse_snr_spec(v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, e.what());
    }
  } else if (key == "sweep.realizations") {
    cfg.realizations = to_int<int>(key, v);
  } else if (key == "sweep.frames") {
    cfg.frames = to_int<int>(key, v);
  } else if (key == "sweep.precoders") {
    cfg.precoders = parse_list<PrecoderKind>(key, v, parse_precoder);
  } else if (key == "sweep.allocators") {
    cfg.allocators = parse_list<AllocatorKind>(key, v, parse_allocator);
  } else if (key == "sweep.seed") {
    cfg.master_seed = to_int<std::uint64_t>(key, v);
  } else if (key == "sweep.threads") {
    cfg.threads = to_int<int>(key, v);
  } else if (key == "sweep.sigma_n2") {
    cfg.sigma_n_sq = to_double(key, v);
  } else if (key == "cf.M") {
    cf.M = to_int<int>(key, v);
  } else if (key == "cf.K") {
    cf.K = to_int<int>(key, v);
  } else if (key == "cf.area_side_m") {
    cf.area_side_m = to_double(key, v);
  } else if (key == "cf.d_min_m") {
    cf.d_min_m = to_double(key, v);
  } else if (key == "mc.cells") {
    mc.n_cells = to_int<int>(key, v);
  } else if (key == "mc.N_t") {
    mc.N_t = to_int<int>(key, v);
  } else if (key == "mc.N_r") {
    mc.N_r = to_int<int>(key, v);
  } else if (key == "mc.N_k") {
    mc.N_k = to_int<int>(key, v);
  } else if (key == "mc.cell_radius_m") {
    mc.cell_radius_m = to_double(key, v);
  } else if (key == "mc.d_min_m") {
    mc.d_min_m = to_double(key, v);
  } else if (key == "fading.mode") {
    const std::string m = lower(trim(v));
    FadingMode mode;
    if (m == "iid" || m == "iid_unit" || m == "unit") mode = FadingMode::IidUnit;
    else if (m == "large_scale" || m == "largescale" || m == "pathloss") mode = FadingMode::LargeScale;
    else throw ConfigError(key, "expected iid or large_scale, got '" + v + "'");
    scenario_both([&](ScenarioConfig& s) { s.fading_mode = mode; });
  } else if (key == "fading.path_loss_exponent") {
    const double x = to_double(key, v);
    scenario_both([&](ScenarioConfig& s) { s.path_loss_exponent = x; });
  } else if (key == "fading.shadowing_sigma_db") {
    const double x = to_double(key, v);
    scenario_both([&](ScenarioConfig& s) { s.shadowing_sigma_db = x; });
  } else if (key == "fading.normalization") {
    const std::string m = lower(trim(v));
    GainNormalization g;
    if (m == "none") g = GainNormalization::None;
    else if (m == "mean_db") g = GainNormalization::MeanDb;
    else throw ConfigError(key, "expected none or mean_db, got '" + v + "'");
    scenario_both([&](ScenarioConfig& s) { s.normalization = g; });
  } else if (key == "csit.sigma_e2") {
    cfg.csit.sigma_e_sq = to_double(key, v);
  } else if (key == "apa.mu") {
    cfg.apa.mu = to_double(key, v);
  } else if (key == "apa.iterations") {
    cfg.apa.T = to_int<int>(key, v);
  } else if (key == "apa.step") {
    const std::string m = lower(trim(v));
    if (m == "fixed") cfg.apa.step_rule = StepRule::Fixed;
    else if (m == "normalized") cfg.apa.step_rule = StepRule::Normalized;
    else if (m == "scaled") cfg.apa.step_rule = StepRule::Scaled;
    else throw ConfigError(key, "expected fixed, normalized or scaled, got '" + v + "'");
  } else if (key == "apa.initial_eta") {
    cfg.apa.initial_eta = to_double(key, v);
  } else if (key == "apa.alternations") {
    cfg.alternations = to_int<int>(key, v);
  } else {
    throw ConfigError(key, "unknown key");
  }
}

std::string scenario_key(Topology t, const std::string& field) {
  if (field == "path_loss_exponent" || field == "shadowing_sigma_db") return "fading." + field;
  if (field == "n_cells") return "mc.cells";
  return (t == Topology::CellFree ? "cf." : "mc.") + field;
}

// Re-throws validation failures as ConfigError carrying the file key path.
void validate_with_paths(const SweepConfig& cfg) {
  for (const auto& sc : cfg.scenarios) {
    try {
      sc.validate();
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();  // "scenario.<field>: <what>"
      const auto dot = msg.find('.');
      const auto colon = msg.find(": ");
      if (dot == std::string::npos || colon == std::string::npos) throw ConfigError("", msg);
      throw ConfigError(scenario_key(sc.topology, msg.substr(dot + 1, colon - dot - 1)), msg.substr(colon + 2));
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();  // "<section.key> <what>"
    const auto space = msg.find(' ');
    if (space == std::string::npos) throw ConfigError("", msg);
    throw ConfigError(msg.substr(0, space), msg.substr(space + 1));
  }
}

}  // namespace

std::vector<double> parse_snr_spec(const std::string& spec) {
  auto number = [&](const std::string& v) {
    try {
      return to_double("", v);
    } catch (const ConfigError& e) {
      throw std::invalid_argument("SNR " + std::string(e.what()));
    }
  };
  const std::string s = trim(spec);
  if (s.find(':') != std::string::npos) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw std::invalid_argument("SNR range must be lo:hi:step, got '" + spec + "'");
    return snr_grid(number(parts[0]), number(parts[1]), number(parts[2]));
  }
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(number(item));
  if (out.empty()) throw std::invalid_argument("SNR list must not be empty");
  return out;
}

SweepConfig parse_config_text(const std::string& text, const ConfigOverrides& overrides) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    std::ostringstream msg;
    msg << "line " << e.line() << ": " << e.message();
    throw ConfigError("", "parse error at " + msg.str());
  }

  SweepConfig cfg;
  ScenarioConfig cf = ScenarioConfig::cell_free(64, 16);
  ScenarioConfig mc = ScenarioConfig::multi_cell(4, 16, 4);
  std::vector<Topology> topologies = {Topology::CellFree};
  for (const auto& [key, value] : flatten(tree)) apply(cfg, cf, mc, topologies, key, value);

  if (overrides.seed) cfg.master_seed = *overrides.seed;
  if (overrides.snr) {
    try {
      cfg.snr_db = parse_snr_spec(*overrides.snr);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("--snr", e.what());
    }
  }
  if (overrides.scenario) topologies = parse_list<Topology>("--scenario", *overrides.scenario, parse_topology);
  if (overrides.precoders) cfg.precoders = parse_list<PrecoderKind>("--precoder", *overrides.precoders, parse_precoder);
  if (overrides.allocators)
    cfg.allocators = parse_list<AllocatorKind>("--alloc", *overrides.allocators, parse_allocator);
  if (overrides.trials) cfg.realizations = *overrides.trials;
  if (overrides.sigma_e2) cfg.csit.sigma_e_sq = *overrides.sigma_e2;
  if (overrides.threads) cfg.threads = *overrides.threads;
  if (overrides.frames) cfg.frames = *overrides.frames;

  cfg.scenarios.clear();
  for (Topology t : topologies) cfg.scenarios.push_back(t == Topology::CellFree ? cf : mc);
  validate_with_paths(cfg);
  return cfg;
}

SweepConfig parse_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), overrides);
}

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (const auto& it : items) {
    if (!out.empty()) out += ",";
    if constexpr (std::is_same_v<T, double>) out += num(it);
    else out += to_string(it);
  }
  return out;
}

}  // namespace

const char* step_name(StepRule r) {
  switch (r) {
    case StepRule::Fixed: return "fixed";
    case StepRule::Normalized: return "normalized";
    case StepRule::Scaled: return "scaled";
  }
  return "scaled";
}

std::string config_to_ini(const SweepConfig& c) {
  std::vector<Topology> topologies;
  const ScenarioConfig* cf = nullptr;
  const ScenarioConfig* mc = nullptr;
  for (const auto& s : c.scenarios) {
    topologies.push_back(s.topology);
    (s.topology == Topology::CellFree ? cf : mc) = &s;
  }
  const ScenarioConfig* any = cf ? cf : mc;
  std::ostringstream o;
  o << "[sweep]\n"
    << "topology = " << join(topologies) << "\n"
    << "snr_db = " << join(c.snr_db) << "\n"
    << "realizations = " << c.realizations << "\n"
    << "frames = " << c.frames << "\n"
    << "precoders = " << join(c.precoders) << "\n"
    << "allocators = " << join(c.allocators) << "\n"
    << "seed = " << c.master_seed << "\n"
    << "threads = " << c.threads << "\n"
    << "sigma_n2 = " << num(c.sigma_n_sq) << "\n";
  if (cf) {
    o << "\n[cf]\n"
      << "M = " << cf->M << "\nK = " << cf->K << "\n"
      << "area_side_m = " << num(cf->area_side_m) << "\nd_min_m = " << num(cf->d_min_m) << "\n";
  }
  if (mc) {
    o << "\n[mc]\n"
      << "cells = " << mc->n_cells << "\nN_t = " << mc->N_t << "\nN_r = " << mc->N_r << "\nN_k = " << mc->N_k
      << "\ncell_radius_m = " << num(mc->cell_radius_m) << "\nd_min_m = " << num(mc->d_min_m) << "\n";
  }
  if (any) {
    o << "\n[fading]\n"
      << "mode = " << (any->fading_mode == FadingMode::IidUnit ? "iid" : "large_scale") << "\n"
      << "path_loss_exponent = " << num(any->path_loss_exponent) << "\n"
      << "shadowing_sigma_db = " << num(any->shadowing_sigma_db) << "\n"
      << "normalization = " << (any->normalization == GainNormalization::None ? "none" : "mean_db") << "\n";
  }
  o << "\n[csit]\n"
    << "sigma_e2 = " << num(c.csit.sigma_e_sq) << "\n"
    << "\n[apa]\n"
    << "mu = " << num(c.apa.mu) << "\n"
    << "iterations = " << c.apa.T << "\n"
    << "step = " << step_name(c.apa.step_rule) << "\n"
    << "initial_eta = " << num(c.apa.initial_eta) << "\n"
    << "alternations = " << c.alternations << "\n";
  return o.str();
}

}  // namespace mimosim
