#include "optomech/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "optomech/errors.hpp"
#include "optomech/numfmt.hpp"

namespace optomech {

SystemParams Config::to_system() const {
  return SystemParams{
      CavityParams{two_pi * system.f_c, two_pi * system.kappa},
      MechanicalParams{two_pi * system.f_m, two_pi * system.gamma_m0, system.mass},
      CouplingParams{two_pi * system.g},
      ThermalEnvironment{system.T_0, system.T_p},
  };
}

KerrCavity Config::to_kerr() const {
  return KerrCavity{two_pi * kerr.K,
                    CavityParams{two_pi * system.f_c, two_pi * system.kappa}};
}

HeatingModel Config::to_heating() const {
  return HeatingModel{heating.alpha, heating.beta, heating.eta, heating.enabled};
}

NoiseModel Config::to_noise() const {
  return NoiseModel{noise.imprecision_ref, noise.P_ref};
}

namespace {

struct FieldRefs {
  std::map<std::string, double*> nums;
  bool* enabled;
};

FieldRefs field_refs(Config& c) {
  return FieldRefs{
      {
          {"system.f_c", &c.system.f_c},
          {"system.kappa", &c.system.kappa},
          {"system.f_m", &c.system.f_m},
          {"system.gamma_m0", &c.system.gamma_m0},
          {"system.mass", &c.system.mass},
          {"system.g", &c.system.g},
          {"system.T_0", &c.system.T_0},
          {"system.T_p", &c.system.T_p},
          {"kerr.K", &c.kerr.K},
          {"heating.alpha", &c.heating.alpha},
          {"heating.beta", &c.heating.beta},
          {"heating.eta", &c.heating.eta},
          {"noise.imprecision_ref", &c.noise.imprecision_ref},
          {"noise.P_ref", &c.noise.P_ref},
      },
      &c.heating.enabled,
  };
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

void check_positive(const Config& c) {
  const std::pair<const char*, double> strictly_positive[] = {
      {"system.f_c", c.system.f_c},         {"system.kappa", c.system.kappa},
      {"system.f_m", c.system.f_m},         {"system.gamma_m0", c.system.gamma_m0},
      {"system.mass", c.system.mass},       {"system.g", c.system.g},
      {"system.T_0", c.system.T_0},         {"system.T_p", c.system.T_p},
      {"heating.beta", c.heating.beta},     {"noise.imprecision_ref", c.noise.imprecision_ref},
      {"noise.P_ref", c.noise.P_ref},
  };
  for (const auto& [name, v] : strictly_positive) {
    if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be positive");
  }
  const std::pair<const char*, double> nonnegative[] = {
      {"kerr.K", c.kerr.K},
      {"heating.alpha", c.heating.alpha},
      {"heating.eta", c.heating.eta},
  };
  for (const auto& [name, v] : nonnegative) {
    if (!(v >= 0.0)) throw ConfigError(std::string(name) + " must be nonnegative");
  }
  if (!(c.system.kappa < c.system.f_c))
    throw ConfigError("system.kappa must be below system.f_c");
}

}  // namespace

Config parse_config(std::string_view text) {
  Config cfg;
  FieldRefs refs = field_refs(cfg);
  std::set<std::string> seen;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                          : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    if (value.empty()) fail(line_no, "empty value for '" + key + "'");
    if (!seen.insert(key).second) fail(line_no, "duplicate key '" + key + "'");

    if (key == "heating.enabled") {
      if (value == "true" || value == "1")
        *refs.enabled = true;
      else if (value == "false" || value == "0")
        *refs.enabled = false;
      else
        fail(line_no, "heating.enabled must be true/false/1/0");
      continue;
    }
    const auto it = refs.nums.find(key);
    if (it == refs.nums.end()) fail(line_no, "unknown key '" + key + "'");
    const auto parsed = parse_double(value);
    if (!parsed) fail(line_no, "invalid number for '" + key + "'");
    *it->second = *parsed;
  }

  std::vector<std::string> missing;
  for (const auto& [name, ptr] : refs.nums) {
    (void)ptr;
    if (!seen.count(name)) missing.push_back(name);
  }
  if (!seen.count("heating.enabled")) missing.push_back("heating.enabled");
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    std::string msg = "config missing required fields:";
    for (const auto& name : missing) msg += " " + name;
    throw ConfigError(msg);
  }

  check_positive(cfg);
  try {
    cfg.to_system().validate();
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("config rejected: ") + e.what());
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string Config::canonical_text() const {
  // Keys in byte-wise sorted order; parse_config(canonical_text()) round-trips.
  const std::pair<const char*, std::string> lines[] = {
      {"heating.alpha", format_double(heating.alpha)},
      {"heating.beta", format_double(heating.beta)},
      {"heating.enabled", heating.enabled ? "true" : "false"},
      {"heating.eta", format_double(heating.eta)},
      {"kerr.K", format_double(kerr.K)},
      {"noise.P_ref", format_double(noise.P_ref)},
      {"noise.imprecision_ref", format_double(noise.imprecision_ref)},
      {"system.T_0", format_double(system.T_0)},
      {"system.T_p", format_double(system.T_p)},
      {"system.f_c", format_double(system.f_c)},
      {"system.f_m", format_double(system.f_m)},
      {"system.g", format_double(system.g)},
      {"system.gamma_m0", format_double(system.gamma_m0)},
      {"system.kappa", format_double(system.kappa)},
      {"system.mass", format_double(system.mass)},
  };
  std::string out;
  for (const auto& [name, value] : lines) {
    out += name;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

std::uint64_t Config::digest() const {
  const std::string text = canonical_text();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char b : text) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string Config::digest_hex() const {
  static const char* hex = "0123456789abcdef";
  std::uint64_t v = digest();
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[v & 0xF];
    v >>= 4;
  }
  return out;
}

Config paper_device() {
  Config c;
  c.system.f_c = 5.22e9;
  c.system.kappa = 230e3;
  c.system.f_m = 1.525e6;
  c.system.gamma_m0 = 4.919354838709677;  // Q = 3.1e5
  c.system.mass = 6.2e-15;
  c.system.g = 6.4e12;
  c.system.T_0 = 0.05;
  c.system.T_p = 1e-5;
  c.kerr.K = 0.02609184197432596;  // pull equals kappa at P_c = 1 uW
  c.heating.alpha = 0.0;
  c.heating.beta = 1.0;
  c.heating.eta = 0.0;
  c.heating.enabled = false;
  c.noise.imprecision_ref = 1e-26;
  c.noise.P_ref = 5e-8;
  return c;
}

}  // namespace optomech
