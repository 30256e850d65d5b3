#include "leakmap/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "leakmap/error.hpp"
#include "leakmap/io.hpp"

namespace leakmap {

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& v : violations) msg += "\n  - " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Parsers return false on malformed input.
bool parse_value(std::string_view s, double& out) {
  std::string tmp(s);
  if (tmp.empty()) return false;
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size();
}

template <typename Int>
bool parse_value(std::string_view s, Int& out) {
  if (!s.empty() && s.front() == '-') return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_value(std::string_view s, int& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_value(std::string_view s, bool& out) {
  if (s == "true" || s == "1" || s == "yes") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "no") {
    out = false;
    return true;
  }
  return false;
}

bool parse_value(std::string_view s, std::string& out) {
  out = std::string(s);
  return true;
}

std::string to_text(double v) { return io::format_double(v); }
std::string to_text(bool v) { return v ? "true" : "false"; }
std::string to_text(const std::string& v) { return v; }
template <typename Int>
std::string to_text(Int v) {
  return std::to_string(v);
}

struct Field {
  std::string key;
  std::function<bool(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Field make_field(std::string key, T ExperimentConfig::*member) {
  return {std::move(key),
          [member](ExperimentConfig& c, std::string_view v) { return parse_value(v, c.*member); },
          [member](const ExperimentConfig& c) { return to_text(c.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      make_field("map.K", &ExperimentConfig::K),
      make_field("quantum.N", &ExperimentConfig::N),
      make_field("quantum.exclude_zero_modes", &ExperimentConfig::exclude_zero_modes),
      make_field("quantum.dump_schur_vectors", &ExperimentConfig::dump_schur_vectors),
      make_field("classical.grid_q", &ExperimentConfig::grid_q),
      make_field("classical.grid_p", &ExperimentConfig::grid_p),
      make_field("classical.t_max", &ExperimentConfig::t_max),
      make_field("classical.ftle_iterations", &ExperimentConfig::ftle_iterations),
      make_field("classical.histogram_bins", &ExperimentConfig::histogram_bins),
      make_field("classical.cutoff_tolerance", &ExperimentConfig::cutoff_tolerance),
      make_field("classical.exclude_non_escaping", &ExperimentConfig::exclude_non_escaping),
      make_field("classical.random_ics", &ExperimentConfig::random_ics),
      make_field("leak.center", &ExperimentConfig::leak_center),
      make_field("leak.width", &ExperimentConfig::leak_width),
      make_field("scan.count", &ExperimentConfig::scan_count),
      make_field("scan.lambda_min_dwell", &ExperimentConfig::scan_lambda_min_dwell),
      make_field("husimi.resolution_q", &ExperimentConfig::husimi_q),
      make_field("husimi.resolution_p", &ExperimentConfig::husimi_p),
      make_field("husimi.mean_states", &ExperimentConfig::mean_states),
      make_field("husimi.dwell_bin_width", &ExperimentConfig::dwell_bin_width),
      make_field("run.seed", &ExperimentConfig::seed),
      make_field("run.output_dir", &ExperimentConfig::output_dir),
  };
  return table;
}

const Field* find_field(std::string_view key) {
  for (const Field& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

// Returns an error message, empty on success.
std::string try_set(ExperimentConfig& config, std::string_view key, std::string_view value) {
  const Field* f = find_field(key);
  if (!f) return "unknown key '" + std::string(key) + "'";
  if (!f->set(config, value))
    return "bad value '" + std::string(value) + "' for key '" + std::string(key) + "'";
  return {};
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.push_back(f.key);
  return keys;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::vector<std::string> errors;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos)
      line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back("line " + std::to_string(line_no) + ": malformed section header");
        continue;
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    const std::string key =
        (section.empty() ? "" : section + ".") + std::string(trim(line.substr(0, eq)));
    const std::string msg = try_set(config, key, trim(line.substr(eq + 1)));
    if (!msg.empty()) errors.push_back("line " + std::to_string(line_no) + ": " + msg);
  }
  for (std::string& v : config_violations(config)) errors.push_back(std::move(v));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path.string() + "'"});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const Field& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string sec = f.key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << '[' << sec << "]\n";
      section = sec;
    }
    out << f.key.substr(dot + 1) << " = " << f.get(config) << '\n';
  }
  return out.str();
}

void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
  const std::string msg = try_set(config, key, value);
  if (!msg.empty()) throw ConfigError({msg});
}

std::string get_config_value(const ExperimentConfig& config, std::string_view key) {
  const Field* f = find_field(key);
  if (!f) throw ConfigError({"unknown key '" + std::string(key) + "'"});
  return f->get(config);
}

void apply_overrides(ExperimentConfig& config,
                     const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::vector<std::string> errors;
  for (const auto& [key, value] : overrides) {
    const std::string msg = try_set(config, key, value);
    if (!msg.empty()) errors.push_back(msg);
  }
  for (std::string& v : config_violations(config)) errors.push_back(std::move(v));
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

std::vector<std::string> config_violations(const ExperimentConfig& c) {
  std::vector<std::string> v;
  if (!std::isfinite(c.K)) v.push_back("map.K must be finite");
  if (c.N < 2) v.push_back("quantum.N must be >= 2");
  if (c.grid_q < 2 || c.grid_p < 2) v.push_back("classical.grid_q and grid_p must be >= 2");
  if (c.t_max < 1) v.push_back("classical.t_max must be >= 1");
  if (c.ftle_iterations < 1) v.push_back("classical.ftle_iterations must be >= 1");
  if (c.histogram_bins < 1) v.push_back("classical.histogram_bins must be >= 1");
  if (!(c.cutoff_tolerance > 0.0)) v.push_back("classical.cutoff_tolerance must be > 0");
  if (!std::isfinite(c.leak_center)) v.push_back("leak.center must be finite");
  if (!(c.leak_width >= 0.0 && c.leak_width <= 1.0)) v.push_back("leak.width must lie in [0, 1]");
  if (c.scan_count < 1) v.push_back("scan.count must be >= 1");
  if (c.husimi_q < 2 || c.husimi_p < 2)
    v.push_back("husimi.resolution_q and resolution_p must be >= 2");
  if (c.mean_states < 1) v.push_back("husimi.mean_states must be >= 1");
  if (c.N >= 2 && c.mean_states > static_cast<std::size_t>(c.N))
    v.push_back("husimi.mean_states must not exceed quantum.N");
  if (!(c.dwell_bin_width > 0.0)) v.push_back("husimi.dwell_bin_width must be > 0");
  if (c.output_dir.empty()) v.push_back("run.output_dir must not be empty");
  return v;
}

void validate(const ExperimentConfig& config) {
  auto v = config_violations(config);
  if (!v.empty()) throw ConfigError(std::move(v));
}

}  // namespace leakmap
