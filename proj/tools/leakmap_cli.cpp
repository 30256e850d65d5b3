// leakmap command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "leakmap/leakmap.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

int exit_code(lkm_status status) {
  switch (status) {
    case LKM_OK:
      return kExitOk;
    case LKM_ERR_NUMERICAL:
      return kExitNumerical;
    case LKM_ERR_INTERNAL:
      return kExitNumerical;
    default:
      // Config errors, unwritable output and bad arguments all need a user fix.
      return kExitConfig;
  }
}

// Turns "--key value" and "--key=value" extras into (key, value) pairs.
bool parse_overrides(const std::vector<std::string>& extras,
                     std::vector<std::pair<std::string, std::string>>& out, std::string& error) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0) {
      error = "unexpected argument '" + arg + "'";
      return false;
    }
    std::string key = arg.substr(2);
    if (const auto eq = key.find('='); eq != std::string::npos) {
      out.emplace_back(key.substr(0, eq), key.substr(eq + 1));
      continue;
    }
    if (i + 1 >= extras.size()) {
      error = "missing value for '" + arg + "'";
      return false;
    }
    out.emplace_back(std::move(key), extras[++i]);
  }
  return true;
}

struct ConfigHandle {
  lkm_config* ptr = nullptr;
  ~ConfigHandle() { lkm_config_destroy(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open standard map: classical escape, quantum resonances and Husimi entropies"};
  app.set_version_flag("--version", std::string(lkm_version()));
  app.require_subcommand(1);
  app.footer(
      "Any configuration key can be overridden as --section.key value, e.g. --leak.center 0.5.\n"
      "Set LEAKMAP_THREADS to limit worker threads.\n"
      "Exit codes: 0 success, 1 configuration error, 2 numerical failure.");

  std::string config_path;
  bool print_config = false;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"ftle-field", "Closed-map FTLE field and strip-mean scan"},
      {"open-classical", "Open classical map: dwell times, FTLE statistics, survival"},
      {"quantum", "Resonances, mean Husimi function and Wehrl entropies"},
      {"scan", "Leak-position scans, classical against quantum"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "INI-style configuration file");
    sub->add_flag("--print-config", print_config, "Print the effective configuration and exit");
    sub->allow_extras();
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  CLI::App* chosen = nullptr;
  for (CLI::App* sub : subs)
    if (sub->parsed()) chosen = sub;

  std::vector<std::pair<std::string, std::string>> overrides;
  std::string error;
  if (!parse_overrides(chosen->remaining(), overrides, error)) {
    std::fprintf(stderr, "error: %s\n", error.c_str());
    return kExitConfig;
  }

  ConfigHandle config;
  lkm_status status = lkm_config_create(&config.ptr);
  if (status == LKM_OK && !config_path.empty()) status = lkm_config_load(config.ptr, config_path.c_str());
  if (status != LKM_OK) {
    std::fprintf(stderr, "error: %s\n", lkm_last_error());
    return exit_code(status);
  }

  bool override_failed = false;
  for (const auto& [key, value] : overrides) {
    if (lkm_config_set(config.ptr, key.c_str(), value.c_str()) != LKM_OK) {
      std::fprintf(stderr, "error: %s\n", lkm_last_error());
      override_failed = true;
    }
  }
  status = lkm_config_validate(config.ptr);
  if (status != LKM_OK) std::fprintf(stderr, "error: %s\n", lkm_last_error());
  if (override_failed || status != LKM_OK) return kExitConfig;

  if (print_config) {
    std::size_t needed = 0;
    lkm_config_serialize(config.ptr, nullptr, 0, &needed);
    std::string text(needed, '\0');
    lkm_config_serialize(config.ptr, text.data(), text.size(), &needed);
    std::fputs(text.c_str(), stdout);
    return kExitOk;
  }

  status = lkm_run(config.ptr, chosen->get_name().c_str());
  if (status != LKM_OK) {
    std::fprintf(stderr, "error: %s\n", lkm_last_error());
    return exit_code(status);
  }
  return kExitOk;
}
