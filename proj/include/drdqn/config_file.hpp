#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "drdqn/agents.hpp"

namespace drdqn {

/// Config problem with the 1-based line it came from (0 when not line-specific).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses `key = value` lines (`#` starts a comment) over `base`. Unknown
/// keys, malformed lines and out-of-range values are errors.
AgentConfig parse_config(std::string_view text, const AgentConfig& base = AgentConfig::full_scale());

/// Reads and parses a config file; missing keys keep the values in `base`.
AgentConfig load_config(const std::filesystem::path& path, const AgentConfig& base = AgentConfig::full_scale());

/// Every key, one per line, in a form parse_config reads back exactly.
std::string format_config(const AgentConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace drdqn
