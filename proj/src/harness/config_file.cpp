#include "drdqn/config_file.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <sstream>

namespace drdqn {

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : std::runtime_error(line ? fmt::format("config line {}: {}", line, message) : "config: " + message),
      line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument(fmt::format("{} expects a non-negative integer, got '{}'", key, v));
  }
  return out;
}

std::uint64_t parse_positive(std::string_view key, std::string_view v) {
  const auto n = parse_uint(key, v);
  if (n == 0) throw std::out_of_range(fmt::format("{} = {} is out of range (must be positive)", key, v));
  return n;
}

double parse_real(std::string_view key, std::string_view v) {
  // from_chars for doubles is not available everywhere yet; strtod on a copy.
  const std::string s(v);
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(d)) {
    throw std::invalid_argument(fmt::format("{} expects a real number, got '{}'", key, v));
  }
  return d;
}

double parse_in(std::string_view key, std::string_view v, double lo, double hi, bool hi_open = false) {
  const double d = parse_real(key, v);
  if (d < lo || d > hi || (hi_open && d == hi)) {
    throw std::out_of_range(fmt::format("{} = {} is out of range (must lie in [{}, {}{})", key, v, lo, hi,
                                        hi_open ? ")" : "]"));
  }
  return d;
}

double parse_positive_real(std::string_view key, std::string_view v) {
  const double d = parse_real(key, v);
  if (!(d > 0.0)) throw std::out_of_range(fmt::format("{} = {} is out of range (must be positive)", key, v));
  return d;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument(fmt::format("{} expects true or false, got '{}'", key, v));
}

std::string real(double v) { return fmt::format("{}", v); }

struct Key {
  std::string_view name;
  std::function<void(AgentConfig&, std::string_view)> set;
  std::function<std::string(const AgentConfig&)> get;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"iterations", [](AgentConfig& c, std::string_view v) { c.iterations = parse_uint("iterations", v); },
       [](const AgentConfig& c) { return std::to_string(c.iterations); }},
      {"minibatch_size",
       [](AgentConfig& c, std::string_view v) { c.minibatch_size = parse_positive("minibatch_size", v); },
       [](const AgentConfig& c) { return std::to_string(c.minibatch_size); }},
      {"memory_capacity",
       [](AgentConfig& c, std::string_view v) { c.memory_capacity = parse_positive("memory_capacity", v); },
       [](const AgentConfig& c) { return std::to_string(c.memory_capacity); }},
      {"learning_rate",
       [](AgentConfig& c, std::string_view v) { c.learning_rate = parse_positive_real("learning_rate", v); },
       [](const AgentConfig& c) { return real(c.learning_rate); }},
      {"action_repeat",
       [](AgentConfig& c, std::string_view v) { c.action_repeat = parse_positive("action_repeat", v); },
       [](const AgentConfig& c) { return std::to_string(c.action_repeat); }},
      {"target_sync_period",
       [](AgentConfig& c, std::string_view v) { c.target_sync_period = parse_positive("target_sync_period", v); },
       [](const AgentConfig& c) { return std::to_string(c.target_sync_period); }},
      {"sgd_period", [](AgentConfig& c, std::string_view v) { c.sgd_period = parse_positive("sgd_period", v); },
       [](const AgentConfig& c) { return std::to_string(c.sgd_period); }},
      {"replay_start_size",
       [](AgentConfig& c, std::string_view v) { c.replay_start_size = parse_uint("replay_start_size", v); },
       [](const AgentConfig& c) { return std::to_string(c.replay_start_size); }},
      {"eps_max", [](AgentConfig& c, std::string_view v) { c.eps_max = parse_in("eps_max", v, 0.0, 1.0); },
       [](const AgentConfig& c) { return real(c.eps_max); }},
      {"eps_min", [](AgentConfig& c, std::string_view v) { c.eps_min = parse_in("eps_min", v, 0.0, 1.0); },
       [](const AgentConfig& c) { return real(c.eps_min); }},
      {"eps_steps", [](AgentConfig& c, std::string_view v) { c.eps_steps = parse_positive("eps_steps", v); },
       [](const AgentConfig& c) { return std::to_string(c.eps_steps); }},
      {"discount_factor",
       [](AgentConfig& c, std::string_view v) { c.discount_factor = parse_in("discount_factor", v, 0.0, 1.0); },
       [](const AgentConfig& c) { return real(c.discount_factor); }},
      {"recurrent", [](AgentConfig& c, std::string_view v) { c.recurrent = parse_bool("recurrent", v); },
       [](const AgentConfig& c) { return std::string(c.recurrent ? "true" : "false"); }},
      {"target_rule", [](AgentConfig& c, std::string_view v) { c.target_rule = parse_target_rule(v); },
       [](const AgentConfig& c) { return target_rule_name(c.target_rule); }},
      {"seq_len", [](AgentConfig& c, std::string_view v) { c.seq_len = parse_positive("seq_len", v); },
       [](const AgentConfig& c) { return std::to_string(c.seq_len); }},
      {"loss", [](AgentConfig& c, std::string_view v) { c.loss = parse_loss(v); },
       [](const AgentConfig& c) { return loss_name(c.loss); }},
      {"huber_delta",
       [](AgentConfig& c, std::string_view v) { c.huber_delta = parse_positive_real("huber_delta", v); },
       [](const AgentConfig& c) { return real(c.huber_delta); }},
      {"optimizer", [](AgentConfig& c, std::string_view v) { c.optimizer = parse_optimizer(v); },
       [](const AgentConfig& c) { return optimizer_name(c.optimizer); }},
      {"rmsprop_decay",
       [](AgentConfig& c, std::string_view v) { c.rmsprop_decay = parse_in("rmsprop_decay", v, 0.0, 1.0, true); },
       [](const AgentConfig& c) { return real(c.rmsprop_decay); }},
      {"rmsprop_eps",
       [](AgentConfig& c, std::string_view v) { c.rmsprop_eps = parse_positive_real("rmsprop_eps", v); },
       [](const AgentConfig& c) { return real(c.rmsprop_eps); }},
      {"adam_beta1",
       [](AgentConfig& c, std::string_view v) { c.adam_beta1 = parse_in("adam_beta1", v, 0.0, 1.0, true); },
       [](const AgentConfig& c) { return real(c.adam_beta1); }},
      {"adam_beta2",
       [](AgentConfig& c, std::string_view v) { c.adam_beta2 = parse_in("adam_beta2", v, 0.0, 1.0, true); },
       [](const AgentConfig& c) { return real(c.adam_beta2); }},
      {"adam_eps", [](AgentConfig& c, std::string_view v) { c.adam_eps = parse_positive_real("adam_eps", v); },
       [](const AgentConfig& c) { return real(c.adam_eps); }},
  };
  return table;
}

}  // namespace

AgentConfig parse_config(std::string_view text, const AgentConfig& base) {
  AgentConfig cfg = base;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, fmt::format("expected 'key = value', got '{}'", line));
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(line_no, fmt::format("expected 'key = value', got '{}'", line));
    }
    const auto& table = keys();
    auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
    if (it == table.end()) throw ConfigError(line_no, fmt::format("unknown key '{}'", key));
    try {
      it->set(cfg, value);
    } catch (const std::exception& e) {
      throw ConfigError(line_no, e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
  return cfg;
}

AgentConfig load_config(const std::filesystem::path& path, const AgentConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

std::string format_config(const AgentConfig& cfg) {
  std::string out;
  for (const auto& k : keys()) out += fmt::format("{} = {}\n", k.name, k.get(cfg));
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.emplace_back(k.name);
  return out;
}

}  // namespace drdqn
