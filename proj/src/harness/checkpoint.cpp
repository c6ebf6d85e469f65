#include "drdqn/checkpoint.hpp"

#include <bit>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "drdqn/config_file.hpp"

namespace drdqn {

namespace {

constexpr std::string_view kMagic = "DRDQ";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (n > bytes_.size() - pos_) throw CheckpointError("checkpoint truncated");
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint64_t uint(int width) {
    auto b = take(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void put_entry(std::string& out, const std::string& name, const Tensor& t) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) put_u64(out, d);
  for (double v : t.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::string header_text(const Checkpoint& c) {
  std::string h;
  h += fmt::format("agent = {}\n", agent_kind_name(c.kind));
  h += fmt::format("env = {}\n", c.env_name);
  h += fmt::format("step = {}\n", c.step);
  h += fmt::format("updates = {}\n", c.online.step_count());
  std::string dims;
  for (auto d : c.spec.input_shape) dims += (dims.empty() ? "" : " ") + std::to_string(d);
  h += fmt::format("input_shape = {}\n", dims);
  for (const auto& layer : c.spec.layers) h += fmt::format("layer = {}\n", describe_layer(layer));
  h += format_config(c.config);
  return h;
}

}  // namespace

bool Checkpoint::operator==(const Checkpoint& o) const {
  return config == o.config && kind == o.kind && env_name == o.env_name && spec == o.spec && online == o.online &&
         online.step_count() == o.online.step_count() && target == o.target &&
         optimizer_state == o.optimizer_state && step == o.step;
}

Checkpoint make_checkpoint(const Agent& agent, AgentKind kind, std::string env_name) {
  Checkpoint c;
  c.config = agent.config();
  c.kind = kind;
  c.env_name = std::move(env_name);
  c.spec = agent.spec();
  c.online = agent.online();
  c.target = agent.target();
  c.optimizer_state = agent.optimizer().export_state();
  c.step = agent.step();
  return c;
}

Agent restore_agent(const Checkpoint& c) {
  Optimizer opt(c.config.optimizer_options(), c.online);
  opt.import_state(c.optimizer_state);
  return Agent(c.spec, c.config, c.online, c.target, std::move(opt), c.step);
}

std::string encode_checkpoint(const Checkpoint& c) {
  std::string out(kMagic);
  out.push_back(static_cast<char>(Checkpoint::kVersion));
  const std::string header = header_text(c);
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  put_u32(out, static_cast<std::uint32_t>(c.online.size() + c.target.size() + c.optimizer_state.size()));
  for (const auto& e : c.online) put_entry(out, "online/" + e.name, e.value);
  for (const auto& e : c.target) put_entry(out, "target/" + e.name, e.value);
  for (const auto& e : c.optimizer_state) put_entry(out, e.name, e.value);
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(4) != kMagic) throw CheckpointError("not a checkpoint (bad magic bytes)");
  const auto version = r.uint(1);
  if (version != Checkpoint::kVersion) {
    throw CheckpointError(fmt::format("unsupported checkpoint version {}", version));
  }
  const std::string header(r.take(r.uint(4)));

  Checkpoint c;
  std::string config_text;
  std::uint64_t updates = 0;
  std::istringstream lines(header);
  std::string line;
  auto to_u64 = [](const std::string& v) -> std::uint64_t {
    try {
      return std::stoull(v);
    } catch (const std::exception&) {
      throw CheckpointError("bad integer '" + v + "' in checkpoint header");
    }
  };
  while (std::getline(lines, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw CheckpointError("malformed checkpoint header line '" + line + "'");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 3);
    if (key == "agent") {
      c.kind = parse_agent_kind(value);
    } else if (key == "env") {
      c.env_name = value;
    } else if (key == "step") {
      c.step = to_u64(value);
    } else if (key == "updates") {
      updates = to_u64(value);
    } else if (key == "input_shape") {
      std::istringstream dims(value);
      std::size_t d;
      while (dims >> d) c.spec.input_shape.push_back(d);
    } else if (key == "layer") {
      c.spec.layers.push_back(parse_layer(value));
    } else {
      config_text += line + "\n";
    }
  }
  c.config = parse_config(config_text);
  c.spec.validate();

  const auto count = r.uint(4);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name(r.take(r.uint(4)));
    const auto rank = r.uint(4);
    if (rank > 8) throw CheckpointError("implausible tensor rank in checkpoint");
    Shape shape;
    for (std::uint64_t k = 0; k < rank; ++k) shape.push_back(r.uint(8));
    std::vector<double> data(shape_size(shape));
    for (auto& v : data) v = std::bit_cast<double>(r.uint(8));
    Tensor t(shape, std::move(data));
    if (name.rfind("online/", 0) == 0) {
      c.online.add(name.substr(7), std::move(t));
    } else if (name.rfind("target/", 0) == 0) {
      c.target.add(name.substr(7), std::move(t));
    } else if (name.rfind("opt/", 0) == 0) {
      c.optimizer_state.add(std::move(name), std::move(t));
    } else {
      throw CheckpointError("unexpected checkpoint entry '" + name + "'");
    }
  }
  if (!r.done()) throw CheckpointError("trailing bytes after checkpoint entries");
  c.online.set_step_count(updates);
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  const std::string bytes = encode_checkpoint(c);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace drdqn
