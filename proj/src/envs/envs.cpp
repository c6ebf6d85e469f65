#include "drdqn/envs.hpp"

#include <algorithm>

namespace drdqn {

namespace {
constexpr double kPixelOn = 255.0;
}

GridWorldOptions GridWorldOptions::corner_to_corner(std::size_t width, std::size_t height) {
  GridWorldOptions o;
  o.width = width;
  o.height = height;
  o.start = {0, 0};
  o.goal = {height - 1, width - 1};
  return o;
}

GridWorld::GridWorld(GridWorldOptions options)
    : options_(options),
      max_steps_(options.max_steps ? options.max_steps : 4 * (options.width + options.height)),
      pos_(options.start) {
  if (options_.width == 0 || options_.height == 0) throw std::invalid_argument("grid must be non-empty");
  auto inside = [&](GridPos p) { return p.row < options_.height && p.col < options_.width; };
  if (!inside(options_.start) || !inside(options_.goal)) {
    throw std::invalid_argument("grid start and goal must lie inside the grid");
  }
  if (options_.start == options_.goal) throw std::invalid_argument("grid start and goal must differ");
}

Tensor GridWorld::render(GridPos p) const {
  Tensor frame(observation_shape(), 0.0);
  frame[state_index(p)] = kPixelOn;
  return frame;
}

Tensor GridWorld::reset(Rng&) {
  pos_ = options_.start;
  steps_ = 0;
  done_ = false;
  return render(pos_);
}

GridWorld::Move GridWorld::move(GridPos from, std::size_t action) const {
  GridPos to = from;
  switch (action) {
    case kUp:
      if (to.row > 0) --to.row;
      break;
    case kDown:
      if (to.row + 1 < options_.height) ++to.row;
      break;
    case kLeft:
      if (to.col > 0) --to.col;
      break;
    case kRight:
      if (to.col + 1 < options_.width) ++to.col;
      break;
    default:
      throw ContractViolation("grid action " + std::to_string(action) + " out of range");
  }
  const bool goal = to == options_.goal;
  return {to, goal ? options_.goal_reward : options_.step_reward, goal};
}

EnvStep GridWorld::step(std::size_t action) {
  if (done_) throw ContractViolation("grid: step called on a finished episode");
  const Move m = move(pos_, action);
  pos_ = m.next;
  ++steps_;
  done_ = m.reached_goal || steps_ >= max_steps_;
  return {render(pos_), m.reward, done_};
}

Tensor flicker(const Tensor& obs, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("flicker probability must lie in [0, 1]");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < p) return Tensor(obs.shape(), 0.0);
  return obs;
}

FlickerGrid::FlickerGrid(GridWorldOptions options, double blank_probability)
    : inner_(options), p_(blank_probability) {
  if (!(p_ >= 0.0 && p_ <= 1.0)) throw std::invalid_argument("flicker probability must lie in [0, 1]");
}

Tensor FlickerGrid::reset(Rng& rng) {
  rng_.seed(rng());
  return flicker(inner_.reset(rng), p_, rng_);
}

EnvStep FlickerGrid::step(std::size_t action) {
  EnvStep s = inner_.step(action);
  s.observation = flicker(s.observation, p_, rng_);
  return s;
}

CatchGame::CatchGame(CatchOptions options) : options_(options) {
  if (options_.height < 3 || options_.width < 1) throw std::invalid_argument("catch frame must be at least 3x1");
}

Tensor CatchGame::render() const {
  Tensor frame(observation_shape(), 0.0);
  frame[ball_row_ * options_.width + ball_col_] = kPixelOn;
  frame[(options_.height - 1) * options_.width + paddle_col_] = kPixelOn;
  return frame;
}

Tensor CatchGame::reset(Rng& rng) {
  std::uniform_int_distribution<std::size_t> col(0, options_.width - 1);
  ball_row_ = 0;
  ball_col_ = col(rng);
  paddle_col_ = options_.width / 2;
  done_ = false;
  return render();
}

EnvStep CatchGame::step(std::size_t action) {
  if (done_) throw ContractViolation("catch: step called on a finished episode");
  switch (action) {
    case kLeft:
      if (paddle_col_ > 0) --paddle_col_;
      break;
    case kStay:
      break;
    case kRight:
      if (paddle_col_ + 1 < options_.width) ++paddle_col_;
      break;
    default:
      throw ContractViolation("catch action " + std::to_string(action) + " out of range");
  }
  ++ball_row_;
  double reward = 0.0;
  if (ball_row_ == options_.height - 2) {
    done_ = true;
    reward = ball_col_ == paddle_col_ ? 1.0 : -1.0;
  }
  return {render(), reward, done_};
}

Tensor preprocess(const Tensor& frame) {
  if (frame.empty()) throw std::invalid_argument("preprocess: empty frame");
  Tensor out = frame;
  for (auto& v : out.data()) v = std::clamp(v / 255.0, 0.0, 1.0);
  return out;
}

std::unique_ptr<Environment> make_environment(std::string_view name) {
  if (name == "grid") return std::make_unique<GridWorld>();
  if (name == "flickergrid") return std::make_unique<FlickerGrid>();
  if (name == "catch") return std::make_unique<CatchGame>();
  throw std::invalid_argument("unknown environment '" + std::string(name) + "' (expected grid, flickergrid or catch)");
}

std::vector<std::string> environment_names() { return {"grid", "flickergrid", "catch"}; }

}  // namespace drdqn
