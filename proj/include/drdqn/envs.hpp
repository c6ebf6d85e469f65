#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "drdqn/tensor.hpp"

namespace drdqn {

struct EnvStep {
  Tensor observation;
  double reward = 0.0;
  bool terminal = false;
};

/// Episodic environment with a discrete action set.
///
/// Observations are raw frames with pixel values in [0, 255]; pass them
/// through `preprocess` before feeding a network.
class Environment {
 public:
  virtual ~Environment() = default;

  /// Starts a new episode. All episode randomness is drawn from `rng` here.
  virtual Tensor reset(Rng& rng) = 0;

  /// Throws ContractViolation after the episode ended or on an invalid action.
  virtual EnvStep step(std::size_t action) = 0;

  virtual bool terminal() const = 0;
  virtual std::size_t action_count() const = 0;
  virtual Shape observation_shape() const = 0;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
};

struct GridPos {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const GridPos&) const = default;
};

enum GridAction : std::size_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

struct GridWorldOptions {
  std::size_t width = 5;
  std::size_t height = 5;
  GridPos start{0, 0};
  GridPos goal{4, 4};
  double step_reward = -1.0;
  double goal_reward = 0.0;
  std::size_t max_steps = 0;  // 0 selects 4 * (width + height)

  /// Corner-to-corner layout of the given size.
  static GridWorldOptions corner_to_corner(std::size_t width, std::size_t height);
};

/// Fully observable grid; the observation is a one-hot `{height, width}` frame.
class GridWorld : public Environment {
 public:
  explicit GridWorld(GridWorldOptions options = {});

  Tensor reset(Rng& rng) override;
  EnvStep step(std::size_t action) override;
  bool terminal() const override { return done_; }
  std::size_t action_count() const override { return 4; }
  Shape observation_shape() const override { return {options_.height, options_.width}; }
  std::string name() const override { return "grid"; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<GridWorld>(*this); }

  struct Move {
    GridPos next;
    double reward = 0.0;
    bool reached_goal = false;
  };

  /// Movement rule in isolation: walls block, the goal pays goal_reward.
  Move move(GridPos from, std::size_t action) const;

  const GridWorldOptions& options() const { return options_; }
  std::size_t max_steps() const { return max_steps_; }
  std::size_t state_count() const { return options_.width * options_.height; }
  std::size_t state_index(GridPos p) const { return p.row * options_.width + p.col; }
  GridPos position_of(std::size_t state) const { return {state / options_.width, state % options_.width}; }
  GridPos position() const { return pos_; }
  std::size_t steps_taken() const { return steps_; }
  Tensor render(GridPos p) const;

 private:
  GridWorldOptions options_;
  std::size_t max_steps_;
  GridPos pos_;
  std::size_t steps_ = 0;
  bool done_ = true;
};

/// Returns an all-zero tensor with probability `p`, otherwise `obs`. Consumes
/// exactly one uniform draw per call.
Tensor flicker(const Tensor& obs, double p, Rng& rng);

/// GridWorld whose observations are blanked with probability `p` per step.
class FlickerGrid : public Environment {
 public:
  explicit FlickerGrid(GridWorldOptions options = {}, double blank_probability = 0.5);

  Tensor reset(Rng& rng) override;
  EnvStep step(std::size_t action) override;
  bool terminal() const override { return inner_.terminal(); }
  std::size_t action_count() const override { return inner_.action_count(); }
  Shape observation_shape() const override { return inner_.observation_shape(); }
  std::string name() const override { return "flickergrid"; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<FlickerGrid>(*this); }

  const GridWorld& inner() const { return inner_; }
  double blank_probability() const { return p_; }

 private:
  GridWorld inner_;
  double p_;
  Rng rng_;
};

struct CatchOptions {
  std::size_t height = 20;
  std::size_t width = 20;
};

/// Ball drops one row per step from a random column of row 0; the one-pixel
/// paddle on the bottom row moves left, stays, or moves right. The episode
/// ends when the ball reaches the row just above the paddle: +1 if the paddle
/// is directly under it, -1 otherwise.
class CatchGame : public Environment {
 public:
  enum Action : std::size_t { kLeft = 0, kStay = 1, kRight = 2 };

  explicit CatchGame(CatchOptions options = {});

  Tensor reset(Rng& rng) override;
  EnvStep step(std::size_t action) override;
  bool terminal() const override { return done_; }
  std::size_t action_count() const override { return 3; }
  Shape observation_shape() const override { return {options_.height, options_.width}; }
  std::string name() const override { return "catch"; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<CatchGame>(*this); }

  std::size_t ball_row() const { return ball_row_; }
  std::size_t ball_col() const { return ball_col_; }
  std::size_t paddle_col() const { return paddle_col_; }
  /// Steps per episode.
  std::size_t episode_length() const { return options_.height - 2; }

 private:
  Tensor render() const;

  CatchOptions options_;
  std::size_t ball_row_ = 0, ball_col_ = 0, paddle_col_ = 0;
  bool done_ = true;
};

/// Scales raw [0, 255] pixels into [0, 1].
Tensor preprocess(const Tensor& frame);

/// `grid`, `flickergrid` or `catch` with default options.
std::unique_ptr<Environment> make_environment(std::string_view name);
std::vector<std::string> environment_names();

}  // namespace drdqn
