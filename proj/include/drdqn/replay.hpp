#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "drdqn/tensor.hpp"

namespace drdqn {

struct Transition {
  Tensor state;
  std::size_t action = 0;
  double reward = 0.0;
  Tensor next_state;
  bool terminal = false;

  bool operator==(const Transition&) const = default;
};

/// Anything that accepts freshly generated experience.
class TransitionSink {
 public:
  virtual ~TransitionSink() = default;
  virtual void push(Transition t) = 0;
};

/// Fixed-capacity FIFO ring of transitions for the feedforward agents.
class ReplayBuffer : public TransitionSink {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t) override;

  std::size_t size() const { return ring_.size(); }
  std::size_t capacity() const { return capacity_; }

  /// `i`-th stored transition, oldest first.
  const Transition& at(std::size_t i) const;

  /// `n` uniform draws with replacement. Throws InsufficientDataError when
  /// fewer than `n` transitions are stored.
  std::vector<Transition> sample_batch(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> ring_;
  std::size_t write_cursor_ = 0;
};

struct SequenceSample {
  std::vector<Transition> steps;
  std::size_t episode = 0;  // index into the store at sampling time, oldest first
  std::size_t start_offset = 0;
};

/// Completed episodes for the recurrent agents, evicted whole and oldest
/// first so that the stored transition count never exceeds `capacity`.
class EpisodeStore : public TransitionSink {
 public:
  explicit EpisodeStore(std::size_t capacity);

  /// Appends to the open episode; a terminal transition closes it.
  void push(Transition t) override;

  /// Stores a complete episode directly.
  void add_episode(std::vector<Transition> episode);

  /// Drops the partially recorded episode.
  void discard_open() { open_.clear(); }

  std::size_t episode_count() const { return episodes_.size(); }
  std::size_t transition_count() const { return total_; }
  std::size_t capacity() const { return capacity_; }
  const std::vector<Transition>& episode(std::size_t i) const { return episodes_[i]; }
  std::size_t open_length() const { return open_.size(); }

  /// Number of stored episodes with at least `len` transitions.
  std::size_t eligible_count(std::size_t len) const;

  /// `n` windows of `len` contiguous transitions. Each draw picks an eligible
  /// episode uniformly, then a start offset uniformly among its valid starts.
  std::vector<SequenceSample> sample_sequences(std::size_t n, std::size_t len, Rng& rng) const;

 private:
  void evict();

  std::size_t capacity_;
  std::deque<std::vector<Transition>> episodes_;
  std::vector<Transition> open_;
  std::size_t total_ = 0;
};

}  // namespace drdqn
