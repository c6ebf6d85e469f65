#include "drdqn/replay.hpp"

#include <algorithm>
#include <string>

namespace drdqn {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  ring_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (ring_.size() < capacity_) {
    ring_.push_back(std::move(t));
  } else {
    ring_[write_cursor_] = std::move(t);
  }
  write_cursor_ = (write_cursor_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= ring_.size()) throw std::out_of_range("replay index " + std::to_string(i) + " out of range");
  if (ring_.size() < capacity_) return ring_[i];
  return ring_[(write_cursor_ + i) % capacity_];
}

std::vector<Transition> ReplayBuffer::sample_batch(std::size_t n, Rng& rng) const {
  if (n == 0) throw std::invalid_argument("sample_batch: n must be positive");
  if (ring_.size() < n) {
    throw InsufficientDataError("sample_batch: requested " + std::to_string(n) + " transitions but only " +
                                std::to_string(ring_.size()) + " stored");
  }
  std::uniform_int_distribution<std::size_t> pick(0, ring_.size() - 1);
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(ring_[pick(rng)]);
  return out;
}

EpisodeStore::EpisodeStore(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("episode store capacity must be positive");
}

void EpisodeStore::push(Transition t) {
  const bool done = t.terminal;
  open_.push_back(std::move(t));
  if (done) {
    add_episode(std::move(open_));
    open_.clear();
  }
}

void EpisodeStore::add_episode(std::vector<Transition> episode) {
  if (episode.empty()) return;
  total_ += episode.size();
  episodes_.push_back(std::move(episode));
  evict();
}

void EpisodeStore::evict() {
  while (total_ > capacity_ && !episodes_.empty()) {
    total_ -= episodes_.front().size();
    episodes_.pop_front();
  }
}

std::size_t EpisodeStore::eligible_count(std::size_t len) const {
  std::size_t n = 0;
  for (const auto& e : episodes_) n += e.size() >= len ? 1 : 0;
  return n;
}

std::vector<SequenceSample> EpisodeStore::sample_sequences(std::size_t n, std::size_t len, Rng& rng) const {
  if (len == 0) throw std::invalid_argument("sample_sequences: len must be positive");
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < episodes_.size(); ++i) {
    if (episodes_[i].size() >= len) eligible.push_back(i);
  }
  if (eligible.empty()) {
    throw InsufficientDataError("sample_sequences: no stored episode has " + std::to_string(len) +
                                " or more transitions");
  }
  std::uniform_int_distribution<std::size_t> pick_episode(0, eligible.size() - 1);
  std::vector<SequenceSample> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t e = eligible[pick_episode(rng)];
    const auto& ep = episodes_[e];
    std::uniform_int_distribution<std::size_t> pick_start(0, ep.size() - len);
    const std::size_t start = pick_start(rng);
    SequenceSample sample;
    sample.episode = e;
    sample.start_offset = start;
    sample.steps.assign(ep.begin() + static_cast<std::ptrdiff_t>(start),
                        ep.begin() + static_cast<std::ptrdiff_t>(start + len));
    out.push_back(std::move(sample));
  }
  return out;
}

}  // namespace drdqn
