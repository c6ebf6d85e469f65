#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "drdqn/tensor.hpp"

namespace drdqn {

/// Named parameter tensors of one network, kept in insertion order.
///
/// Also carries the optimizer time step so that Adam bias correction travels
/// with the parameters it was applied to.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    bool operator==(const Entry&) const = default;
  };

  void add(std::string name, Tensor value);

  bool contains(std::string_view name) const;
  std::optional<std::size_t> index_of(std::string_view name) const;
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;

  Entry& entry(std::size_t i) { return entries_[i]; }
  const Entry& entry(std::size_t i) const { return entries_[i]; }
  std::size_t size() const { return entries_.size(); }
  std::size_t parameter_count() const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::uint64_t step_count() const { return step_count_; }
  void set_step_count(std::uint64_t t) { step_count_ = t; }

  /// Same names and shapes, every value zero, step count reset.
  ParamSet zeros_like() const;

  /// True when both sets list the same names with the same shapes, in order.
  bool same_layout(const ParamSet& other) const;

  /// Throws DimensionError naming the first mismatch.
  void require_same_layout(const ParamSet& other, std::string_view what) const;

  void fill(double value);
  void add_scaled(const ParamSet& other, double scale);
  bool all_finite() const;

  /// Entry-wise equality; the step counter is optimizer bookkeeping and is not compared.
  bool operator==(const ParamSet& other) const { return entries_ == other.entries_; }

 private:
  std::vector<Entry> entries_;
  std::uint64_t step_count_ = 0;
};

}  // namespace drdqn
