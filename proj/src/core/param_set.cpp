#include "drdqn/param_set.hpp"

#include <algorithm>

namespace drdqn {

void ParamSet::add(std::string name, Tensor value) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name '" + name + "'");
  entries_.push_back({std::move(name), std::move(value)});
}

std::optional<std::size_t> ParamSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

bool ParamSet::contains(std::string_view name) const { return index_of(name).has_value(); }

Tensor& ParamSet::at(std::string_view name) {
  auto i = index_of(name);
  if (!i) throw std::out_of_range("no parameter named '" + std::string(name) + "'");
  return entries_[*i].value;
}

const Tensor& ParamSet::at(std::string_view name) const {
  auto i = index_of(name);
  if (!i) throw std::out_of_range("no parameter named '" + std::string(name) + "'");
  return entries_[*i].value;
}

std::size_t ParamSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  out.entries_.reserve(entries_.size());
  for (const auto& e : entries_) out.entries_.push_back({e.name, Tensor(e.value.shape(), 0.0)});
  return out;
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name) return false;
    if (entries_[i].value.shape() != other.entries_[i].value.shape()) return false;
  }
  return true;
}

void ParamSet::require_same_layout(const ParamSet& other, std::string_view what) const {
  if (entries_.size() != other.entries_.size()) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(entries_.size()) +
                         " parameters, got " + std::to_string(other.entries_.size()));
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name) {
      throw DimensionError(std::string(what) + ": parameter " + std::to_string(i) + " is '" + b.name +
                           "', expected '" + a.name + "'");
    }
    if (a.value.shape() != b.value.shape()) {
      throw DimensionError(std::string(what) + ": '" + a.name + "' has shape " +
                           shape_string(b.value.shape()) + ", expected " + shape_string(a.value.shape()));
    }
  }
}

void ParamSet::fill(double value) {
  for (auto& e : entries_) e.value.fill(value);
}

void ParamSet::add_scaled(const ParamSet& other, double scale) {
  require_same_layout(other, "add_scaled");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto dst = entries_[i].value.data();
    auto src = other.entries_[i].value.data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += scale * src[k];
  }
}

bool ParamSet::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const Entry& e) { return e.value.all_finite(); });
}

}  // namespace drdqn
