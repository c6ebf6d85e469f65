#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "drdqn/network.hpp"

namespace drdqn {

/// Dense 64 (relu) -> Dense 64 (relu) -> [lstm 64] -> linear head. For
/// enumerable grid observations.
NetworkSpec mlp_preset(const Shape& input_shape, std::size_t actions, bool recurrent);

/// conv 8x8/4 (16) -> conv 4x4/2 (32) -> conv 3x3/1 (32) -> Dense 512 (relu)
/// -> Dense 128 (relu) -> [lstm 128] -> linear head. Needs frames of at least 36x36.
NetworkSpec small_atari_preset(const Shape& input_shape, std::size_t actions, bool recurrent);

/// conv 4x4/2 (8) -> conv 3x3/1 (16) -> conv 3x3/1 (16) -> Dense 128 (relu)
/// -> [lstm 64] -> linear head. Fits the 20x20 catch frames.
NetworkSpec compact_conv_preset(const Shape& input_shape, std::size_t actions, bool recurrent);

/// Looks a preset up by name: `mlp`, `small-atari`, `compact-conv`.
NetworkSpec make_preset(std::string_view name, const Shape& input_shape, std::size_t actions,
                        bool recurrent);

std::vector<std::string> preset_names();

}  // namespace drdqn
