#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "jigsaw/core.hpp"

namespace jigsaw {

enum class SynthKind {
  Smooth,    // low-frequency color gradients only
  Textured,  // gradients, fractal noise, and hard-edged shapes
};

SynthKind parse_synth_kind(const std::string& name);

/// Deterministic procedural test image.
Image synthesize_image(int height, int width, SynthKind kind, std::uint64_t seed);

/// Writes `count` images named synth_####.png into `dir`; returns their paths.
std::vector<std::filesystem::path> write_synthetic_dataset(const std::filesystem::path& dir,
                                                           int count, int height, int width,
                                                           SynthKind kind, std::uint64_t seed);

}  // namespace jigsaw
