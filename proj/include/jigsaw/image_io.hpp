#pragma once

#include <filesystem>
#include <stdexcept>

#include "jigsaw/core.hpp"

namespace jigsaw {

struct ImageIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Decodes PNG or JPEG (chosen by file signature) into 8-bit RGB.
/// Gray and alpha inputs are converted; alpha is dropped.
Image read_image(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace jigsaw
