#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vlx/image.hpp"

namespace vlx {

/// Decodes a PNG or JPEG file into float RGB in [0, 1]. The image's
/// provenance label is set to the file stem, so fixtures can address it
/// by filename.
ImageBuffer load_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const ImageBuffer& image);

void save_png(const ImageBuffer& image, const std::filesystem::path& path);

}  // namespace vlx
