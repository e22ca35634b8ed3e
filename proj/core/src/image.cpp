#include "vlx/image.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "vlx/errors.hpp"
#include "vlx/hash.hpp"

namespace vlx {

namespace {

void validate_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw InvalidArgumentError("image dimensions must be positive, got " +
                               std::to_string(width) + "x" +
                               std::to_string(height));
  }
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height)
    : width_(width), height_(height) {
  validate_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * height * kChannels, 0.0f);
}

ImageBuffer::ImageBuffer(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
  validate_dims(width, height);
  const std::size_t expected =
      static_cast<std::size_t>(width) * height * kChannels;
  if (data_.size() != expected) {
    throw InvalidArgumentError(
        "image data size mismatch: expected " + std::to_string(expected) +
        " values, got " + std::to_string(data_.size()));
  }
  for (float v : data_) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw InvalidArgumentError("image intensity outside [0,1]: " +
                                 std::to_string(v));
    }
  }
}

bool ImageBuffer::same_pixels(const ImageBuffer& other) const noexcept {
  return width_ == other.width_ && height_ == other.height_ &&
         data_ == other.data_;
}

GroundingBox clamp_box(const GroundingBox& box, int image_width,
                       int image_height) {
  GroundingBox out = box;
  out.x_min = std::clamp(box.x_min, 0, image_width);
  out.x_max = std::clamp(box.x_max, 0, image_width);
  out.y_min = std::clamp(box.y_min, 0, image_height);
  out.y_max = std::clamp(box.y_max, 0, image_height);
  return out;
}

ImageBuffer crop(const ImageBuffer& image, const GroundingBox& box) {
  if (!box.valid_for(image.width(), image.height())) {
    throw InvalidArgumentError(
        "crop box (" + std::to_string(box.x_min) + "," +
        std::to_string(box.y_min) + "," + std::to_string(box.x_max) + "," +
        std::to_string(box.y_max) + ") invalid for " +
        std::to_string(image.width()) + "x" + std::to_string(image.height()) +
        " image");
  }
  ImageBuffer out(box.width(), box.height());
  for (int y = 0; y < box.height(); ++y) {
    for (int x = 0; x < box.width(); ++x) {
      for (int c = 0; c < ImageBuffer::kChannels; ++c) {
        out.at(x, y, c) = image.at(box.x_min + x, box.y_min + y, c);
      }
    }
  }
  if (!image.source_id().empty()) {
    out.set_source_id(image.source_id() + "@" + std::to_string(box.x_min) +
                      "," + std::to_string(box.y_min) + "," +
                      std::to_string(box.x_max) + "," +
                      std::to_string(box.y_max));
  }
  return out;
}

std::string content_hash(const ImageBuffer& image) {
  std::vector<std::uint8_t> bytes;
  const auto pixels = image.data();
  bytes.reserve(8 + pixels.size() * sizeof(float));
  const std::uint32_t w = static_cast<std::uint32_t>(image.width());
  const std::uint32_t h = static_cast<std::uint32_t>(image.height());
  for (std::uint32_t v : {w, h}) {
    for (int shift = 0; shift < 32; shift += 8) {
      bytes.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
    }
  }
  const std::size_t offset = bytes.size();
  bytes.resize(offset + pixels.size() * sizeof(float));
  std::memcpy(bytes.data() + offset, pixels.data(),
              pixels.size() * sizeof(float));
  return sha256_hex(bytes);
}

}  // namespace vlx
