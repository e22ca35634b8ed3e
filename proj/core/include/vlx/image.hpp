#pragma once

#include <span>
#include <string>
#include <vector>

namespace vlx {

/// Decoded raster image: interleaved RGB, float intensities in [0, 1].
///
/// `source_id` is an optional provenance label used by fixture-driven
/// backends to identify the image independently of its pixel content.
/// It is preserved by rgb_shift (noise variants answer as the base image
/// unless a fixture targets their content hash) and extended by crop.
class ImageBuffer {
 public:
  static constexpr int kChannels = 3;

  ImageBuffer(int width, int height);
  ImageBuffer(int width, int height, std::vector<float> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  float at(int x, int y, int channel) const {
    return data_[index(x, y, channel)];
  }
  float& at(int x, int y, int channel) { return data_[index(x, y, channel)]; }

  std::span<const float> data() const noexcept { return data_; }

  const std::string& source_id() const noexcept { return source_id_; }
  void set_source_id(std::string id) { source_id_ = std::move(id); }

  /// Dimension and pixel equality; ignores the provenance label.
  bool same_pixels(const ImageBuffer& other) const noexcept;

 private:
  std::size_t index(int x, int y, int channel) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + channel;
  }

  int width_;
  int height_;
  std::vector<float> data_;
  std::string source_id_;
};

/// Pixel-space rectangle; max edges are exclusive.
struct GroundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;
  std::string source_phrase;

  int width() const noexcept { return x_max - x_min; }
  int height() const noexcept { return y_max - y_min; }
  bool valid_for(int image_width, int image_height) const noexcept {
    return 0 <= x_min && x_min < x_max && x_max <= image_width &&
           0 <= y_min && y_min < y_max && y_max <= image_height;
  }
};

/// Clamps box coordinates into the image; the result may be degenerate
/// (zero area) if the box lies entirely outside.
GroundingBox clamp_box(const GroundingBox& box, int image_width,
                       int image_height);

/// Extracts the sub-image covered by `box`. The crop's provenance label is
/// "<parent>@x_min,y_min,x_max,y_max" so fixtures can address it.
ImageBuffer crop(const ImageBuffer& image, const GroundingBox& box);

/// SHA-256 over dimensions and raw pixel bytes; identifies an image by
/// content for fixture tables and patrol stores.
std::string content_hash(const ImageBuffer& image);

}  // namespace vlx
