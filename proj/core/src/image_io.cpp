#include "vlx/image_io.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cmath>
#include <fstream>

#include "vlx/errors.hpp"

namespace vlx {

ImageBuffer load_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) {
    throw ImageIoError("cannot decode image " + path.string());
  }
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);

  ImageBuffer out(rgb.cols, rgb.rows);
  for (int y = 0; y < rgb.rows; ++y) {
    const cv::Vec3b* row = rgb.ptr<cv::Vec3b>(y);
    for (int x = 0; x < rgb.cols; ++x) {
      for (int c = 0; c < ImageBuffer::kChannels; ++c) {
        out.at(x, y, c) = static_cast<float>(row[x][c]) / 255.0f;
      }
    }
  }
  out.set_source_id(path.stem().string());
  return out;
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& image) {
  cv::Mat bgr(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width(); ++x) {
      // BGR order for OpenCV encoding
      row[x][0] = static_cast<std::uint8_t>(std::lround(image.at(x, y, 2) * 255.0f));
      row[x][1] = static_cast<std::uint8_t>(std::lround(image.at(x, y, 1) * 255.0f));
      row[x][2] = static_cast<std::uint8_t>(std::lround(image.at(x, y, 0) * 255.0f));
    }
  }
  std::vector<std::uint8_t> bytes;
  if (!cv::imencode(".png", bgr, bytes)) {
    throw ImageIoError("PNG encoding failed");
  }
  return bytes;
}

void save_png(const ImageBuffer& image, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ImageIoError("cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw ImageIoError("short write to " + path.string());
  }
}

}  // namespace vlx
