#include "vlx/variation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vlx/errors.hpp"

namespace vlx {

namespace {

std::size_t count_slots(const std::string& text) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while ((pos = text.find(QuestionTemplate::kSlot, pos)) != std::string::npos) {
    ++count;
    pos += QuestionTemplate::kSlot.size();
  }
  return count;
}

// 53-bit uniform in [0, 1). mt19937_64 output is pinned by the standard, so
// draws are identical across platforms.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

QuestionTemplate::QuestionTemplate(std::string text,
                                   std::vector<std::string> articles)
    : text_(std::move(text)), articles_(std::move(articles)) {
  const std::size_t slots = count_slots(text_);
  if (slots != 1) {
    throw MalformedTemplateError("template must contain exactly one " +
                                 std::string(kSlot) + " slot, found " +
                                 std::to_string(slots) + " in \"" + text_ +
                                 "\"");
  }
  if (articles_.empty()) {
    throw MalformedTemplateError("article set must not be empty");
  }
}

std::vector<std::string> article_variants(const QuestionTemplate& tmpl) {
  std::vector<std::string> out;
  out.reserve(tmpl.articles().size());
  const std::size_t slot = tmpl.text().find(QuestionTemplate::kSlot);
  for (const std::string& article : tmpl.articles()) {
    std::string question = tmpl.text();
    question.replace(slot, QuestionTemplate::kSlot.size(), article);
    out.push_back(std::move(question));
  }
  return out;
}

void validate(const NoiseConfig& config) {
  if (config.shift_low > config.shift_high) {
    throw InvalidArgumentError("noise shift_low > shift_high");
  }
  if (config.n_variants < 1) {
    throw InvalidArgumentError("noise n_variants must be >= 1");
  }
}

std::array<double, 3> draw_channel_shifts(const NoiseConfig& config,
                                          int variant_index) {
  validate(config);
  if (variant_index < 0 || variant_index >= config.n_variants) {
    throw InvalidArgumentError("variant_index " +
                               std::to_string(variant_index) +
                               " outside [0, " +
                               std::to_string(config.n_variants) + ")");
  }
  std::mt19937_64 rng(config.seed ^ static_cast<std::uint64_t>(variant_index));
  std::array<double, 3> shifts{};
  for (double& s : shifts) {
    s = config.shift_low +
        unit_uniform(rng) * (config.shift_high - config.shift_low);
  }
  return shifts;
}

ImageBuffer apply_channel_shifts(const ImageBuffer& image,
                                 const std::array<double, 3>& shifts) {
  ImageBuffer out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < ImageBuffer::kChannels; ++c) {
        const double shifted = static_cast<double>(image.at(x, y, c)) + shifts[c];
        out.at(x, y, c) = static_cast<float>(std::clamp(shifted, 0.0, 1.0));
      }
    }
  }
  out.set_source_id(image.source_id());
  return out;
}

ImageBuffer rgb_shift(const ImageBuffer& image, const NoiseConfig& config,
                      int variant_index) {
  return apply_channel_shifts(image, draw_channel_shifts(config, variant_index));
}

QueryGrid make_query_grid(const ImageBuffer& image,
                          const QuestionTemplate& tmpl,
                          const NoiseConfig& noise) {
  validate(noise);
  QueryGrid grid;
  grid.questions = article_variants(tmpl);
  grid.images.reserve(noise.n_variants);
  grid.shifts.reserve(noise.n_variants);
  for (int i = 0; i < noise.n_variants; ++i) {
    grid.shifts.push_back(draw_channel_shifts(noise, i));
    grid.images.push_back(rgb_shift(image, noise, i));
  }
  grid.pairs.reserve(grid.images.size() * grid.questions.size());
  for (int i = 0; i < static_cast<int>(grid.images.size()); ++i) {
    for (int q = 0; q < static_cast<int>(grid.questions.size()); ++q) {
      grid.pairs.push_back({i, q});
    }
  }
  return grid;
}

}  // namespace vlx
