#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vlx/image.hpp"

namespace vlx {

inline const std::vector<std::string> kDefaultArticles = {"a", "the", "this",
                                                          "that"};

/// Question text containing exactly one `{art}` slot, expanded over an
/// ordered article set. Construction rejects malformed templates.
class QuestionTemplate {
 public:
  static constexpr std::string_view kSlot = "{art}";

  explicit QuestionTemplate(std::string text,
                            std::vector<std::string> articles = kDefaultArticles);

  const std::string& text() const noexcept { return text_; }
  const std::vector<std::string>& articles() const noexcept {
    return articles_;
  }

 private:
  std::string text_;
  std::vector<std::string> articles_;
};

/// One question per article, in article-set order.
std::vector<std::string> article_variants(const QuestionTemplate& tmpl);

/// Per-channel additive shift drawn from Uniform[shift_low, shift_high].
struct NoiseConfig {
  double shift_low = -0.1;
  double shift_high = 0.1;
  int n_variants = 5;
  std::uint64_t seed = 17;
};

void validate(const NoiseConfig& config);

/// Deterministic per-channel shifts for one variant. Variant i draws from a
/// generator seeded with seed ^ i, so variants are independent and any
/// variant can be re-derived without generating the others.
std::array<double, 3> draw_channel_shifts(const NoiseConfig& config,
                                          int variant_index);

/// Adds shifts[c] to every pixel of channel c, clamped to [0, 1].
/// Dimensions and provenance label are unchanged.
ImageBuffer apply_channel_shifts(const ImageBuffer& image,
                                 const std::array<double, 3>& shifts);

/// apply_channel_shifts with shifts drawn for the given variant.
ImageBuffer rgb_shift(const ImageBuffer& image, const NoiseConfig& config,
                      int variant_index);

/// The full ensemble a grid run aggregates over: noise-image variants crossed
/// with article-substituted questions, pairs listed image-major.
struct QueryGrid {
  struct Pair {
    int image;
    int question;
  };

  std::vector<ImageBuffer> images;
  std::vector<std::string> questions;
  std::vector<std::array<double, 3>> shifts;  // per image variant, for audit
  std::vector<Pair> pairs;
};

QueryGrid make_query_grid(const ImageBuffer& image,
                          const QuestionTemplate& tmpl,
                          const NoiseConfig& noise);

}  // namespace vlx
