#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vlx {

/// Lowercases, strips punctuation, and splits on whitespace. Empty input
/// yields an empty list.
std::vector<std::string> normalize_answer(std::string_view raw);

/// Normalized tokens re-joined with single spaces; the canonical form used
/// for modal-answer counting.
std::string normalize_join(std::string_view raw);

enum class BinaryLabel { yes, no, invalid };

/// Tokens accepted as Yes/No. Strict by default; extend via configuration
/// to accept synonyms.
struct BinaryAliases {
  std::vector<std::string> yes = {"yes"};
  std::vector<std::string> no = {"no"};
};

/// YES iff the normalized answer is exactly one accepted yes-token, NO for
/// one accepted no-token; everything else is invalid.
BinaryLabel classify_binary_answer(std::string_view raw,
                                   const BinaryAliases& aliases = {});

/// Ordered candidate phrases plus the per-choice token sets used to match
/// free-form answers. Default match tokens are the phrase's content words
/// (articles removed), so "a yellow cup" matches on {yellow, cup}.
class ChoiceSet {
 public:
  static ChoiceSet from_phrases(std::vector<std::string> phrases);

  ChoiceSet(std::vector<std::string> phrases,
            std::vector<std::vector<std::string>> match_tokens);

  std::size_t size() const noexcept { return phrases_.size(); }
  const std::vector<std::string>& phrases() const noexcept { return phrases_; }
  const std::vector<std::string>& match_tokens(std::size_t i) const {
    return match_tokens_[i];
  }

 private:
  std::vector<std::string> phrases_;
  std::vector<std::vector<std::string>> match_tokens_;
};

/// A choice matches when every one of its match tokens appears among the
/// normalized answer tokens. Exactly one matching choice yields its index;
/// zero or several matches are invalid (nullopt).
std::optional<std::size_t> match_answer(std::string_view raw,
                                        const ChoiceSet& choices);

}  // namespace vlx
