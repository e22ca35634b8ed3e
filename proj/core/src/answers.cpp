#include "vlx/answers.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "vlx/errors.hpp"

namespace vlx {

namespace {

const std::array<std::string_view, 5> kArticleStopWords = {"a", "an", "the",
                                                           "this", "that"};

bool is_article(std::string_view token) {
  return std::find(kArticleStopWords.begin(), kArticleStopWords.end(),
                   token) != kArticleStopWords.end();
}

bool contains(const std::vector<std::string>& tokens, const std::string& t) {
  return std::find(tokens.begin(), tokens.end(), t) != tokens.end();
}

}  // namespace

std::vector<std::string> normalize_answer(std::string_view raw) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : raw) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (c >= 0x80) {
      current.push_back(ch);  // pass non-ASCII bytes through unchanged
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) {
    tokens.push_back(std::move(current));
  }
  return tokens;
}

std::string normalize_join(std::string_view raw) {
  const std::vector<std::string> tokens = normalize_answer(raw);
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

BinaryLabel classify_binary_answer(std::string_view raw,
                                   const BinaryAliases& aliases) {
  const std::vector<std::string> tokens = normalize_answer(raw);
  if (tokens.size() != 1) {
    return BinaryLabel::invalid;
  }
  if (std::find(aliases.yes.begin(), aliases.yes.end(), tokens[0]) !=
      aliases.yes.end()) {
    return BinaryLabel::yes;
  }
  if (std::find(aliases.no.begin(), aliases.no.end(), tokens[0]) !=
      aliases.no.end()) {
    return BinaryLabel::no;
  }
  return BinaryLabel::invalid;
}

ChoiceSet ChoiceSet::from_phrases(std::vector<std::string> phrases) {
  std::vector<std::vector<std::string>> match_tokens;
  match_tokens.reserve(phrases.size());
  for (const std::string& phrase : phrases) {
    std::vector<std::string> tokens = normalize_answer(phrase);
    std::vector<std::string> content;
    for (std::string& t : tokens) {
      if (!is_article(t)) content.push_back(std::move(t));
    }
    if (content.empty()) {
      content = normalize_answer(phrase);  // phrase was articles only
    }
    match_tokens.push_back(std::move(content));
  }
  return ChoiceSet(std::move(phrases), std::move(match_tokens));
}

ChoiceSet::ChoiceSet(std::vector<std::string> phrases,
                     std::vector<std::vector<std::string>> match_tokens)
    : phrases_(std::move(phrases)), match_tokens_(std::move(match_tokens)) {
  if (phrases_.empty()) {
    throw InvalidArgumentError("choice set must not be empty");
  }
  if (phrases_.size() != match_tokens_.size()) {
    throw InvalidArgumentError("choice phrases and match tokens differ in length");
  }
  std::set<std::string> seen;
  for (const std::string& phrase : phrases_) {
    const std::string norm = normalize_join(phrase);
    if (norm.empty()) {
      throw InvalidArgumentError("choice phrase \"" + phrase +
                                 "\" normalizes to nothing");
    }
    if (!seen.insert(norm).second) {
      throw InvalidArgumentError("choice phrases not distinct after "
                                 "normalization: \"" + phrase + "\"");
    }
  }
  for (const auto& tokens : match_tokens_) {
    if (tokens.empty()) {
      throw InvalidArgumentError("choice match token set must not be empty");
    }
  }
}

std::optional<std::size_t> match_answer(std::string_view raw,
                                        const ChoiceSet& choices) {
  const std::vector<std::string> answer_tokens = normalize_answer(raw);
  std::optional<std::size_t> matched;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    const auto& required = choices.match_tokens(i);
    const bool all_present =
        std::all_of(required.begin(), required.end(),
                    [&](const std::string& t) { return contains(answer_tokens, t); });
    if (all_present) {
      if (matched.has_value()) {
        return std::nullopt;  // ambiguous: two choices match
      }
      matched = i;
    }
  }
  return matched;
}

}  // namespace vlx
