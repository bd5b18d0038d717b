#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace mission::detail {

struct EmojiAlias {
  char32_t codepoint;
  std::string_view alias;
};

inline constexpr std::size_t kEmojiAliasCount = 294;

// Sorted by code point.
extern const std::array<EmojiAlias, kEmojiAliasCount> kEmojiAliases;

}  // namespace mission::detail
