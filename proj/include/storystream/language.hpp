#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace storystream {

enum class Language { kEn = 0, kEs = 1, kDe = 2 };

inline constexpr std::size_t kLanguageCount = 3;
inline constexpr std::array<Language, kLanguageCount> kAllLanguages = {
    Language::kEn, Language::kEs, Language::kDe};

// The pivot through which crosslingual links are formed.
inline constexpr Language kPivotLanguage = Language::kEn;

std::string_view to_string(Language lang);

// Throws ValidationError naming the code when it is not en/es/de.
Language parse_language(std::string_view code);

inline std::size_t index_of(Language lang) {
  return static_cast<std::size_t>(lang);
}

}  // namespace storystream
