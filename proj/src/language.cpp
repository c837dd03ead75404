#include "storystream/language.hpp"

#include "storystream/error.hpp"

namespace storystream {

std::string_view to_string(Language lang) {
  switch (lang) {
    case Language::kEn:
      return "en";
    case Language::kEs:
      return "es";
    case Language::kDe:
      return "de";
  }
  return "??";
}

Language parse_language(std::string_view code) {
  if (code == "en") return Language::kEn;
  if (code == "es") return Language::kEs;
  if (code == "de") return Language::kDe;
  throw ValidationError("unknown language code '" + std::string(code) + "'");
}

}  // namespace storystream
