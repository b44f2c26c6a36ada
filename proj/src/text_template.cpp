#include "futureyou/text_template.hpp"

#include <algorithm>
#include <optional>

namespace futureyou {
namespace {

bool is_ident_char(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; }

// If a placeholder starts at `pos`, returns its name.
std::optional<std::string_view> placeholder_at(std::string_view s, std::size_t pos) {
  if (s[pos] != '{') return std::nullopt;
  std::size_t end = pos + 1;
  while (end < s.size() && is_ident_char(s[end])) ++end;
  if (end == pos + 1 || end >= s.size() || s[end] != '}') return std::nullopt;
  return s.substr(pos + 1, end - pos - 1);
}

}  // namespace

std::vector<std::string> template_placeholders(std::string_view tmpl) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (auto name = placeholder_at(tmpl, i)) {
      std::string n(*name);
      if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
      i += name->size() + 1;
    }
  }
  return out;
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(tmpl.size() * 2);
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (auto name = placeholder_at(tmpl, i)) {
      auto it = bindings.find(std::string(*name));
      if (it == bindings.end()) throw UnboundPlaceholder(std::string(*name));
      out += it->second;
      i += name->size() + 1;
    } else {
      out += tmpl[i];
    }
  }
  return out;
}

bool has_placeholder_marker(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (placeholder_at(text, i)) return true;
  }
  return false;
}

}  // namespace futureyou
