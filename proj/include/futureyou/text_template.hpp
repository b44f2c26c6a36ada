#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "futureyou/error.hpp"

namespace futureyou {

// Placeholders are written `{identifier}` with identifier in [a-z0-9_].
// Anything else between braces is copied through verbatim.
class UnboundPlaceholder : public Error {
 public:
  explicit UnboundPlaceholder(std::string name)
      : Error("template placeholder '{" + name + "}' has no binding"), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

// Placeholder names in order of first appearance, without duplicates.
std::vector<std::string> template_placeholders(std::string_view tmpl);

// Single pass substitution: bound values are inserted as-is and never
// rescanned, so a value containing "{x}" stays literal.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& bindings);

// True if `text` still contains something shaped like a placeholder.
bool has_placeholder_marker(std::string_view text);

}  // namespace futureyou
