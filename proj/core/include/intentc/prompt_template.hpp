#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentc/digest.hpp"

namespace intentc {

using Bindings = std::map<std::string, std::string>;

enum class ComponentKind : std::uint8_t { instruction = 0, few_shot_examples = 1, output_format = 2 };

const char* to_string(ComponentKind k);
ComponentKind component_kind_from_string(std::string_view s);

struct StaticText {
  std::string text;
  bool operator==(const StaticText&) const = default;
};

struct Placeholder {
  std::string name;
  bool operator==(const Placeholder&) const = default;
};

// A template region the optimizer is allowed to rewrite. Its text is emitted
// verbatim by render(); braces inside it are data, not placeholder syntax.
struct OptimizableComponent {
  ComponentKind kind = ComponentKind::instruction;
  std::string text;
  bool operator==(const OptimizableComponent&) const = default;
};

using Segment = std::variant<StaticText, Placeholder, OptimizableComponent>;

struct PromptTemplate {
  std::vector<Segment> segments;
  std::uint64_t version = 0;

  // A template with no placeholders renders to a fixed string.
  bool constant() const;

  // Placeholder names in order of appearance.
  std::vector<std::string> placeholder_names() const;

  // Indices of OptimizableComponent segments.
  std::vector<std::size_t> component_indices() const;

  bool operator==(const PromptTemplate&) const = default;
};

// Parses flat template text. Syntax: `{name}` is a placeholder with
// name matching [a-z_][a-z0-9_]*; `{{` and `}}` are literal braces. The
// result contains only StaticText and Placeholder segments.
PromptTemplate parse_template(std::string_view text);

// Flat-text serialization. Inverse of parse_template on parse output
// (byte-identical round trip). Component text is emitted with braces
// re-escaped so the output always re-parses.
std::string to_text(const PromptTemplate& t);

// Substitutes placeholder bindings. Pure function of (template, bindings);
// throws MissingBinding when a placeholder has no binding.
std::string render(const PromptTemplate& t, const Bindings& bindings);

// Canonical byte serialization (versioned, length-prefixed; see FORMATS
// section of the README). Used for cache keys and trace digests.
std::string canonical_bytes(const PromptTemplate& t);
PromptTemplate template_from_canonical_bytes(std::string_view bytes);

inline Digest template_digest(const PromptTemplate& t) { return content_key(canonical_bytes(t)); }

// Canonical encoding of a binding set (sorted by name), for fill cache keys.
std::string canonical_bytes(const Bindings& bindings);

// Structured JSON form used in job configs and pareto listings.
nlohmann::json to_json(const PromptTemplate& t);
PromptTemplate template_from_json(const nlohmann::json& j);

}  // namespace intentc
