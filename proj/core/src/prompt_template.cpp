#include "intentc/prompt_template.hpp"

#include <set>

#include "intentc/byteio.hpp"
#include "intentc/errors.hpp"

namespace intentc {

const char* to_string(ComponentKind k) {
  switch (k) {
    case ComponentKind::instruction: return "instruction";
    case ComponentKind::few_shot_examples: return "few_shot_examples";
    case ComponentKind::output_format: return "output_format";
  }
  return "instruction";
}

ComponentKind component_kind_from_string(std::string_view s) {
  if (s == "instruction") return ComponentKind::instruction;
  if (s == "few_shot_examples") return ComponentKind::few_shot_examples;
  if (s == "output_format") return ComponentKind::output_format;
  throw ConfigInvalid("unknown component kind '" + std::string(s) + "'");
}

bool PromptTemplate::constant() const {
  for (const auto& s : segments) {
    if (std::holds_alternative<Placeholder>(s)) return false;
  }
  return true;
}

std::vector<std::string> PromptTemplate::placeholder_names() const {
  std::vector<std::string> names;
  for (const auto& s : segments) {
    if (const auto* p = std::get_if<Placeholder>(&s)) names.push_back(p->name);
  }
  return names;
}

std::vector<std::size_t> PromptTemplate::component_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (std::holds_alternative<OptimizableComponent>(segments[i])) idx.push_back(i);
  }
  return idx;
}

static bool name_start(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }
static bool name_char(char c) { return name_start(c) || (c >= '0' && c <= '9'); }

PromptTemplate parse_template(std::string_view text) {
  PromptTemplate t;
  std::string pending;
  std::set<std::string> seen;

  auto flush = [&] {
    if (!pending.empty()) {
      t.segments.emplace_back(StaticText{std::move(pending)});
      pending.clear();
    }
  };

  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (c == '{') {
      if (i + 1 < n && text[i + 1] == '{') {
        pending.push_back('{');
        i += 2;
        continue;
      }
      std::size_t j = i + 1;
      if (j >= n || !name_start(text[j])) {
        throw UnbalancedDelimiter("bad placeholder at offset " + std::to_string(i));
      }
      std::size_t k = j;
      while (k < n && name_char(text[k])) ++k;
      if (k >= n || text[k] != '}') {
        throw UnbalancedDelimiter("unterminated placeholder at offset " + std::to_string(i));
      }
      std::string name(text.substr(j, k - j));
      if (!seen.insert(name).second) {
        throw DuplicatePlaceholder("placeholder '" + name + "' appears more than once");
      }
      flush();
      t.segments.emplace_back(Placeholder{std::move(name)});
      i = k + 1;
    } else if (c == '}') {
      if (i + 1 < n && text[i + 1] == '}') {
        pending.push_back('}');
        i += 2;
        continue;
      }
      throw UnbalancedDelimiter("stray '}' at offset " + std::to_string(i));
    } else {
      pending.push_back(c);
      ++i;
    }
  }
  flush();
  return t;
}

static void escape_braces_into(std::string& out, std::string_view text) {
  for (char c : text) {
    if (c == '{') out += "{{";
    else if (c == '}') out += "}}";
    else out.push_back(c);
  }
}

std::string to_text(const PromptTemplate& t) {
  std::string out;
  for (const auto& s : t.segments) {
    if (const auto* st = std::get_if<StaticText>(&s)) {
      escape_braces_into(out, st->text);
    } else if (const auto* p = std::get_if<Placeholder>(&s)) {
      out.push_back('{');
      out += p->name;
      out.push_back('}');
    } else {
      escape_braces_into(out, std::get<OptimizableComponent>(s).text);
    }
  }
  return out;
}

std::string render(const PromptTemplate& t, const Bindings& bindings) {
  std::string out;
  for (const auto& s : t.segments) {
    if (const auto* st = std::get_if<StaticText>(&s)) {
      out += st->text;
    } else if (const auto* p = std::get_if<Placeholder>(&s)) {
      auto it = bindings.find(p->name);
      if (it == bindings.end()) throw MissingBinding(p->name);
      out += it->second;
    } else {
      out += std::get<OptimizableComponent>(s).text;
    }
  }
  return out;
}

namespace {
constexpr std::uint32_t kTemplateFormatVersion = 1;
constexpr std::uint8_t kSegStatic = 0;
constexpr std::uint8_t kSegPlaceholder = 1;
constexpr std::uint8_t kSegComponent = 2;
}  // namespace

std::string canonical_bytes(const PromptTemplate& t) {
  ByteWriter w;
  w.u32(kTemplateFormatVersion);
  w.u64(t.version);
  w.u32(static_cast<std::uint32_t>(t.segments.size()));
  for (const auto& s : t.segments) {
    if (const auto* st = std::get_if<StaticText>(&s)) {
      w.u8(kSegStatic);
      w.str(st->text);
    } else if (const auto* p = std::get_if<Placeholder>(&s)) {
      w.u8(kSegPlaceholder);
      w.str(p->name);
    } else {
      const auto& c = std::get<OptimizableComponent>(s);
      w.u8(kSegComponent);
      w.u8(static_cast<std::uint8_t>(c.kind));
      w.str(c.text);
    }
  }
  return w.take();
}

PromptTemplate template_from_canonical_bytes(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.u32() != kTemplateFormatVersion) throw TruncatedData("unsupported template format version");
  PromptTemplate t;
  t.version = r.u64();
  std::uint32_t n = r.u32();
  t.segments.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint8_t tag = r.u8();
    if (tag == kSegStatic) {
      t.segments.emplace_back(StaticText{r.str()});
    } else if (tag == kSegPlaceholder) {
      t.segments.emplace_back(Placeholder{r.str()});
    } else if (tag == kSegComponent) {
      auto kind = static_cast<ComponentKind>(r.u8());
      t.segments.emplace_back(OptimizableComponent{kind, r.str()});
    } else {
      throw TruncatedData("unknown segment tag");
    }
  }
  return t;
}

std::string canonical_bytes(const Bindings& bindings) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(bindings.size()));
  for (const auto& [k, v] : bindings) {
    w.str(k);
    w.str(v);
  }
  return w.take();
}

nlohmann::json to_json(const PromptTemplate& t) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : t.segments) {
    if (const auto* st = std::get_if<StaticText>(&s)) {
      segs.push_back({{"static", st->text}});
    } else if (const auto* p = std::get_if<Placeholder>(&s)) {
      segs.push_back({{"placeholder", p->name}});
    } else {
      const auto& c = std::get<OptimizableComponent>(s);
      segs.push_back({{"component", {{"kind", to_string(c.kind)}, {"text", c.text}}}});
    }
  }
  return {{"version", t.version}, {"segments", segs}};
}

PromptTemplate template_from_json(const nlohmann::json& j) {
  PromptTemplate t;
  t.version = j.value("version", std::uint64_t{0});
  std::set<std::string> seen;
  for (const auto& seg : j.at("segments")) {
    if (seg.contains("static")) {
      t.segments.emplace_back(StaticText{seg.at("static").get<std::string>()});
    } else if (seg.contains("placeholder")) {
      auto name = seg.at("placeholder").get<std::string>();
      if (!seen.insert(name).second) {
        throw DuplicatePlaceholder("placeholder '" + name + "' appears more than once");
      }
      t.segments.emplace_back(Placeholder{std::move(name)});
    } else if (seg.contains("component")) {
      const auto& c = seg.at("component");
      t.segments.emplace_back(OptimizableComponent{
          component_kind_from_string(c.at("kind").get<std::string>()),
          c.at("text").get<std::string>()});
    } else {
      throw ConfigInvalid("template segment must be one of static/placeholder/component");
    }
  }
  return t;
}

}  // namespace intentc
