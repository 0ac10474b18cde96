// Copyright 2026 The noteprobe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "noteprobe/perturb.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include <boost/regex.hpp>

#include "noteprobe/error.hpp"

namespace noteprobe {

const char* to_string(MentionKind kind) {
  switch (kind) {
    case MentionKind::noun_phrase: return "noun_phrase";
    case MentionKind::pronoun: return "pronoun";
    case MentionKind::age_numeral: return "age_numeral";
    case MentionKind::deid_token: return "deid_token";
  }
  return "noun_phrase";
}

const char* to_string(AlterOp op) {
  switch (op) {
    case AlterOp::change: return "change";
    case AlterOp::add: return "add";
    case AlterOp::keep: return "keep";
  }
  return "keep";
}

AlterOp alter_op_from_string(const std::string& name) {
  if (name == "change") return AlterOp::change;
  if (name == "add") return AlterOp::add;
  if (name == "keep") return AlterOp::keep;
  throw ValidationError("unknown alteration op \"" + name + "\"");
}

namespace {

constexpr auto kRegexFlags = boost::regex::perl | boost::regex::icase;

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string regex_escape(const std::string& token) {
  std::string out;
  for (char c : token) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != ' ' &&
        static_cast<unsigned char>(c) < 0x80)
      out += '\\';
    out += c;
  }
  return out;
}

std::vector<std::string> split_alternatives(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto slash = value.find('/', start);
    out.push_back(value.substr(start, slash - start));
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  return out;
}

boost::regex compile(const std::string& pattern, const std::string& context) {
  try {
    return boost::regex(pattern, kRegexFlags);
  } catch (const boost::regex_error& e) {
    throw ValidationError(context + ": invalid pattern \"" + pattern +
                          "\": " + e.what());
  }
}

// Byte offset just past the first `chars` code points of `text`.
std::size_t window_end_bytes(const std::string& text, std::size_t chars) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
      if (count == chars) return i;
      ++count;
    }
  }
  return text.size();
}

}  // namespace

struct Characteristic::Compiled {
  std::optional<boost::regex> nouns;
  // capture name for each group with patterns, paired with the group index
  std::vector<std::pair<std::string, std::size_t>> noun_captures;
  std::optional<boost::regex> pronouns;
  std::vector<std::pair<std::string, std::size_t>> pronoun_captures;
  std::optional<boost::regex> anchor;
  std::vector<std::unordered_set<std::string>> own_forms;
  std::unordered_map<std::string, std::size_t> index;
  std::size_t window = 0;
};

struct AlterAccess {
  static const Characteristic::Compiled& get(const Characteristic& c) {
    return *c.compiled_;
  }
};

Characteristic::Characteristic(CharacteristicSpec spec) : spec_(std::move(spec)) {
  const std::string ctx = "characteristic \"" + spec_.name + "\"";
  if (spec_.name.empty()) throw ValidationError("characteristic without a name");
  if (spec_.groups.size() < 2)
    throw ValidationError(ctx + " needs at least 2 groups");
  if (spec_.detection_window_chars < 1)
    throw ValidationError(ctx + ": detection_window_chars must be >= 1");
  if (spec_.fallback_policy != "exclude_cohort")
    throw ValidationError(ctx + ": unsupported fallback_policy \"" +
                          spec_.fallback_policy + "\"");

  auto compiled = std::make_shared<Compiled>();
  compiled->window = spec_.detection_window_chars;

  std::string noun_pattern;
  std::map<std::string, std::size_t> pronoun_owner;
  std::vector<std::vector<std::string>> owned_tokens(spec_.groups.size());

  for (std::size_t g = 0; g < spec_.groups.size(); ++g) {
    const TestGroup& group = spec_.groups[g];
    const std::string gctx = ctx + ", group \"" + group.name + "\"";
    if (group.name.empty()) throw ValidationError(ctx + ": group without a name");
    if (!compiled->index.emplace(group.name, g).second)
      throw ValidationError(ctx + ": duplicate group \"" + group.name + "\"");
    if (group.canonical.empty() && !group.absent_marker)
      throw ValidationError(gctx + ": canonical form is empty");
    if (group.absent_marker && !group.patterns.empty())
      throw ValidationError(gctx + ": the absent marker cannot have patterns");
    if (group.absent_marker && group.modifier)
      throw ValidationError(gctx + ": the absent marker cannot be a modifier");

    if (!group.patterns.empty()) {
      std::string alternation;
      for (const auto& p : group.patterns) {
        compile(p, gctx);
        if (!alternation.empty()) alternation += '|';
        alternation += "(?:" + p + ")";
      }
      std::string capture = "npg" + std::to_string(g);
      if (!noun_pattern.empty()) noun_pattern += '|';
      noun_pattern += "(?<" + capture + ">" + alternation + ")";
      compiled->noun_captures.emplace_back(capture, g);
    }

    std::unordered_set<std::string> own;
    own.insert(lower(group.canonical));
    for (const auto& [from, to] : group.swaps) own.insert(lower(to));
    compiled->own_forms.push_back(std::move(own));

    for (const auto& [from, to] : group.pronouns) {
      for (const auto& alt : split_alternatives(to)) {
        if (alt.empty()) throw ValidationError(gctx + ": empty pronoun in map");
        auto token = lower(alt);
        auto [it, inserted] = pronoun_owner.emplace(token, g);
        if (!inserted && it->second != g)
          throw ValidationError(ctx + ": pronoun \"" + token +
                                "\" is owned by two groups");
        if (inserted) owned_tokens[g].push_back(token);
      }
    }
  }

  if (!noun_pattern.empty()) compiled->nouns = compile(noun_pattern, ctx);

  std::string pronoun_pattern;
  for (std::size_t g = 0; g < owned_tokens.size(); ++g) {
    auto& tokens = owned_tokens[g];
    if (tokens.empty()) continue;
    std::sort(tokens.begin(), tokens.end(), [](const auto& a, const auto& b) {
      return a.size() != b.size() ? a.size() > b.size() : a < b;
    });
    std::string alternation;
    for (const auto& t : tokens) {
      if (!alternation.empty()) alternation += '|';
      if (is_word_char(t.front())) alternation += "\\b";
      alternation += regex_escape(t);
      if (is_word_char(t.back())) alternation += "\\b";
    }
    std::string capture = "prg" + std::to_string(g);
    if (!pronoun_pattern.empty()) pronoun_pattern += '|';
    pronoun_pattern += "(?<" + capture + ">" + alternation + ")";
    compiled->pronoun_captures.emplace_back(capture, g);
  }
  if (!pronoun_pattern.empty()) compiled->pronouns = compile(pronoun_pattern, ctx);

  if (!spec_.insertion_anchor.empty())
    compiled->anchor = compile(spec_.insertion_anchor, ctx + " insertion anchor");

  compiled_ = std::move(compiled);

  // Canonical forms must be detected as their own group.
  for (const auto& group : spec_.groups) {
    if (group.absent_marker || group.kind != MentionKind::noun_phrase) continue;
    auto resolved = resolve_groups(detect(group.canonical, *this));
    if (resolved != std::set<std::string>{group.name}) {
      throw ValidationError(ctx + ": canonical form \"" + group.canonical +
                            "\" of group \"" + group.name +
                            "\" is not detected as that group");
    }
  }
}

Characteristic::~Characteristic() = default;
Characteristic::Characteristic(const Characteristic&) = default;
Characteristic& Characteristic::operator=(const Characteristic&) = default;
Characteristic::Characteristic(Characteristic&&) noexcept = default;
Characteristic& Characteristic::operator=(Characteristic&&) noexcept = default;

std::vector<std::string> Characteristic::group_names() const {
  std::vector<std::string> names;
  for (const auto& g : spec_.groups) names.push_back(g.name);
  return names;
}

const TestGroup& Characteristic::group(const std::string& name) const {
  auto it = compiled_->index.find(name);
  if (it == compiled_->index.end()) {
    throw ValidationError("characteristic \"" + spec_.name +
                          "\" has no group \"" + name + "\"");
  }
  return spec_.groups[it->second];
}

bool Characteristic::has_group(const std::string& name) const {
  return compiled_->index.count(name) > 0;
}

const TestGroup* Characteristic::absent_marker_group() const {
  for (const auto& g : spec_.groups)
    if (g.absent_marker) return &g;
  return nullptr;
}

std::vector<MentionSpan> detect(const std::string& text,
                                const Characteristic& characteristic) {
  const auto& c = *characteristic.compiled_;
  const auto& groups = characteristic.groups();
  std::vector<MentionSpan> spans;

  if (c.nouns) {
    const std::size_t window = window_end_bytes(text, c.window);
    for (boost::sregex_iterator it(text.begin(), text.end(), *c.nouns), end;
         it != end; ++it) {
      const auto& m = *it;
      const auto pos = static_cast<std::size_t>(m.position());
      if (pos >= window) break;
      if (m.length() == 0) continue;
      for (const auto& [capture, g] : c.noun_captures) {
        if (m[capture].matched) {
          spans.push_back(MentionSpan{pos, pos + static_cast<std::size_t>(m.length()),
                                      groups[g].name, groups[g].kind});
          break;
        }
      }
    }
  }

  if (c.pronouns) {
    const std::size_t noun_count = spans.size();
    for (boost::sregex_iterator it(text.begin(), text.end(), *c.pronouns), end;
         it != end; ++it) {
      const auto& m = *it;
      const auto start = static_cast<std::size_t>(m.position());
      const auto stop = start + static_cast<std::size_t>(m.length());
      if (stop == start) continue;
      bool overlaps = false;
      for (std::size_t i = 0; i < noun_count && !overlaps; ++i)
        overlaps = start < spans[i].end && spans[i].start < stop;
      if (overlaps) continue;
      for (const auto& [capture, g] : c.pronoun_captures) {
        if (m[capture].matched) {
          spans.push_back(MentionSpan{start, stop, groups[g].name, MentionKind::pronoun});
          break;
        }
      }
    }
    std::sort(spans.begin(), spans.end(),
              [](const MentionSpan& a, const MentionSpan& b) { return a.start < b.start; });
  }
  return spans;
}

std::vector<MentionSpan> detect(const PatientNote& note,
                                const Characteristic& characteristic) {
  return detect(note.text, characteristic);
}

std::set<std::string> resolve_groups(const std::vector<MentionSpan>& spans) {
  std::set<std::string> nouns;
  std::set<std::string> pronouns;
  for (const auto& s : spans) {
    (s.kind == MentionKind::pronoun ? pronouns : nouns).insert(s.group);
  }
  return nouns.empty() ? pronouns : nouns;
}

namespace {

enum class Style { verbatim, lower, upper, title };

Style style_of(const std::string& source) {
  std::size_t letters = 0, uppers = 0;
  bool first_upper = false, rest_lower = true;
  for (char ch : source) {
    auto u = static_cast<unsigned char>(ch);
    if (!std::isalpha(u)) continue;
    bool is_upper = std::isupper(u) != 0;
    if (letters == 0) {
      first_upper = is_upper;
    } else if (is_upper) {
      rest_lower = false;
    }
    ++letters;
    if (is_upper) ++uppers;
  }
  if (letters == 0) return Style::verbatim;
  if (uppers == letters) return letters >= 2 ? Style::upper : Style::title;
  if (uppers == 0) return Style::lower;
  if (first_upper && rest_lower) return Style::title;
  return Style::verbatim;
}

std::string apply_style(Style style, const std::string& replacement) {
  switch (style) {
    case Style::verbatim: return replacement;
    case Style::lower: return lower(replacement);
    case Style::upper: return upper(replacement);
    case Style::title: {
      std::string out = replacement;
      bool at_word_start = true;
      for (char& ch : out) {
        auto u = static_cast<unsigned char>(ch);
        if (std::isalpha(u)) {
          if (at_word_start) ch = static_cast<char>(std::toupper(u));
          at_word_start = false;
        } else if (std::isspace(u)) {
          at_word_start = true;
        }
      }
      return out;
    }
  }
  return replacement;
}

std::string styled(const std::string& replacement, const std::string& source) {
  return apply_style(style_of(source), replacement);
}

std::size_t letter_count(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char ch) {
    return std::isalpha(static_cast<unsigned char>(ch)) != 0;
  }));
}

// Words after which an ambiguous "her" is read as an object pronoun.
const std::unordered_set<std::string>& object_context_words() {
  static const std::unordered_set<std::string> words = {
      "a",       "about",  "after",   "again",     "also",    "an",
      "and",     "any",    "are",     "as",        "at",      "back",
      "be",      "because", "been",   "before",    "being",   "but",
      "by",      "can",    "could",   "did",       "does",    "do",
      "down",    "for",    "from",    "had",       "has",     "have",
      "home",    "if",     "in",      "into",      "is",      "may",
      "might",   "not",    "of",      "off",       "on",      "or",
      "out",     "over",   "per",     "should",    "since",   "so",
      "some",    "than",   "that",    "the",       "then",    "these",
      "this",    "those",  "through", "to",        "today",   "tomorrow",
      "until",   "up",     "via",     "was",       "were",    "when",
      "while",   "will",   "with",    "would",     "yesterday", "who",
      "which",   "where",  "feel",    "feels",     "felt",    "go",
      "went",    "get",    "got",     "know",      "knows",   "seem",
      "seemed",  "stay",   "stayed",  "return",    "returned", "said",
      "stated",  "reported", "noted", "received",  "continue", "continued"};
  return words;
}

bool followed_by_nominal(const std::string& text, std::size_t pos) {
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
    ++pos;
  if (pos >= text.size() || !std::isalnum(static_cast<unsigned char>(text[pos])))
    return false;
  std::size_t end = pos;
  while (end < text.size() &&
         (std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '\''))
    ++end;
  return object_context_words().count(lower(text.substr(pos, end - pos))) == 0;
}

std::optional<std::string> pronoun_replacement(const std::string& text,
                                               const MentionSpan& span,
                                               const TestGroup& target) {
  const std::string source = text.substr(span.start, span.end - span.start);
  auto it = target.pronouns.find(lower(source));
  if (it == target.pronouns.end()) return std::nullopt;
  auto alternatives = split_alternatives(it->second);
  std::string chosen = alternatives.front();
  if (alternatives.size() > 1 && !followed_by_nominal(text, span.end))
    chosen = alternatives[1];
  return styled(chosen, source);
}

std::string strip_modifier(const std::string& span_text, const TestGroup& group) {
  std::size_t pos = 0;
  if (lower(span_text.substr(0, group.canonical.size())) == lower(group.canonical)) {
    pos = group.canonical.size();
  } else {
    while (pos < span_text.size() &&
           !std::isspace(static_cast<unsigned char>(span_text[pos])))
      ++pos;
  }
  while (pos < span_text.size() &&
         std::isspace(static_cast<unsigned char>(span_text[pos])))
    ++pos;
  return span_text.substr(pos);
}

std::string noun_replacement(const std::string& span_text, const TestGroup& source,
                             const TestGroup& target,
                             const std::unordered_set<std::string>& target_own) {
  const std::string noun =
      source.modifier ? strip_modifier(span_text, source) : span_text;
  if (target.modifier) {
    if (noun.empty()) return target.canonical;
    std::string mod = letter_count(noun) >= 2 ? styled(target.canonical, noun)
                                              : target.canonical;
    return mod + " " + noun;
  }
  if (noun.empty()) return styled(target.canonical, span_text);
  const std::string key = lower(noun);
  if (auto it = target.swaps.find(key); it != target.swaps.end())
    return styled(it->second, noun);
  if (target_own.count(key)) return noun;
  return styled(target.canonical, noun);
}

std::string apply_edits(const std::string& text, const std::vector<TextEdit>& edits) {
  std::string out;
  out.reserve(text.size() + 32);
  std::size_t cursor = 0;
  for (const auto& e : edits) {
    out.append(text, cursor, e.start - cursor);
    out += e.replacement;
    cursor = e.end;
  }
  out.append(text, cursor, std::string::npos);
  return out;
}

}  // namespace

AlterResult alter(const std::string& text, const Characteristic& characteristic,
                  const std::string& target_name) {
  const auto& c = AlterAccess::get(characteristic);
  const TestGroup& target = characteristic.group(target_name);
  const std::size_t target_index = c.index.at(target_name);

  const auto spans = detect(text, characteristic);
  bool has_nouns = false;
  bool has_pronouns = false;
  std::vector<TextEdit> edits;

  for (const auto& span : spans) {
    const bool is_pronoun = span.kind == MentionKind::pronoun;
    (is_pronoun ? has_pronouns : has_nouns) = true;
    if (span.group == target_name) continue;

    if (is_pronoun) {
      if (target.modifier || target.absent_marker) continue;
      if (auto repl = pronoun_replacement(text, span, target))
        edits.push_back(TextEdit{span.start, span.end, *repl});
      continue;
    }

    if (target.absent_marker) {
      std::size_t start = span.start, end = span.end;
      const std::size_t prev_end = edits.empty() ? 0 : edits.back().end;
      if (end < text.size() && text[end] == ' ') {
        ++end;
      } else if (start > prev_end && text[start - 1] == ' ') {
        --start;
      }
      edits.push_back(TextEdit{start, end, ""});
      continue;
    }

    const TestGroup& source = characteristic.group(span.group);
    edits.push_back(TextEdit{
        span.start, span.end,
        noun_replacement(text.substr(span.start, span.end - span.start), source,
                         target, c.own_forms[target_index])});
  }

  const bool pronouns_suffice =
      has_pronouns && !target.pronouns.empty() && !target.modifier;
  const bool need_add = !has_nouns && !target.absent_marker && !pronouns_suffice;

  AlterOp op = edits.empty() ? AlterOp::keep : AlterOp::change;
  if (need_add) {
    if (!c.anchor) {
      return CohortExclusion{"no " + characteristic.name() +
                             " mention and no insertion anchor"};
    }
    boost::smatch m;
    const std::size_t window = window_end_bytes(text, c.window);
    if (!boost::regex_search(text, m, *c.anchor) ||
        static_cast<std::size_t>(m.position()) >= window) {
      return CohortExclusion{"no " + characteristic.name() +
                             " mention and insertion anchor did not match"};
    }
    std::size_t at = static_cast<std::size_t>(m.position());
    if (m["insert"].matched) at = static_cast<std::size_t>(m.position("insert"));
    std::string insertion = target.canonical;
    if (at > 0 && !std::isspace(static_cast<unsigned char>(text[at - 1])))
      insertion.insert(insertion.begin(), ' ');
    if (at < text.size() && !std::isspace(static_cast<unsigned char>(text[at])))
      insertion += ' ';
    // Insertions never land inside a pronoun edit: the anchor precedes or
    // follows whole words.
    auto pos = std::find_if(edits.begin(), edits.end(),
                            [at](const TextEdit& e) { return e.start >= at; });
    edits.insert(pos, TextEdit{at, at, insertion});
    op = AlterOp::add;
  }

  if (op == AlterOp::keep) return Alteration{text, AlterOp::keep, {}};
  std::string altered = apply_edits(text, edits);
  return Alteration{std::move(altered), op, std::move(edits)};
}

AlterResult alter(const PatientNote& note, const Characteristic& characteristic,
                  const std::string& target) {
  return alter(note.text, characteristic, target);
}

const GroupedDataset::Group& GroupedDataset::group(const std::string& name) const {
  for (const auto& g : groups)
    if (g.name == name) return g;
  throw ValidationError("dataset for \"" + characteristic + "\" has no group \"" +
                        name + "\"");
}

std::vector<std::string> GroupedDataset::excluded_ids() const {
  std::vector<std::string> ids;
  for (const auto& e : excluded) ids.push_back(e.id);
  return ids;
}

GroupedDataset generate_groups(const Corpus& corpus,
                               const Characteristic& characteristic) {
  if (corpus.empty()) throw ValidationError("cannot generate groups from an empty corpus");

  std::vector<const PatientNote*> ordered;
  for (const auto& note : corpus.notes()) ordered.push_back(&note);
  std::sort(ordered.begin(), ordered.end(),
            [](const PatientNote* a, const PatientNote* b) { return a->id < b->id; });

  GroupedDataset out;
  out.characteristic = characteristic.name();
  const auto names = characteristic.group_names();
  for (const auto& n : names) out.groups.push_back({n, {}});

  std::vector<Alteration> row(names.size());
  for (const PatientNote* note : ordered) {
    bool excluded = false;
    for (std::size_t g = 0; g < names.size() && !excluded; ++g) {
      auto result = alter(note->text, characteristic, names[g]);
      if (auto* exclusion = std::get_if<CohortExclusion>(&result)) {
        out.excluded.push_back({note->id, names[g], exclusion->reason});
        excluded = true;
      } else {
        row[g] = std::move(std::get<Alteration>(result));
      }
    }
    if (excluded) continue;
    for (std::size_t g = 0; g < names.size(); ++g) {
      out.groups[g].samples.push_back({note->id, std::move(row[g].text), row[g].op});
    }
  }
  return out;
}

GroupedDataset age_groups(const Corpus& corpus, const std::string& over90_token) {
  return generate_groups(corpus, Characteristic(age_spec(over90_token)));
}

}  // namespace noteprobe
