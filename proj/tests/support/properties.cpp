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

#include "support/properties.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <set>
#include <thread>

namespace noteprobe::testing {

std::string skeleton(const std::string& text, const std::vector<MentionSpan>& spans) {
  std::string stripped;
  std::size_t pos = 0;
  for (const auto& s : spans) {
    stripped.append(text, pos, s.start - pos);
    stripped += ' ';
    pos = s.end;
  }
  stripped.append(text, pos, std::string::npos);

  std::string out;
  bool in_space = false;
  for (char c : stripped) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out += ' ';
    in_space = false;
    out += c;
  }
  return out;
}

std::string describe(const PropertyViolation& v) {
  return v.property + " [" + v.id + " -> " + v.group + "]: " + v.detail;
}

namespace {

void check_note(const PatientNote& note, const Characteristic& ch,
                std::vector<PropertyViolation>& out) {
  const auto original_spans = detect(note.text, ch);
  const std::string original_skeleton = skeleton(note.text, original_spans);
  const bool mention_free = original_spans.empty();
  auto fail = [&](const char* property, const std::string& group, std::string detail) {
    out.push_back({property, note.id, group, std::move(detail)});
  };

  for (const auto& g : ch.groups()) {
    const auto result = alter(note.text, ch, g.name);
    const auto* a = std::get_if<Alteration>(&result);
    if (!a) continue;

    if ((a->op == AlterOp::keep) != (a->text == note.text))
      fail("op_consistency", g.name, std::string("op ") + to_string(a->op) + " on \"" + a->text + "\"");

    const auto spans = detect(a->text, ch);
    const auto resolved = resolve_groups(spans);
    const std::set<std::string> expected =
        g.absent_marker ? std::set<std::string>{} : std::set<std::string>{g.name};
    if (resolved != expected) {
      std::string got;
      for (const auto& r : resolved) got += r + " ";
      fail("round_trip", g.name, "resolved to {" + got + "} in \"" + a->text + "\"");
    }

    const auto again = alter(a->text, ch, g.name);
    const auto* b = std::get_if<Alteration>(&again);
    if (!b || b->op != AlterOp::keep || b->text != a->text)
      fail("idempotence", g.name, "second application changed \"" + a->text + "\"");

    if (skeleton(a->text, spans) != original_skeleton)
      fail("locality", g.name, "\"" + note.text + "\" -> \"" + a->text + "\"");

    if (g.absent_marker && mention_free && a->text != note.text)
      fail("absent_identity", g.name, "mention-free note was rewritten");
  }
}

}  // namespace

std::vector<PropertyViolation> check_perturbation_properties(
    const Corpus& corpus, const Characteristic& ch) {
  std::vector<PropertyViolation> violations;
  const auto& notes = corpus.notes();
  const unsigned workers = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  std::vector<std::vector<PropertyViolation>> partial(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < notes.size(); i += workers)
        check_note(notes[i], ch, partial[w]);
    });
  }
  for (auto& t : pool) t.join();
  for (auto& p : partial)
    violations.insert(violations.end(), p.begin(), p.end());

  const GroupedDataset ds = generate_groups(corpus, ch);
  const GroupedDataset ds2 = generate_groups(corpus, ch);
  if (!(ds == ds2)) violations.push_back({"determinism", "*", "*", "datasets differ"});

  std::vector<std::string> reference;
  for (const auto& s : ds.groups.front().samples) reference.push_back(s.id);
  for (const auto& g : ds.groups) {
    std::vector<std::string> ids;
    for (const auto& s : g.samples) ids.push_back(s.id);
    if (ids != reference)
      violations.push_back({"cohort_identity", "*", g.name, "id set differs"});
  }
  const auto excluded = ds.excluded_ids();
  if (reference.size() + excluded.size() != corpus.size())
    violations.push_back({"cohort_identity", "*", "*", "samples + excluded != corpus"});
  for (const auto& id : excluded) {
    if (std::binary_search(reference.begin(), reference.end(), id))
      violations.push_back({"cohort_identity", id, "*", "excluded id present in groups"});
  }
  return violations;
}

}  // namespace noteprobe::testing
