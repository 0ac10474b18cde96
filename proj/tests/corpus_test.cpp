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

#include "noteprobe/corpus.hpp"

#include <fstream>

#include <gtest/gtest.h>

#include "noteprobe/error.hpp"
#include "noteprobe/perturb.hpp"
#include "support/temp_dir.hpp"

namespace noteprobe {
namespace {

using testing::TempDir;

void write_lines(const std::filesystem::path& path,
                 const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& l : lines) out << l << '\n';
}

std::size_t count_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

TEST(LoadCorpus, TwoWellFormedLines) {
  TempDir dir;
  write_lines(dir / "notes.jsonl",
              {R"({"id": "a1", "text": "58 yo F with chest pain", "labels": ["mortality"]})",
               R"({"id": "a2", "text": "Patient denies pain."})"});
  Corpus corpus = load_corpus(dir / "notes.jsonl");
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus.notes()[0].id, "a1");
  EXPECT_TRUE(corpus.notes()[0].has_label("mortality"));
  EXPECT_FALSE(corpus.notes()[1].labels.has_value());
  EXPECT_EQ(corpus.label_vocabulary(), std::vector<std::string>{"mortality"});
}

TEST(LoadCorpus, DuplicateIdNamesIdAndLine) {
  TempDir dir;
  std::vector<std::string> lines;
  for (int i = 1; i <= 7; ++i) {
    std::string id = (i == 3 || i == 7) ? "a1" : "n" + std::to_string(i);
    lines.push_back(R"({"id": ")" + id + R"(", "text": "x"})");
  }
  write_lines(dir / "notes.jsonl", lines);
  try {
    load_corpus(dir / "notes.jsonl");
    FAIL() << "expected a ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
    EXPECT_NE(std::string(e.what()).find("\"a1\""), std::string::npos);
  }
}

TEST(LoadCorpus, MalformedLineReportsLineNumber) {
  TempDir dir;
  write_lines(dir / "notes.jsonl", {R"({"id": "a", "text": "x"})", R"({"id": "b", )"});
  try {
    load_corpus(dir / "notes.jsonl");
    FAIL() << "expected a ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadCorpus, RejectsEmptyTextAndMissingFields) {
  TempDir dir;
  write_lines(dir / "a.jsonl", {R"({"id": "a", "text": ""})"});
  EXPECT_THROW(load_corpus(dir / "a.jsonl"), ValidationError);
  write_lines(dir / "b.jsonl", {R"({"id": "a"})"});
  EXPECT_THROW(load_corpus(dir / "b.jsonl"), ParseError);
  EXPECT_THROW(load_corpus(dir / "missing.jsonl"), IoError);
}

TEST(LoadCorpus, ExplicitVocabularyMustCoverLabels) {
  TempDir dir;
  write_lines(dir / "notes.jsonl", {R"({"id": "a", "text": "x", "labels": ["b"]})"});
  write_lines(dir / "vocab.json", {R"(["z", "b"])"});
  Corpus corpus = load_corpus(dir / "notes.jsonl", dir / "vocab.json");
  EXPECT_EQ(corpus.label_vocabulary(), (std::vector<std::string>{"z", "b"}));
  write_lines(dir / "vocab2.json", {R"(["z"])"});
  EXPECT_THROW(load_corpus(dir / "notes.jsonl", dir / "vocab2.json"), ValidationError);
}

TEST(SaveCorpus, EmptyCorpusGivesEmptyFile) {
  TempDir dir;
  save_corpus(Corpus{}, dir / "empty.jsonl");
  EXPECT_EQ(std::filesystem::file_size(dir / "empty.jsonl"), 0u);
  EXPECT_EQ(load_corpus(dir / "empty.jsonl"), Corpus{});
}

TEST(SaveCorpus, OneNoteOneLine) {
  TempDir dir;
  Corpus corpus({PatientNote{"a", "text with \"quotes\" and ümlauts", std::nullopt}});
  save_corpus(corpus, dir / "one.jsonl");
  EXPECT_EQ(count_lines(dir / "one.jsonl"), 1u);
  EXPECT_EQ(load_corpus(dir / "one.jsonl"), corpus);
}

TEST(SaveCorpus, SyntheticRoundTrip) {
  TempDir dir;
  Corpus corpus = generate_synthetic_corpus(7, 1000, SyntheticProfile::defaults());
  save_corpus(corpus, dir / "syn.jsonl");
  EXPECT_EQ(count_lines(dir / "syn.jsonl"), 1000u);
  Corpus back = load_corpus(dir / "syn.jsonl");
  ASSERT_EQ(back.size(), corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    EXPECT_EQ(back.notes()[i].id, corpus.notes()[i].id);
    EXPECT_EQ(back.notes()[i].text, corpus.notes()[i].text);
    EXPECT_EQ(back.notes()[i].labels, corpus.notes()[i].labels);
  }
  EXPECT_EQ(back, corpus);
}

TEST(Synthetic, SingleNoteHeaderIsDetectable) {
  Corpus corpus = generate_synthetic_corpus(1, 1, SyntheticProfile::defaults());
  ASSERT_EQ(corpus.size(), 1u);
  const auto& note = corpus.notes()[0];
  Characteristic age(age_spec());
  Characteristic gender(gender_spec());
  EXPECT_EQ(resolve_groups(detect(note, age)).size(), 1u) << note.text;
  EXPECT_EQ(resolve_groups(detect(note, gender)).size(), 1u) << note.text;
}

TEST(Synthetic, Deterministic) {
  auto a = generate_synthetic_corpus(42, 300, SyntheticProfile::defaults());
  auto b = generate_synthetic_corpus(42, 300, SyntheticProfile::defaults());
  auto c = generate_synthetic_corpus(43, 300, SyntheticProfile::defaults());
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  TempDir dir;
  save_corpus(a, dir / "a.jsonl");
  save_corpus(b, dir / "b.jsonl");
  std::ifstream fa(dir / "a.jsonl"), fb(dir / "b.jsonl");
  std::string sa((std::istreambuf_iterator<char>(fa)), {});
  std::string sb((std::istreambuf_iterator<char>(fb)), {});
  EXPECT_EQ(sa, sb);
}

TEST(Synthetic, EveryNoteHasOneAgeAndOneGenderMention) {
  SyntheticProfile profile = SyntheticProfile::defaults();
  profile.gender_weights = {{"female", 0.4}, {"male", 0.4}, {"transgender", 0.2}};
  profile.over90_rate = 0.1;
  Corpus corpus = generate_synthetic_corpus(5, 2000, profile);
  Characteristic age(age_spec());
  Characteristic gender(gender_spec());
  for (const auto& note : corpus.notes()) {
    std::size_t ages = detect(note, age).size();
    std::size_t genders = 0;
    for (const auto& span : detect(note, gender))
      if (span.kind != MentionKind::pronoun) ++genders;
    ASSERT_EQ(ages, 1u) << note.text;
    ASSERT_EQ(genders, 1u) << note.text;
  }
}

TEST(Synthetic, ConditionalLabelRateMatchesProfile) {
  SyntheticProfile profile = SyntheticProfile::defaults();
  profile.labels.clear();
  profile.labels["htn"] = {0.1, {{"female", 0.6}}};
  Corpus corpus = generate_synthetic_corpus(11, 10000, profile);
  Characteristic gender(gender_spec());
  std::size_t in_group = 0, positive = 0;
  for (const auto& note : corpus.notes()) {
    if (resolve_groups(detect(note, gender)) != std::set<std::string>{"female"}) continue;
    ++in_group;
    if (note.has_label("htn")) ++positive;
  }
  ASSERT_GT(in_group, 4000u);
  EXPECT_NEAR(static_cast<double>(positive) / in_group, 0.6, 0.02);
}

TEST(Synthetic, ProfileJsonRoundTripAndValidation) {
  SyntheticProfile p = SyntheticProfile::defaults();
  SyntheticProfile q = profile_from_json(profile_to_json(p));
  EXPECT_EQ(profile_to_json(q), profile_to_json(p));
  EXPECT_THROW(profile_from_json(R"({"gender": {"robot": 1.0}})"), ValidationError);
  EXPECT_THROW(profile_from_json(R"({"labels": {"x": 1.5}})"), ValidationError);
  EXPECT_THROW(generate_synthetic_corpus(1, 0, p), ValidationError);
}

}  // namespace
}  // namespace noteprobe
