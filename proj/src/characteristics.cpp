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

// Built-in characteristic definitions and their JSON form.

#include <nlohmann/json.hpp>

#include "noteprobe/error.hpp"
#include "noteprobe/perturb.hpp"

namespace noteprobe {

using nlohmann::ordered_json;

namespace {

// Lookahead shared by all age numerals: "73 year old", "73-year-old",
// "73 yo", "73yo", "73 y/o", "73 y.o.".
const char* const kAgeUnit =
    R"((?=\s*-?\s*(?:years?[- ]old|yrs?[- ]old|yo\b|y/o\b|y\.o\.)))";

const char* const kGenderNoun =
    R"((?:female|male|woman|man|lady|gentleman|(?-i:[FM]))\b)";

}  // namespace

CharacteristicSpec gender_spec() {
  CharacteristicSpec spec;
  spec.name = "gender";
  spec.detection_window_chars = 600;
  // Right after the age phrase: "58 yo| with chest pain".
  spec.insertion_anchor =
      R"((?:\[\*\*[^\]]*\*\*\]|\b\d{1,3})\s*-?\s*(?:years?[- ]old|yrs?[- ]old|yo\b|y/o\b|y\.o\.)(?<insert>))";

  TestGroup female;
  female.name = "female";
  female.canonical = "female";
  female.patterns = {R"(\bfemale\b)", R"(\bwoman\b)", R"(\blady\b)",
                     R"(\b(?-i:F)\b)"};
  female.swaps = {{"male", "female"}, {"man", "woman"}, {"gentleman", "lady"},
                  {"m", "F"}};
  female.pronouns = {{"he", "she"},       {"him", "her"},   {"his", "her"},
                     {"himself", "herself"}, {"mr.", "Ms."}, {"mrs.", "Mrs."},
                     {"hers", "hers"}};

  TestGroup male;
  male.name = "male";
  male.canonical = "male";
  male.patterns = {R"(\bmale\b)", R"(\bman\b)", R"(\bgentleman\b)",
                   R"(\b(?-i:M)\b)"};
  male.swaps = {{"female", "male"}, {"woman", "man"}, {"lady", "gentleman"},
                {"f", "M"}};
  male.pronouns = {{"she", "he"},          {"her", "his/him"}, {"hers", "his"},
                   {"herself", "himself"}, {"ms.", "Mr."},     {"mrs.", "Mr."}};

  TestGroup transgender;
  transgender.name = "transgender";
  transgender.canonical = "transgender";
  transgender.modifier = true;
  transgender.patterns = {std::string(R"(\btransgender\s+)") + kGenderNoun,
                          R"(\btransgender\b)"};

  spec.groups = {female, male, transgender};
  return spec;
}

CharacteristicSpec ethnicity_spec() {
  CharacteristicSpec spec;
  spec.name = "ethnicity";
  spec.detection_window_chars = 600;
  // Immediately before the gender term: "58 yo |F with sepsis".
  spec.insertion_anchor =
      std::string(R"((?<insert>)\b(?:transgender\s+)?)") + kGenderNoun;

  TestGroup none;
  none.name = "no_mention";
  none.absent_marker = true;

  TestGroup white;
  white.name = "white";
  white.canonical = "White";
  white.patterns = {R"(\bwhite\b(?!\s+(?:blood|count|cells?|matter|coat|plaques?)))",
                    R"(\bcaucasian\b)"};

  TestGroup black;
  black.name = "african_american";
  black.canonical = "African American";
  black.patterns = {R"(\bafrican[- ]american\b)"};

  TestGroup hispanic;
  hispanic.name = "hispanic";
  hispanic.canonical = "Hispanic";
  hispanic.patterns = {R"(\bhispanic\b)", R"(\blatin[ao]\b)"};

  TestGroup asian;
  asian.name = "asian";
  asian.canonical = "Asian";
  asian.patterns = {R"(\basian\b)"};

  spec.groups = {none, white, black, hispanic, asian};
  return spec;
}

CharacteristicSpec age_spec(const std::string& over90_token) {
  if (over90_token.empty()) throw ValidationError("over-90 token must not be empty");
  CharacteristicSpec spec;
  spec.name = "age";
  spec.detection_window_chars = 600;
  for (int age = 18; age <= 89; ++age) {
    TestGroup g;
    g.name = std::to_string(age);
    g.canonical = g.name;
    g.kind = MentionKind::age_numeral;
    g.patterns = {"\\b" + g.name + kAgeUnit};
    spec.groups.push_back(std::move(g));
  }
  TestGroup over90;
  over90.name = "over90";
  over90.canonical = over90_token;
  over90.kind = MentionKind::deid_token;
  // Accept the usual de-identification spellings as well as the configured token.
  std::string escaped;
  for (char c : over90_token) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == ' ') {
      escaped += c;
    } else {
      escaped += '\\';
      escaped += c;
    }
  }
  over90.patterns = {R"(\[\*\*\s*Age\s+over\s+90\s*\*\*\])"};
  if (escaped != R"(\[\*\*Age over 90 \*\*\])") over90.patterns.push_back(escaped);
  spec.groups.push_back(std::move(over90));
  return spec;
}

std::vector<std::string> builtin_characteristic_names() {
  return {"gender", "age", "ethnicity"};
}

CharacteristicSpec builtin_spec(const std::string& name) {
  if (name == "gender") return gender_spec();
  if (name == "ethnicity") return ethnicity_spec();
  if (name == "age") return age_spec();
  std::string known;
  for (const auto& n : builtin_characteristic_names())
    known += (known.empty() ? "" : ", ") + n;
  throw ValidationError("unknown characteristic \"" + name + "\" (built-ins: " +
                        known + ")");
}

std::vector<std::string> age_group_names() {
  std::vector<std::string> names;
  for (int age = 18; age <= 89; ++age) names.push_back(std::to_string(age));
  names.emplace_back("over90");
  return names;
}

namespace {

MentionKind kind_from_string(const std::string& s) {
  if (s == "noun_phrase") return MentionKind::noun_phrase;
  if (s == "age_numeral") return MentionKind::age_numeral;
  if (s == "deid_token") return MentionKind::deid_token;
  throw ValidationError("unknown group kind \"" + s + "\"");
}

}  // namespace

CharacteristicSpec characteristic_spec_from_json(const std::string& json_text) {
  CharacteristicSpec spec;
  try {
    const auto j = ordered_json::parse(json_text);
    spec.name = j.at("name").get<std::string>();
    spec.detection_window_chars =
        j.value("detection_window_chars", spec.detection_window_chars);
    spec.insertion_anchor = j.value("insertion_anchor", std::string());
    spec.fallback_policy = j.value("fallback_policy", spec.fallback_policy);
    for (const auto& jg : j.at("groups")) {
      TestGroup g;
      g.name = jg.at("name").get<std::string>();
      g.patterns = jg.value("patterns", std::vector<std::string>{});
      g.canonical = jg.value("canonical", std::string());
      g.absent_marker = jg.value("absent_marker", false);
      g.modifier = jg.value("modifier", false);
      if (jg.contains("pronouns"))
        g.pronouns = jg.at("pronouns").get<std::map<std::string, std::string>>();
      if (jg.contains("swaps"))
        g.swaps = jg.at("swaps").get<std::map<std::string, std::string>>();
      if (jg.contains("kind")) g.kind = kind_from_string(jg.at("kind").get<std::string>());
      spec.groups.push_back(std::move(g));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("characteristic spec: ") + e.what());
  }
  return spec;
}

std::string characteristic_spec_to_json(const CharacteristicSpec& spec) {
  ordered_json j;
  j["name"] = spec.name;
  j["detection_window_chars"] = spec.detection_window_chars;
  j["insertion_anchor"] = spec.insertion_anchor;
  j["fallback_policy"] = spec.fallback_policy;
  j["groups"] = ordered_json::array();
  for (const auto& g : spec.groups) {
    ordered_json jg;
    jg["name"] = g.name;
    jg["patterns"] = g.patterns;
    jg["canonical"] = g.canonical;
    if (!g.pronouns.empty()) jg["pronouns"] = g.pronouns;
    if (!g.swaps.empty()) jg["swaps"] = g.swaps;
    if (g.absent_marker) jg["absent_marker"] = true;
    if (g.modifier) jg["modifier"] = true;
    if (g.kind != MentionKind::noun_phrase) jg["kind"] = to_string(g.kind);
    j["groups"].push_back(std::move(jg));
  }
  return j.dump(2) + "\n";
}

}  // namespace noteprobe
