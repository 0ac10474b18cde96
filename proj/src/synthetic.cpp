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

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "noteprobe/corpus.hpp"
#include "noteprobe/error.hpp"

namespace noteprobe {

using nlohmann::json;

SyntheticProfile SyntheticProfile::defaults() {
  SyntheticProfile p;
  auto rates = [](double def, std::map<std::string, double> by_group = {}) {
    return LabelRates{def, std::move(by_group)};
  };
  p.labels["mortality"] = rates(0.10, {{"over90", 0.30}});
  p.labels["Cardiac dysrhythmias"] = rates(0.25, {{"over90", 0.40}});
  p.labels["Essential hypertension"] =
      rates(0.35, {{"african_american", 0.50}});
  p.labels["Acute kidney failure"] = rates(0.20, {{"over90", 0.30}});
  p.labels["Chronic ischemic heart disease"] =
      rates(0.20, {{"female", 0.12}, {"male", 0.28}});
  p.labels["Urinary tract disorders"] =
      rates(0.12, {{"female", 0.18}, {"male", 0.06}});
  p.labels["Abuse of drugs"] = rates(0.08, {{"transgender", 0.15}});
  p.labels["Unspecified anemias"] = rates(0.15, {{"hispanic", 0.22}});
  p.labels["Chronic kidney disease"] = rates(0.14, {{"no_mention", 0.16}});
  return p;
}

namespace {

void check_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ValidationError(what + " must be in [0, 1]");
}

void check_weights(const std::vector<std::pair<std::string, double>>& weights,
                   const std::string& what) {
  double total = 0.0;
  for (const auto& [name, w] : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ValidationError(what + " weight for \"" + name + "\" must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw ValidationError(what + " weights must not all be zero");
}

const std::array<std::string, 3> kKnownGender = {"female", "male", "transgender"};
const std::array<std::string, 4> kKnownEthnicity = {"white", "african_american",
                                                    "hispanic", "asian"};

}  // namespace

void SyntheticProfile::validate() const {
  check_weights(gender_weights, "gender");
  for (const auto& [name, w] : gender_weights) {
    if (std::find(kKnownGender.begin(), kKnownGender.end(), name) == kKnownGender.end())
      throw ValidationError("unknown gender group \"" + name + "\"");
  }
  check_probability(ethnicity_mention_rate, "ethnicity_mention_rate");
  if (ethnicity_mention_rate > 0.0) check_weights(ethnicity_weights, "ethnicity");
  for (const auto& [name, w] : ethnicity_weights) {
    if (std::find(kKnownEthnicity.begin(), kKnownEthnicity.end(), name) ==
        kKnownEthnicity.end())
      throw ValidationError("unknown ethnicity group \"" + name + "\"");
  }
  if (age_min < 18 || age_max > 89 || age_min > age_max)
    throw ValidationError("age range must satisfy 18 <= min <= max <= 89");
  check_probability(over90_rate, "over90_rate");
  for (const auto& [label, r] : labels) {
    if (label.empty()) throw ValidationError("empty label name in profile");
    check_probability(r.default_rate, "default rate of \"" + label + "\"");
    for (const auto& [group, rate] : r.by_group)
      check_probability(rate, "rate of \"" + label + "\" for \"" + group + "\"");
  }
}

SyntheticProfile profile_from_json(const std::string& json_text) {
  SyntheticProfile p = SyntheticProfile::defaults();
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw ValidationError("profile must be a JSON object");
    auto weights = [](const json& obj) {
      std::vector<std::pair<std::string, double>> out;
      for (const auto& [k, v] : obj.items()) out.emplace_back(k, v.get<double>());
      return out;
    };
    if (j.contains("gender")) p.gender_weights = weights(j.at("gender"));
    if (j.contains("ethnicity")) p.ethnicity_weights = weights(j.at("ethnicity"));
    if (j.contains("ethnicity_mention_rate"))
      p.ethnicity_mention_rate = j.at("ethnicity_mention_rate").get<double>();
    if (j.contains("age")) {
      const auto& a = j.at("age");
      p.age_min = a.value("min", p.age_min);
      p.age_max = a.value("max", p.age_max);
      p.over90_rate = a.value("over90_rate", p.over90_rate);
    }
    if (j.contains("labels")) {
      p.labels.clear();
      for (const auto& [label, spec] : j.at("labels").items()) {
        SyntheticProfile::LabelRates r;
        if (spec.is_number()) {
          r.default_rate = spec.get<double>();
        } else {
          r.default_rate = spec.value("default", 0.0);
          if (spec.contains("by_group"))
            r.by_group = spec.at("by_group").get<std::map<std::string, double>>();
        }
        p.labels[label] = std::move(r);
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("synthetic profile: ") + e.what());
  }
  p.validate();
  return p;
}

SyntheticProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open profile " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return profile_from_json(buf.str());
}

std::string profile_to_json(const SyntheticProfile& profile) {
  json j;
  json gender = json::object();
  for (const auto& [k, v] : profile.gender_weights) gender[k] = v;
  json eth = json::object();
  for (const auto& [k, v] : profile.ethnicity_weights) eth[k] = v;
  j["gender"] = gender;
  j["ethnicity"] = eth;
  j["ethnicity_mention_rate"] = profile.ethnicity_mention_rate;
  j["age"] = {{"min", profile.age_min},
              {"max", profile.age_max},
              {"over90_rate", profile.over90_rate}};
  json labels = json::object();
  for (const auto& [label, r] : profile.labels) {
    labels[label] = {{"default", r.default_rate}, {"by_group", r.by_group}};
  }
  j["labels"] = labels;
  return j.dump(2) + "\n";
}

namespace {

// Portable draws on top of mt19937_64, whose output sequence is fixed by the
// standard (the <random> distributions are not).
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }
  int integer(int lo, int hi) {
    return lo + static_cast<int>(index(static_cast<std::size_t>(hi - lo + 1)));
  }
  template <typename T, std::size_t N>
  const T& pick(const std::array<T, N>& items) {
    return items[index(N)];
  }
  const std::string& weighted(
      const std::vector<std::pair<std::string, double>>& weights) {
    double total = 0.0;
    for (const auto& w : weights) total += w.second;
    double u = uniform() * total;
    for (const auto& w : weights) {
      if (u < w.second) return w.first;
      u -= w.second;
    }
    for (auto it = weights.rbegin(); it != weights.rend(); ++it)
      if (it->second > 0.0) return it->first;
    return weights.back().first;
  }

 private:
  std::mt19937_64 rng_;
};

struct Pronouns {
  const char* subject;      // she / he
  const char* possessive;   // her / his
  const char* object;       // her / him
};

constexpr Pronouns kShe{"she", "her", "her"};
constexpr Pronouns kHe{"he", "his", "him"};

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 32);
  return s;
}

const std::array<std::string, 3> kAgeUnits = {"year old", "yo", "y/o"};
const std::array<std::string, 3> kFemaleTerms = {"female", "woman", "F"};
const std::array<std::string, 3> kMaleTerms = {"male", "man", "M"};
const std::array<std::string, 3> kVerbs = {"admitted", "presenting",
                                           "transferred"};
const std::array<std::string, 10> kComplaints = {
    "chest pain",         "shortness of breath", "abdominal pain",
    "fever and cough",    "altered mental status", "syncope",
    "lower GI bleed",     "worsening leg swelling", "new onset seizure",
    "nausea and vomiting"};
const std::array<std::string, 8> kHistory = {
    "hypertension and hyperlipidemia", "atrial fibrillation on warfarin",
    "type 2 diabetes",                 "COPD on home oxygen",
    "chronic kidney disease",          "coronary artery disease",
    "alcohol use disorder",            "prior stroke"};
const std::array<std::string, 6> kMedications = {
    "metoprolol and lisinopril", "insulin",  "aspirin and atorvastatin",
    "furosemide",                "apixaban", "albuterol"};

const std::string& ethnicity_term(const std::string& group) {
  static const std::map<std::string, std::string> terms = {
      {"white", "White"},
      {"african_american", "African American"},
      {"hispanic", "Hispanic"},
      {"asian", "Asian"}};
  return terms.at(group);
}

}  // namespace

Corpus generate_synthetic_corpus(std::uint64_t seed, std::size_t n,
                                 const SyntheticProfile& profile) {
  if (n < 1) throw ValidationError("synthetic corpus size must be >= 1");
  profile.validate();

  Draw draw(seed);
  std::size_t width = std::max<std::size_t>(6, std::to_string(n).size());
  std::vector<PatientNote> notes;
  notes.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const bool over90 = draw.bernoulli(profile.over90_rate);
    const int age = draw.integer(profile.age_min, profile.age_max);
    const std::string& unit = draw.pick(kAgeUnits);
    const std::string& gender = draw.weighted(profile.gender_weights);

    std::string gender_term;
    bool uses_she = false;
    if (gender == "female") {
      gender_term = draw.pick(kFemaleTerms);
      uses_she = true;
    } else if (gender == "male") {
      gender_term = draw.pick(kMaleTerms);
    } else {
      uses_she = draw.bernoulli(0.5);
      gender_term = "transgender " + (uses_she ? draw.pick(kFemaleTerms)
                                               : draw.pick(kMaleTerms));
    }

    std::string ethnicity = "no_mention";
    if (draw.bernoulli(profile.ethnicity_mention_rate))
      ethnicity = draw.weighted(profile.ethnicity_weights);

    const Pronouns& pr = uses_she ? kShe : kHe;
    const std::string& verb = draw.pick(kVerbs);
    const std::string& complaint = draw.pick(kComplaints);
    const std::string& history = draw.pick(kHistory);
    const std::string& meds = draw.pick(kMedications);
    const int days = draw.integer(1, 9);
    const bool family_sentence = draw.bernoulli(0.5);

    std::string text;
    text += over90 ? std::string("[**Age over 90 **] ") + unit
                   : std::to_string(age) + " " + unit;
    text += " ";
    if (ethnicity != "no_mention") text += ethnicity_term(ethnicity) + " ";
    text += gender_term + " " + verb + " with " + complaint + ". ";
    text += capitalize(pr.subject) + " reports symptoms for " +
            std::to_string(days) + " days. ";
    text += capitalize(pr.possessive) + " past medical history is notable for " +
            history + ". ";
    if (family_sentence)
      text += std::string("Family brought ") + pr.object + " to the ED. ";
    text += std::string("Home medications include ") + meds + ". ";
    text += std::string("On arrival ") + pr.possessive +
            " vitals were stable and the team examined " + pr.object + ".";

    std::vector<std::string> labels;
    for (const auto& [label, rates] : profile.labels) {
      double rate = rates.default_rate;
      if (auto it = rates.by_group.find(gender); it != rates.by_group.end()) {
        rate = it->second;
      } else if (auto it2 = rates.by_group.find(ethnicity);
                 it2 != rates.by_group.end()) {
        rate = it2->second;
      } else if (over90) {
        if (auto it3 = rates.by_group.find("over90"); it3 != rates.by_group.end())
          rate = it3->second;
      }
      if (draw.bernoulli(rate)) labels.push_back(label);
    }

    std::string id = std::to_string(i + 1);
    id = "syn-" + std::string(width - id.size(), '0') + id;
    notes.push_back(PatientNote{std::move(id), std::move(text), std::move(labels)});
  }
  return Corpus(std::move(notes));
}

}  // namespace noteprobe
