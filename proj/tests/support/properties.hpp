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

#pragma once

#include <string>
#include <vector>

#include "noteprobe/corpus.hpp"
#include "noteprobe/perturb.hpp"

namespace noteprobe::testing {

struct PropertyViolation {
  std::string property;
  std::string id;
  std::string group;
  std::string detail;
};

// Text with the given spans removed and whitespace runs collapsed.
std::string skeleton(const std::string& text, const std::vector<MentionSpan>& spans);

// Checks every note of `corpus` against every group of `characteristic`:
// idempotence, detection round-trip, locality, op consistency, cohort
// identity, absent-marker identity and determinism of generate_groups.
std::vector<PropertyViolation> check_perturbation_properties(
    const Corpus& corpus, const Characteristic& characteristic);

std::string describe(const PropertyViolation& v);

}  // namespace noteprobe::testing
