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

#include <fmt/format.h>

#include "noteprobe/error.hpp"
#include "noteprobe/report.hpp"

namespace noteprobe {

namespace {

std::string md_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string render_group_table(const GroupMeans& means, const std::string& label,
                               TableFormat format) {
  const auto& m = means.means;
  if (m.group_count() == 0) throw ValidationError("group table: no groups");
  const std::size_t li = m.label_index(label);

  // Markers compare the printed values, so visually equal entries tie.
  std::vector<std::string> shown;
  for (std::size_t g = 0; g < m.group_count(); ++g) shown.push_back(fmt::format("{:.5f}", m.at(g, li)));
  std::vector<double> rounded;
  for (const auto& s : shown) rounded.push_back(std::stod(s));
  const double hi = *std::max_element(rounded.begin(), rounded.end());
  const double lo = *std::min_element(rounded.begin(), rounded.end());

  std::string out;
  if (format == TableFormat::markdown) {
    out += fmt::format("| group | {} | mark |\n|---|---:|---|\n", md_cell(label));
  } else {
    out += "group,mean,mark\n";
  }
  for (std::size_t g = 0; g < m.group_count(); ++g) {
    std::string mark;
    if (rounded[g] == hi) mark = "max";
    if (rounded[g] == lo) mark += mark.empty() ? "min" : "+min";
    const std::string& group = m.groups()[g];
    if (format == TableFormat::markdown) {
      out += fmt::format("| {} | {} | {} |\n", md_cell(group), shown[g], mark);
    } else {
      const bool quote = group.find_first_of(",\"") != std::string::npos;
      std::string field = group;
      if (quote) {
        field.clear();
        for (char c : group) field += c == '"' ? std::string("\"\"") : std::string(1, c);
        field = "\"" + field + "\"";
      }
      out += fmt::format("{},{},{}\n", field, shown[g], mark);
    }
  }
  return out;
}

void emit_group_table(const GroupMeans& means, const std::string& label,
                      const std::filesystem::path& path, TableFormat format) {
  write_text_file(path, render_group_table(means, label, format));
}

}  // namespace noteprobe
