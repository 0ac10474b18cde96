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

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "noteprobe/error.hpp"
#include "noteprobe/report.hpp"

namespace noteprobe {

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_csv(const GroupLabelMatrix& matrix) {
  std::string out = "label";
  for (const auto& g : matrix.groups()) out += "," + csv_field(g);
  out += '\n';
  for (std::size_t l = 0; l < matrix.label_count(); ++l) {
    out += csv_field(matrix.labels()[l]);
    for (std::size_t g = 0; g < matrix.group_count(); ++g)
      out += fmt::format(",{}", matrix.at(g, l));
    out += '\n';
  }
  return out;
}

void emit_csv(const DeviationMatrix& matrix, const std::filesystem::path& path) {
  write_text_file(path, to_csv(matrix.cells));
}

void emit_csv(const GroupMeans& means, const std::filesystem::path& path) {
  write_text_file(path, to_csv(means.means));
}

void emit_csv(const BaselineDistribution& baseline, const std::filesystem::path& path) {
  write_text_file(path, to_csv(baseline.prevalence));
}

void emit_counts_csv(const BaselineDistribution& baseline, const std::filesystem::path& path) {
  const auto& groups = baseline.prevalence.groups();
  std::string out = "label";
  for (const auto& g : groups) out += "," + csv_field(g);
  out += '\n';
  out += "__notes__";
  for (const auto& g : groups) out += fmt::format(",{}", baseline.group_counts.at(g));
  out += '\n';
  for (const auto& l : baseline.prevalence.labels()) {
    out += csv_field(l);
    for (const auto& g : groups) out += fmt::format(",{}", baseline.label_counts.at(g).at(l));
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<std::vector<std::string>> parse_csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw ValidationError("CSV: unterminated quoted field");
  if (field_started || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

GroupLabelMatrix parse_matrix_csv(const std::string& text) {
  const auto rows = parse_csv_rows(text);
  if (rows.empty() || rows[0].empty() || rows[0][0] != "label")
    throw ValidationError("CSV: expected a header starting with \"label\"");
  std::vector<std::string> groups(rows[0].begin() + 1, rows[0].end());
  std::vector<std::string> labels;
  for (std::size_t r = 1; r < rows.size(); ++r) labels.push_back(rows[r].at(0));
  GroupLabelMatrix m(groups, labels);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != groups.size() + 1)
      throw ValidationError("CSV: row " + std::to_string(r + 1) + " has the wrong width");
    for (std::size_t g = 0; g < groups.size(); ++g) {
      try {
        std::size_t used = 0;
        m.at(g, r - 1) = std::stod(rows[r][g + 1], &used);
        if (used != rows[r][g + 1].size()) throw std::invalid_argument("trailing text");
      } catch (const std::exception&) {
        throw ValidationError("CSV: bad number \"" + rows[r][g + 1] + "\" on row " +
                              std::to_string(r + 1));
      }
    }
  }
  return m;
}

}  // namespace noteprobe
