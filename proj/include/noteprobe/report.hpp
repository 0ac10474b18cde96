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

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "noteprobe/analysis.hpp"

namespace noteprobe {

// CSV with header "label,<group>,..." and one row per label. Values use the
// shortest round-trip representation, so parsing gives back the same doubles.
std::string to_csv(const GroupLabelMatrix& matrix);
void emit_csv(const DeviationMatrix& matrix, const std::filesystem::path& path);
void emit_csv(const GroupMeans& means, const std::filesystem::path& path);
// Prevalence matrix; counts go to a sibling file via emit_counts_csv.
void emit_csv(const BaselineDistribution& baseline,
              const std::filesystem::path& path);
void emit_counts_csv(const BaselineDistribution& baseline,
                     const std::filesystem::path& path);

// RFC 4180 subset: quoted fields, doubled quotes, LF or CRLF row ends.
std::vector<std::vector<std::string>> parse_csv_rows(const std::string& text);
// Inverse of to_csv.
GroupLabelMatrix parse_matrix_csv(const std::string& text);

struct Rgb {
  int r = 255;
  int g = 255;
  int b = 255;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Diverging scale: -1 blue, 0 white, +1 red; |t| > 1 is clamped.
Rgb diverging_color(double t);
std::string to_hex(Rgb color);

struct HeatmapSpec {
  std::size_t top_k = 24;
  // Test-set frequency per label; rows are the top_k most frequent labels
  // (ties broken by name). Empty: keep the matrix label order.
  std::map<std::string, std::size_t> label_frequency;
  std::string title;
  int cell_width = 64;
  int cell_height = 20;
};

// Labels selected for the heatmap rows, in row order.
std::vector<std::string> select_heatmap_rows(const GroupLabelMatrix& matrix,
                                             const HeatmapSpec& spec);

std::string render_heatmap_svg(const DeviationMatrix& matrix,
                               const HeatmapSpec& spec);
void emit_heatmap_svg(const DeviationMatrix& matrix, const HeatmapSpec& spec,
                      const std::filesystem::path& path);

enum class TableFormat { markdown, csv };

// Per group: mean with 5 decimals and "max"/"min" markers (ties all marked).
std::string render_group_table(const GroupMeans& means, const std::string& label,
                               TableFormat format);
void emit_group_table(const GroupMeans& means, const std::string& label,
                      const std::filesystem::path& path, TableFormat format);

std::string render_age_plot_svg(const std::vector<AgeCurve>& curves);
void emit_age_plot_svg(const std::vector<AgeCurve>& curves,
                       const std::filesystem::path& path);

// Writes `content` verbatim (binary mode, no newline translation).
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace noteprobe
