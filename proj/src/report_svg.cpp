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
#include <cmath>

#include <fmt/format.h>

#include "noteprobe/error.hpp"
#include "noteprobe/report.hpp"

namespace noteprobe {

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Rough advance width of 11px sans-serif text, for layout only.
int text_width(const std::string& s) { return static_cast<int>(s.size()) * 7; }

constexpr const char* kFont = "font-family=\"Helvetica, Arial, sans-serif\"";

}  // namespace

Rgb diverging_color(double t) {
  if (std::isnan(t)) t = 0.0;
  t = std::clamp(t, -1.0, 1.0);
  const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(t))));
  if (t > 0) return {255, fade, fade};
  if (t < 0) return {fade, fade, 255};
  return {255, 255, 255};
}

std::string to_hex(Rgb c) { return fmt::format("#{:02x}{:02x}{:02x}", c.r, c.g, c.b); }

std::vector<std::string> select_heatmap_rows(const GroupLabelMatrix& matrix,
                                             const HeatmapSpec& spec) {
  std::vector<std::string> rows = matrix.labels();
  if (!spec.label_frequency.empty()) {
    auto freq = [&](const std::string& l) {
      auto it = spec.label_frequency.find(l);
      return it == spec.label_frequency.end() ? std::size_t{0} : it->second;
    };
    std::stable_sort(rows.begin(), rows.end(), [&](const std::string& a, const std::string& b) {
      const auto fa = freq(a), fb = freq(b);
      return fa != fb ? fa > fb : a < b;
    });
  }
  if (spec.top_k > 0 && rows.size() > spec.top_k) rows.resize(spec.top_k);
  return rows;
}

std::string render_heatmap_svg(const DeviationMatrix& matrix, const HeatmapSpec& spec) {
  const auto& m = matrix.cells;
  if (m.empty()) throw ValidationError("heatmap: empty matrix");
  if (spec.cell_width < 1 || spec.cell_height < 1) throw ValidationError("heatmap: bad cell size");
  const auto rows = select_heatmap_rows(m, spec);

  double max_abs = 0.0;
  for (const auto& label : rows) {
    const std::size_t li = m.label_index(label);
    for (std::size_t g = 0; g < m.group_count(); ++g) max_abs = std::max(max_abs, std::abs(m.at(g, li)));
  }

  int label_w = 0;
  for (const auto& l : rows) label_w = std::max(label_w, text_width(l));
  int header_w = spec.cell_width;
  for (const auto& g : m.groups()) header_w = std::max(header_w, text_width(g) + 8);
  const int cw = std::max(spec.cell_width, header_w), ch = spec.cell_height;
  const int left = label_w + 16, top = (spec.title.empty() ? 12 : 36) + 20;
  const int grid_w = cw * static_cast<int>(m.group_count());
  const int grid_h = ch * static_cast<int>(rows.size());
  const int legend_top = top + grid_h + 16;
  const int width = left + std::max(grid_w, 11 * 24 + 120) + 16;
  const int height = legend_top + 44;

  std::string svg;
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\">\n",
      width, height);
  svg += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", width, height);
  if (!spec.title.empty()) {
    svg += fmt::format("<text x=\"{}\" y=\"22\" {} font-size=\"14\" font-weight=\"bold\">{}</text>\n",
                       left, kFont, xml_escape(spec.title));
  }
  for (std::size_t g = 0; g < m.group_count(); ++g) {
    svg += fmt::format("<text x=\"{}\" y=\"{}\" {} font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                       left + cw * static_cast<int>(g) + cw / 2, top - 6, kFont,
                       xml_escape(m.groups()[g]));
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t li = m.label_index(rows[r]);
    const int y = top + ch * static_cast<int>(r);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" {} font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                       left - 6, y + ch / 2 + 4, kFont, xml_escape(rows[r]));
    for (std::size_t g = 0; g < m.group_count(); ++g) {
      const double c = m.at(g, li);
      const double t = max_abs > 0 ? c / max_abs : 0.0;
      svg += fmt::format(
          "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#d0d0d0\">"
          "<title>{} / {}: {}</title></rect>\n",
          left + cw * static_cast<int>(g), y, cw, ch, to_hex(diverging_color(t)),
          xml_escape(rows[r]), xml_escape(m.groups()[g]), c);
    }
  }

  // Legend: eleven swatches from -max to +max.
  for (int i = 0; i <= 10; ++i) {
    const double t = (i - 5) / 5.0;
    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"24\" height=\"12\" fill=\"{}\" stroke=\"#d0d0d0\"/>\n",
                       left + 24 * i, legend_top, to_hex(diverging_color(t)));
  }
  svg += fmt::format("<text x=\"{}\" y=\"{}\" {} font-size=\"10\" text-anchor=\"start\">{:+.4g}</text>\n",
                     left, legend_top + 26, kFont, -max_abs);
  svg += fmt::format("<text x=\"{}\" y=\"{}\" {} font-size=\"10\" text-anchor=\"middle\">0</text>\n",
                     left + 24 * 5 + 12, legend_top + 26, kFont);
  svg += fmt::format("<text x=\"{}\" y=\"{}\" {} font-size=\"10\" text-anchor=\"end\">{:+.4g}</text>\n",
                     left + 24 * 11, legend_top + 26, kFont, max_abs);
  svg += fmt::format("<text x=\"{}\" y=\"{}\" {} font-size=\"10\">below average (blue) / above average (red)</text>\n",
                     left, legend_top + 40, kFont);
  svg += "</svg>\n";
  return svg;
}

void emit_heatmap_svg(const DeviationMatrix& matrix, const HeatmapSpec& spec,
                      const std::filesystem::path& path) {
  write_text_file(path, render_heatmap_svg(matrix, spec));
}

std::string render_age_plot_svg(const std::vector<AgeCurve>& curves) {
  if (curves.empty()) throw ValidationError("age plot: no curves");
  const auto axis = age_group_names();
  for (const auto& c : curves) {
    bool same = c.points.size() == axis.size();
    for (std::size_t i = 0; same && i < axis.size(); ++i) same = c.points[i].age == axis[i];
    if (!same) throw ValidationError("age plot: curve \"" + c.label + "\" does not span 18..89, over90");
  }

  const int left = 60, right = 20, panel_w = 730, panel_h = 180, gap = 56, top = 30;
  const double step = static_cast<double>(panel_w) / static_cast<double>(axis.size() - 1);
  const int width = left + panel_w + right;
  const int height = top + static_cast<int>(curves.size()) * (panel_h + gap);

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"#ffffff\"/>\n",
      width, height);

  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    const int y0 = top + static_cast<int>(k) * (panel_h + gap);
    double lo = 1.0, hi = 0.0;
    for (const auto& p : c.points) {
      lo = std::min(lo, p.mean);
      hi = std::max(hi, p.mean);
      if (p.prevalence) {
        lo = std::min(lo, *p.prevalence);
        hi = std::max(hi, *p.prevalence);
      }
    }
    const double pad = std::max(0.05 * (hi - lo), 0.005);
    lo = std::max(0.0, lo - pad);
    hi = std::min(1.0, hi + pad);
    if (hi <= lo) hi = lo + 0.01;
    auto x_of = [&](std::size_t i) { return left + step * static_cast<double>(i); };
    auto y_of = [&](double v) { return y0 + panel_h * (hi - v) / (hi - lo); };

    svg += fmt::format("<g id=\"panel-{}\">\n", k);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" {} font-size=\"13\" font-weight=\"bold\">{}</text>\n",
                       left, y0 - 10, kFont, xml_escape(c.label));
    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888888\"/>\n",
                       left, y0, panel_w, panel_h);
    for (int t = 0; t <= 4; ++t) {
      const double v = lo + (hi - lo) * t / 4.0;
      svg += fmt::format("<text x=\"{}\" y=\"{:.2f}\" {} font-size=\"10\" text-anchor=\"end\">{:.3f}</text>\n",
                         left - 6, y_of(v) + 3, kFont, v);
    }
    for (std::size_t i = 0; i < axis.size(); ++i) {
      if (i % 6 != 0 && i + 1 != axis.size()) continue;
      svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#888888\"/>\n",
                         x_of(i), y0 + panel_h, y0 + panel_h + 4);
      svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" {} font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
                         x_of(i), y0 + panel_h + 16, kFont, i + 1 == axis.size() ? "over 90" : axis[i]);
    }
    svg += fmt::format("<text x=\"{}\" y=\"{}\" {} font-size=\"10\" text-anchor=\"middle\">simulated age</text>\n",
                       left + panel_w / 2, y0 + panel_h + 30, kFont);

    std::string points;
    for (std::size_t i = 0; i < c.points.size(); ++i)
      points += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", x_of(i), y_of(c.points[i].mean));
    svg += fmt::format("<polyline class=\"prediction\" fill=\"none\" stroke=\"#b2182b\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                       points);
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"1.8\" fill=\"#b2182b\"><title>{}: {}</title></circle>\n",
                         x_of(i), y_of(c.points[i].mean), c.points[i].age, c.points[i].mean);
    }
    if (c.has_overlay) {
      // Dotted training prevalence, broken where an age has no notes.
      std::string run;
      auto flush = [&] {
        if (run.find(' ') != std::string::npos) {
          svg += fmt::format("<polyline class=\"prevalence\" fill=\"none\" stroke=\"#000000\" "
                             "stroke-dasharray=\"2,3\" points=\"{}\"/>\n", run);
        }
        run.clear();
      };
      for (std::size_t i = 0; i < c.points.size(); ++i) {
        if (!c.points[i].prevalence) {
          flush();
          continue;
        }
        run += fmt::format("{}{:.2f},{:.2f}", run.empty() ? "" : " ", x_of(i), y_of(*c.points[i].prevalence));
      }
      flush();
      for (std::size_t i = 0; i < c.points.size(); ++i) {
        if (!c.points[i].prevalence) continue;
        svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"1.2\" fill=\"#000000\"/>\n",
                           x_of(i), y_of(*c.points[i].prevalence));
      }
    }
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void emit_age_plot_svg(const std::vector<AgeCurve>& curves, const std::filesystem::path& path) {
  write_text_file(path, render_age_plot_svg(curves));
}

}  // namespace noteprobe
