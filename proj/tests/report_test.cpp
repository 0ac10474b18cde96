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

#include "noteprobe/report.hpp"

#include <regex>

#include <gtest/gtest.h>

#include "noteprobe/error.hpp"
#include "support/temp_dir.hpp"

namespace noteprobe {
namespace {

using testing::TempDir;

GroupMeans means_of(const std::vector<std::string>& groups, const std::vector<double>& p) {
  GroupMeans m;
  m.characteristic = "test";
  m.cohort_size = 10;
  m.means = GroupLabelMatrix(groups, {"mortality"});
  for (std::size_t i = 0; i < p.size(); ++i) m.means.at(i, 0) = p[i];
  return m;
}

// fill attribute of every cell rect, keyed "label/group".
std::map<std::string, std::string> cell_fills(const std::string& svg) {
  std::map<std::string, std::string> out;
  std::regex cell(R"re(fill="(#[0-9a-f]{6})" stroke="#d0d0d0"><title>([^<]*) / ([^<:]*):)re");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), cell); it != std::sregex_iterator(); ++it)
    out[(*it)[2].str() + "/" + (*it)[3].str()] = (*it)[1].str();
  return out;
}

TEST(Csv, OneLabelTwoGroups) {
  GroupLabelMatrix m({"female", "male"}, {"mortality"});
  m.at(0, 0) = 0.25;
  m.at(1, 0) = 0.125;
  EXPECT_EQ(to_csv(m), "label,female,male\nmortality,0.25,0.125\n");
}

TEST(Csv, RoundTripIsExact) {
  GroupLabelMatrix m({"a", "b,c", "d\"e"}, {"Abuse of drugs", "x, y"});
  const double values[] = {1.0 / 3.0, -2.0 / 7.0, 1e-300, 0.1 + 0.2, -0.0, 123456.789};
  for (std::size_t i = 0; i < 6; ++i) m.at(i / 2, i % 2) = values[i];
  const auto back = parse_matrix_csv(to_csv(m));
  EXPECT_EQ(back.groups(), m.groups());
  EXPECT_EQ(back.labels(), m.labels());
  for (std::size_t g = 0; g < 3; ++g)
    for (std::size_t l = 0; l < 2; ++l) EXPECT_EQ(back.at(g, l), m.at(g, l));
}

TEST(Csv, DeviationRowsSumToZeroAfterParsing) {
  GroupMeans m;
  m.means = GroupLabelMatrix({"a", "b", "c", "d"}, {"x", "y"});
  const double p[] = {0.11, 0.52, 0.33, 0.91, 0.27, 0.05, 0.64, 0.48};
  for (std::size_t i = 0; i < 8; ++i) m.means.at(i / 2, i % 2) = p[i];
  TempDir dir;
  emit_csv(deviation(m), dir / "dev.csv");
  const auto parsed = parse_matrix_csv(read_text_file(dir / "dev.csv"));
  for (std::size_t l = 0; l < parsed.label_count(); ++l) {
    double sum = 0;
    for (std::size_t g = 0; g < parsed.group_count(); ++g) sum += parsed.at(g, l);
    EXPECT_NEAR(sum, 0.0, 1e-9);
  }
}

TEST(Csv, ParserHandlesQuotesAndCrlf) {
  const auto rows = parse_csv_rows("a,\"b,\"\"c\"\"\"\r\n,\n\"x\ny\"");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"a", "b,\"c\""}));
  EXPECT_EQ(rows[1], (std::vector<std::string>{"", ""}));
  EXPECT_EQ(rows[2], (std::vector<std::string>{"x\ny"}));
  EXPECT_THROW(parse_csv_rows("\"open"), ValidationError);
  EXPECT_THROW(parse_matrix_csv("label,a\nx,notanumber\n"), ValidationError);
}

TEST(Color, NeutralAndSymmetric) {
  EXPECT_EQ(to_hex(diverging_color(0.0)), "#ffffff");
  EXPECT_EQ(to_hex(diverging_color(1.0)), "#ff0000");
  EXPECT_EQ(to_hex(diverging_color(-1.0)), "#0000ff");
  EXPECT_EQ(diverging_color(7.0), diverging_color(1.0));
  for (int i = 0; i <= 100; ++i) {
    const double t = i / 100.0;
    const Rgb pos = diverging_color(t), neg = diverging_color(-t);
    EXPECT_EQ(pos.r, neg.b);
    EXPECT_EQ(pos.g, neg.g);
    EXPECT_EQ(pos.b, neg.r);
  }
}

TEST(Heatmap, AllZeroCellsAreNeutral) {
  DeviationMatrix d{"g", GroupLabelMatrix({"a", "b"}, {"x", "y"})};
  const auto fills = cell_fills(render_heatmap_svg(d, {}));
  ASSERT_EQ(fills.size(), 4u);
  for (const auto& [cell, fill] : fills) EXPECT_EQ(fill, "#ffffff") << cell;
}

TEST(Heatmap, SinglePositiveCellIsReddest) {
  DeviationMatrix d{"g", GroupLabelMatrix({"a", "b", "c"}, {"x", "y"})};
  d.cells.at(1, 0) = 0.02;
  d.cells.at(0, 0) = -0.01;
  d.cells.at(2, 0) = -0.01;
  const auto fills = cell_fills(render_heatmap_svg(d, {}));
  EXPECT_EQ(fills.at("x/b"), "#ff0000");
  for (const auto& [cell, fill] : fills) {
    if (cell == "x/b") continue;
    EXPECT_EQ(fill.substr(5, 2), "ff") << cell;  // blue channel saturated: neutral or blue
  }
}

TEST(Heatmap, GenderExampleTransgenderIsBluest) {
  const auto d = deviation(means_of({"female", "male", "transgender"}, {0.335, 0.333, 0.326}));
  const std::string svg = render_heatmap_svg(d, {});
  const auto f = svg.find(">female<"), m = svg.find(">male<"), t = svg.find(">transgender<");
  ASSERT_NE(f, std::string::npos);
  EXPECT_LT(f, m);
  EXPECT_LT(m, t);
  const auto fills = cell_fills(svg);
  EXPECT_EQ(fills.at("mortality/transgender"), "#0000ff");
  EXPECT_EQ(fills.at("mortality/female").substr(1, 2), "ff");
  EXPECT_NE(svg.find("mortality / transgender: -0.008"), std::string::npos);
}

TEST(Heatmap, TopKByFrequency) {
  DeviationMatrix d{"g", GroupLabelMatrix({"a", "b"}, {"l1", "l2", "l3", "l4"})};
  HeatmapSpec spec;
  spec.top_k = 2;
  spec.label_frequency = {{"l1", 3}, {"l2", 10}, {"l3", 3}, {"l4", 0}};
  EXPECT_EQ(select_heatmap_rows(d.cells, spec), (std::vector<std::string>{"l2", "l1"}));
  EXPECT_EQ(cell_fills(render_heatmap_svg(d, spec)).size(), 4u);
  spec.label_frequency.clear();
  spec.top_k = 3;
  EXPECT_EQ(select_heatmap_rows(d.cells, spec), (std::vector<std::string>{"l1", "l2", "l3"}));
}

TEST(Heatmap, EmptyMatrixRejectedAndOutputDeterministic) {
  EXPECT_THROW(render_heatmap_svg(DeviationMatrix{}, {}), ValidationError);
  const auto d = deviation(means_of({"a", "b"}, {0.2, 0.4}));
  HeatmapSpec spec;
  spec.title = "Influence of <gender> & more";
  EXPECT_EQ(render_heatmap_svg(d, spec), render_heatmap_svg(d, spec));
  EXPECT_NE(render_heatmap_svg(d, spec).find("&lt;gender&gt; &amp;"), std::string::npos);
}

TEST(GroupTable, EthnicityExampleMarksNoMention) {
  const auto m = means_of({"no_mention", "white", "african_american", "hispanic", "asian"},
                          {0.333, 0.329, 0.329, 0.331, 0.330});
  EXPECT_EQ(render_group_table(m, "mortality", TableFormat::markdown),
            "| group | mortality | mark |\n"
            "|---|---:|---|\n"
            "| no_mention | 0.33300 | max |\n"
            "| white | 0.32900 | min |\n"
            "| african_american | 0.32900 | min |\n"
            "| hispanic | 0.33100 |  |\n"
            "| asian | 0.33000 |  |\n");
}

TEST(GroupTable, SingleGroupIsMaxAndMin) {
  EXPECT_EQ(render_group_table(means_of({"only"}, {0.5}), "mortality", TableFormat::csv),
            "group,mean,mark\nonly,0.50000,max+min\n");
}

TEST(GroupTable, TiesCompareDisplayedValues) {
  const auto table = render_group_table(means_of({"a", "b", "c"}, {0.1000001, 0.1000002, 0.2}),
                                        "mortality", TableFormat::csv);
  EXPECT_EQ(table, "group,mean,mark\na,0.10000,min\nb,0.10000,min\nc,0.20000,max\n");
  EXPECT_THROW(render_group_table(means_of({"a"}, {0.1}), "sepsis", TableFormat::csv),
               ValidationError);
}

AgeCurve curve(const std::string& label, const std::function<double(const std::string&)>& f,
               bool overlay = false) {
  AgeCurve c{label, {}, overlay};
  for (const auto& a : age_group_names())
    c.points.push_back({a, f(a), overlay ? std::optional<double>(0.2) : std::nullopt});
  return c;
}

TEST(AgePlot, FlatCurveIsHorizontal) {
  const std::string svg = render_age_plot_svg({curve("mortality", [](auto&) { return 0.5; })});
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, std::regex(R"re(class="prediction"[^>]*points="([^"]*)")re")));
  std::set<std::string> ys;
  std::regex point(R"(([0-9.]+),([0-9.]+))");
  const std::string pts = m[1].str();
  for (auto it = std::sregex_iterator(pts.begin(), pts.end(), point); it != std::sregex_iterator(); ++it)
    ys.insert((*it)[2].str());
  EXPECT_EQ(ys.size(), 1u);
  EXPECT_EQ(svg.find("class=\"prevalence\""), std::string::npos);
  EXPECT_NE(svg.find(">over 90<"), std::string::npos);
}

TEST(AgePlot, OverlayAddsDottedLine) {
  const std::string svg = render_age_plot_svg({curve("mortality", [](auto&) { return 0.5; }, true)});
  EXPECT_NE(svg.find("class=\"prediction\""), std::string::npos);
  EXPECT_NE(svg.find("class=\"prevalence\" fill=\"none\" stroke=\"#000000\" stroke-dasharray"),
            std::string::npos);
}

TEST(AgePlot, SpikeHasSingleMaximum) {
  const std::string svg = render_age_plot_svg(
      {curve("mortality", [](const std::string& a) { return a == "over90" ? 0.5 : 0.27; })});
  std::regex circle(R"re(cy="([0-9.]+)" r="1.8" fill="#b2182b"><title>([^:]+):)re");
  double best = 1e9;
  std::vector<std::string> at_best;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), circle); it != std::sregex_iterator(); ++it) {
    const double y = std::stod((*it)[1].str());
    if (y < best - 1e-9) {
      best = y;
      at_best = {(*it)[2].str()};
    } else if (std::abs(y - best) < 1e-9) {
      at_best.push_back((*it)[2].str());
    }
  }
  EXPECT_EQ(at_best, std::vector<std::string>{"over90"});
}

TEST(AgePlot, RaggedAxesRejected) {
  auto c = curve("mortality", [](auto&) { return 0.5; });
  c.points.pop_back();
  EXPECT_THROW(render_age_plot_svg({c}), ValidationError);
  EXPECT_THROW(render_age_plot_svg({}), ValidationError);
}

}  // namespace
}  // namespace noteprobe
