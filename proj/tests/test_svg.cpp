#include <gtest/gtest.h>

#include "goldens.hpp"

using namespace bandfit;

namespace {

std::size_t occurrences(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (std::size_t p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Svg, TwoPointSegment) {
  const std::string svg = goldens::segment_svg();
  EXPECT_EQ(occurrences(svg, "<path"), 1u);
  EXPECT_EQ(occurrences(svg, "<circle"), 2u);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_EQ(svg.substr(svg.size() - 7), "</svg>\n");
}

TEST(Svg, MarkersLandInsideTheCanvas) {
  const std::vector<Vec2> curve{{-3, 1}, {5, 2}, {0, 9}};
  const std::string svg = render_svg(curve, curve, nullptr);
  EXPECT_EQ(occurrences(svg, "<circle"), 3u);
  EXPECT_EQ(svg.find("cx=\"-"), std::string::npos);
  EXPECT_EQ(svg.find("cy=\"-"), std::string::npos);
}

TEST(Svg, SpectrumPanel) {
  SpectrumPlot plot;
  plot.theta = {1.0, 1e-3, 1e-9, 1e-17, 0.0};
  plot.sprime = {2.0, 1e-5, 1e-12, 1e-18, 1e-19};
  plot.delta_theta = 1e-10;
  plot.delta_sprime = 1e-13;
  plot.coef_guide = 3;
  SvgOptions opt;
  const std::vector<Vec2> curve{{0, 0}, {1, 1}};
  const std::string svg = render_svg(curve, {}, &plot, opt);
  EXPECT_EQ(occurrences(svg, "<polyline"), 2u);
  EXPECT_NE(svg.find("height=\"740\""), std::string::npos);
  EXPECT_EQ(occurrences(svg, "<circle"), 0u);
}

TEST(Svg, Deterministic) {
  EXPECT_EQ(goldens::segment_svg(), goldens::segment_svg());
  EXPECT_EQ(goldens::spiral_seed_svg(), goldens::spiral_seed_svg());
}

TEST(Svg, GoldenFiles) {
  for (const auto& [name, render] : goldens::cases()) EXPECT_TRUE(goldens::matches(name, render())) << name;
}
